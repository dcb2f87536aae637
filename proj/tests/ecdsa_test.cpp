/*
 * Copyright 2026 The noncehunt Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <gtest/gtest.h>

#include <random>
#include <set>

#include "noncehunt/ecdsa.hpp"
#include "test_support.hpp"

namespace noncehunt {
namespace {

SigningKey random_key(std::mt19937_64& rng) { return SigningKey(random_nonzero(rng)); }

TEST(Ecdsa, SignVerifyRoundTrip) {
  std::mt19937_64 rng(21);
  for (int i = 0; i < 1000; ++i) {
    SigningKey key = random_key(rng);
    Scalar e = Scalar(testing::random_u256(rng));
    Signature sig = sign(key, e, random_nonzero(rng));
    ASSERT_TRUE(verify(key.public_key(), e, sig));
  }
}

TEST(Ecdsa, SignMatchesIndependentEvaluation) {
  // r, s frozen from the plain-integer evaluation in tests/oracles/oracle_vectors.py
  SigningKey key(Scalar::from_hex("0x0c28fca386c7a227600b2fe50b7cae11ec86d3bf1fbe471be89827e19d72aa1d"));
  Scalar k = Scalar::from_hex("0x7a1a7e52797fc8caaa435d2a4dace39158504bf204fbe19f14dbb427faee50ae");
  Scalar e = Scalar::from_hex("0x4b688df40bcedbe641ddb16ff0a1842d9c67ea1c3bf63f3e0471baa664531d1a");
  Signature sig = sign(key, e, k);
  EXPECT_EQ(sig.r.to_hex(), "0xd47ce4c025c35ec440bc81d99834a624875161a26bf56ef7fdc0f5d52f843ad1");
  EXPECT_EQ(sig.s.to_hex(), "0x8266c63b547ccbb61054c0f0ae8396f4c84ebb024fa73e73f6501b877ad5da17");
  EXPECT_EQ(to_hex(key.address()), "0x29717bf51d8afca452459936d395668a576bce66");
}

TEST(Ecdsa, VerifyRejectsAndMalleability) {
  std::mt19937_64 rng(22);
  SigningKey key = random_key(rng);
  Scalar e = random_nonzero(rng);
  Scalar k = random_nonzero(rng);
  Signature sig = sign(key, e, k);
  EXPECT_FALSE(verify(key.public_key(), e + Scalar::one(), sig));

  Signature flipped = sig;
  flipped.s = -sig.s;
  EXPECT_TRUE(verify(key.public_key(), e, flipped));
  // -k produces exactly the flipped s and the opposite R parity
  Signature with_neg_nonce = sign(key, e, -k);
  EXPECT_EQ(with_neg_nonce.r, sig.r);
  EXPECT_EQ(with_neg_nonce.s, -sig.s);
  EXPECT_NE(with_neg_nonce.parity, sig.parity);

  Signature zero_s = sig;
  zero_s.s = Scalar::zero();
  EXPECT_FALSE(verify(key.public_key(), e, zero_s));
  EXPECT_FALSE(verify(CurvePoint::identity(), e, sig));
}

TEST(Ecdsa, LowSNormalization) {
  std::mt19937_64 rng(23);
  int flipped = 0;
  for (int i = 0; i < 200; ++i) {
    SigningKey key = random_key(rng);
    Scalar e = random_nonzero(rng);
    Signature raw = sign(key, e, random_nonzero(rng));
    Signature low = normalize_low_s(raw);
    EXPECT_TRUE(low.low_s);
    EXPECT_FALSE(low.s.is_high());
    if (raw.s.is_high()) {
      ++flipped;
      EXPECT_EQ(low.s, -raw.s);
      EXPECT_NE(low.parity, raw.parity);
    } else {
      EXPECT_EQ(low, raw);
    }
    EXPECT_EQ(recover_public_key(e, low), key.public_key());
  }
  EXPECT_GT(flipped, 50);
  EXPECT_LT(flipped, 150);
}

TEST(Ecdsa, RecoverPublicKey) {
  std::mt19937_64 rng(24);
  for (int i = 0; i < 50; ++i) {
    SigningKey key = random_key(rng);
    Scalar e = random_nonzero(rng);
    Signature sig = sign(key, e, random_nonzero(rng));
    EXPECT_EQ(recover_public_key(e, sig), key.public_key());

    Signature other = sig;
    other.parity ^= 1;
    CurvePoint wrong = recover_public_key(e, other);
    EXPECT_NE(wrong, key.public_key());
    EXPECT_TRUE(verify(wrong, e, sig));  // a different, still valid, key for (e, r, s)
  }
}

TEST(Ecdsa, RecoverRejectsRWithoutCurvePoint) {
  std::uint64_t x = 1;
  while (secp256k1().lift_x(U256(x), false).has_value()) ++x;
  Signature sig{Scalar(U256(x)), Scalar(U256(12345)), 0, false};
  try {
    (void)recover_public_key(Scalar(U256(99)), sig);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NoSuchPoint);
  }
}

TEST(Ecdsa, SignatureHexRoundTrip) {
  std::mt19937_64 rng(25);
  SigningKey key = random_key(rng);
  Signature sig = sign(key, random_nonzero(rng), random_nonzero(rng));
  std::string text = sig.to_hex();
  EXPECT_EQ(text.size(), 2u + 130u);
  EXPECT_EQ(Signature::from_hex(text), sig);
  EXPECT_THROW(Signature::from_hex("0x00"), Error);
}

TEST(Ecdsa, DegenerateNonce) {
  SigningKey key(Scalar(U256(5)));
  try {
    (void)sign(key, Scalar(U256(1)), Scalar::zero());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DegenerateNonce);
  }

  // e = -x*r forces s = 0: fixed policies surface it, FreshRandom redraws.
  Scalar k(U256(777));
  Scalar r = x_mod_n(secp256k1().multiply_base(k));
  Scalar e = -(key.secret() * r);
  auto fixed = NoncePolicy::constant(k);
  try {
    (void)sign_with(key, e, fixed);
    FAIL();
  } catch (const Error& err) {
    EXPECT_EQ(err.code(), ErrorCode::DegenerateNonce);
  }
  auto fresh = NoncePolicy::fresh_random(1);
  EXPECT_TRUE(verify(key.public_key(), e, sign_with(key, e, fresh)));
}

TEST(NoncePolicies, ConstantSharesR) {
  std::mt19937_64 rng(26);
  SigningKey key = random_key(rng);
  auto policy = NoncePolicy::constant(random_nonzero(rng));
  Signature a = sign_with(key, random_nonzero(rng), policy);
  Signature b = sign_with(key, random_nonzero(rng), policy);
  EXPECT_EQ(a.r, b.r);
  EXPECT_NE(a.s, b.s);
}

TEST(NoncePolicies, AffineSequenceFollowsCoefficients) {
  std::mt19937_64 rng(27);
  SigningKey key = random_key(rng);
  Scalar k0 = random_nonzero(rng);
  std::vector<std::pair<Scalar, Scalar>> coeffs;
  for (int i = 0; i < 6; ++i) coeffs.emplace_back(random_nonzero(rng), random_nonzero(rng));
  auto policy = NoncePolicy::affine_sequence(k0, coeffs);
  for (int i = 0; i < 6; ++i) {
    Scalar used;
    Scalar e = random_nonzero(rng);
    Signature sig = sign_with(key, e, policy, &used);
    EXPECT_EQ(used, coeffs[i].first * policy.base_nonce() + coeffs[i].second);
    EXPECT_EQ(sig.r, x_mod_n(secp256k1().multiply_base(used)));
  }
  EXPECT_THROW(policy.next(key, Scalar::one()), Error);

  auto counter = NoncePolicy::counter(k0, 3);
  for (std::uint64_t i = 0; i < 3; ++i) EXPECT_EQ(counter.next(key, Scalar::one()), k0 + Scalar(U256(i)));
}

TEST(NoncePolicies, FreshRandomNeverRepeatsR) {
  std::mt19937_64 rng(28);
  SigningKey key = random_key(rng);
  auto policy = NoncePolicy::fresh_random(99);
  std::set<U256> seen;
  for (int i = 0; i < 10000; ++i) {
    Signature sig = sign_with(key, Scalar(U256(static_cast<std::uint64_t>(i + 1))), policy);
    ASSERT_TRUE(seen.insert(sig.r.value()).second);
  }
}

TEST(Rfc6979, KnownAnswersFromIndependentImplementation) {
  // frozen from python-ecdsa's generate_k (tests/oracles/oracle_vectors.py)
  struct Vector {
    const char* x;
    const char* e;
    const char* k;
    const char* r;
  };
  const Vector vectors[] = {
      {"0x0000000000000000000000000000000000000000000000000000000000000001",
       "0xa0dc65ffca799873cbea0ac274015b9526505daaaed385155425f7337704883e",
       "0x8f8a276c19f4149656b280621e358cce24f5f52542772691ee69063b74f15d15",
       "0x934b1ea10a4b3c1757e2b0c017d0b6143ce3c9a7e6a4a49860d7a6ab210ee3d8"},
      {"0x0c28fca386c7a227600b2fe50b7cae11ec86d3bf1fbe471be89827e19d72aa1d",
       "0xb1a77cb747185086ce1f7950a69ee70be370fadd6fb03eca7b0d0e10e1a8e203",
       "0xf66961dbbcc81009adea9123a0debfc5495d7925d083090326e80f94644b5cfb",
       "0x19bc3c08c9c19a99c0c7427d68d857dd69311e9d2fedea262c63e9fb82319296"},
      {"0xfffffffffffffffffffffffffffffffebaaedce6af48a03bbfd25e8cd0364140",
       "0x7d1833f54854ac51659521afcd0ec6dca2ce2351429614bfa28a756b1b3c637f",
       "0x02b8b47f0a72ec6b38a15e02ebe1d6c6ce9235e6b3f4852b5a9b64de8cdbe633",
       "0x059385ce615b7ab6a0db2a3b83f0566d3bc750e958121635ba497ccb4e3ce801"},
  };
  for (const auto& v : vectors) {
    SigningKey key(Scalar::from_hex(v.x));
    Scalar e = Scalar::from_hex(v.e);
    EXPECT_EQ(rfc6979_nonce(key, e).to_hex(), v.k);
    auto policy = NoncePolicy::rfc6979();
    EXPECT_EQ(sign_with(key, e, policy).r.to_hex(), v.r);
  }
}

TEST(Rfc6979, DeterministicAndDistinct) {
  std::mt19937_64 rng(29);
  SigningKey key = random_key(rng);
  Scalar e1 = random_nonzero(rng), e2 = random_nonzero(rng);
  EXPECT_EQ(rfc6979_nonce(key, e1), rfc6979_nonce(key, e1));
  auto policy = NoncePolicy::rfc6979();
  EXPECT_NE(sign_with(key, e1, policy).r, sign_with(key, e2, policy).r);
  // small orders exercise the bits2int truncation path
  const Curve& toy = testing::toy_curve();
  SigningKey toy_key(Scalar(toy.order(), U256(77)), toy);
  Scalar k = rfc6979_nonce(toy_key, Scalar(toy.order(), U256(5)));
  EXPECT_FALSE(k.is_zero());
  EXPECT_LT(k.value(), U256(1009));
}

}  // namespace
}  // namespace noncehunt
