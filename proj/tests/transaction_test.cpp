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

#include <functional>
#include <random>

#include "noncehunt/transaction.hpp"
#include "test_support.hpp"

namespace noncehunt {
namespace {

constexpr TxType kAllTypes[] = {TxType::Legacy, TxType::AccessList, TxType::DynamicFee};

ErrorCode parse_error(ByteView raw) {
  try {
    (void)parse_transaction(raw);
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "parse accepted " << hex::encode(raw);
  return ErrorCode::MissingInput;
}

RawTransaction eip155_example() {
  RawTransaction tx;
  tx.type = TxType::Legacy;
  tx.chain_id = 1;
  tx.nonce = 9;
  tx.gas_price = U256(20'000'000'000ull);
  tx.gas_limit = 21000;
  tx.to = *hex::decode_fixed<20>("0x3535353535353535353535353535353535353535");
  tx.value = U256(1'000'000'000'000'000'000ull);
  return tx;
}

TEST(TxCodec, Eip155WorkedExample) {
  RawTransaction tx = eip155_example();
  EXPECT_EQ(hex::encode(signing_payload(tx), false),
            "ec098504a817c800825208943535353535353535353535353535353535353535880de0b6b3a764000080018080");
  EXPECT_EQ(signing_hash(tx).to_hex(), "0xdaf5a779ae972f972197303d7b574746c7ef83eadac0f2791ad23db92e4c8e53");

  SigningKey key(Scalar::from_hex("0x4646464646464646464646464646464646464646464646464646464646464646"));
  sign_transaction(tx, key, rfc6979_nonce(key, signing_hash(tx)));
  const std::string raw_hex =
      "0xf86c098504a817c800825208943535353535353535353535353535353535353535880de0b6b3a76400008025a028ef61340bd939bc2195"
      "fe537567866003e1a15d3c71ff63e1590620aa636276a067cbe9d8997f761aecb703304b3800ccf555c9f3dc64214b297fb1966a3b6d83";
  EXPECT_EQ(hex::encode(serialize(tx)), raw_hex);
  EXPECT_EQ(tx.v, U256(37));

  RawTransaction parsed = parse_transaction_hex(raw_hex);
  EXPECT_EQ(parsed, tx);
  EXPECT_EQ(to_hex(sender_address(parsed)), "0x9d8a62f656a8d1615c1294fd71e9cfb3e4855a4f");
  EXPECT_EQ(to_hex(tx_hash(parsed)), "0x33469b22e9f636356c4160a87eb19df52b7412e8eac32a4a55ffe88ea8350788");
}

TEST(TxCodec, TypedSigningHashesMatchIndependentEncoder) {
  Address usdc = *hex::decode_fixed<20>("0xa0b86991c6218b36c1d19d4a2e9eb0ce3606eb48");
  RawTransaction t1;
  t1.type = TxType::AccessList;
  t1.chain_id = 137;
  t1.nonce = 7;
  t1.gas_price = U256(30'000'000'000ull);
  t1.gas_limit = 60000;
  t1.to = usdc;
  t1.value = U256(12345);
  t1.data = {0xa9, 0x05, 0x9c, 0xbb};
  Hash32 slot{};
  slot[31] = 1;
  t1.access_list = {{usdc, {slot}}};
  // frozen from tests/oracles/oracle_vectors.py
  EXPECT_EQ(signing_hash(t1).to_hex(), "0x7c850fb44cb4d9c9f19383395c7f8d36183c7cd76fbc50e48accd1296c74d272");

  RawTransaction t2;
  t2.type = TxType::DynamicFee;
  t2.chain_id = 137;
  t2.nonce = 42;
  t2.max_priority_fee_per_gas = U256(2'000'000'000ull);
  t2.max_fee_per_gas = U256(80'000'000'000ull);
  t2.gas_limit = 250000;
  t2.to = usdc;
  t2.data = {0xde, 0xad, 0xbe, 0xef};
  EXPECT_EQ(signing_hash(t2).to_hex(), "0xe3c3c814dab66fe700ca94ebc2692fe96dc7657cc3a832668b44b73eda87910e");

  RawTransaction t3;  // pre-155 contract creation
  t3.gas_price = U256(1);
  t3.gas_limit = 53000;
  t3.data = {0x60, 0x00};
  EXPECT_EQ(hex::encode(keccak256(signing_payload(t3)), false),
            "ef49478fed85cec0448daca885a42c86adbd89dcf2092af1b428e2b3b6643146");
}

TEST(TxCodec, Eip155VDerivesChainAndParity) {
  std::mt19937_64 rng(41);
  SigningKey key(random_nonzero(rng));
  RawTransaction tx = testing::random_unsigned_tx(rng, TxType::Legacy, 137);
  sign_transaction(tx, key, random_nonzero(rng));
  tx.v = U256(35 + 2 * 137 + 1);
  RawTransaction parsed = parse_transaction(serialize(tx));
  EXPECT_EQ(parsed.chain_id, 137u);
  EXPECT_EQ(parsed.parity(), 1);

  tx.chain_id.reset();
  tx.v = U256(28);
  parsed = parse_transaction(serialize(tx));
  EXPECT_FALSE(parsed.chain_id.has_value());
  EXPECT_EQ(parsed.parity(), 1);
}

TEST(TxCodec, SignedRoundTripAndSender) {
  std::mt19937_64 rng(42);
  for (int i = 0; i < 150; ++i) {
    TxType type = kAllTypes[i % 3];
    SigningKey key(random_nonzero(rng));
    RawTransaction tx = testing::random_unsigned_tx(rng, type);
    if (type == TxType::Legacy && i % 2 == 0) tx.chain_id.reset();
    sign_transaction(tx, key, random_nonzero(rng), i % 4 != 0);
    Bytes raw = serialize(tx);
    RawTransaction parsed = parse_transaction(raw);
    ASSERT_EQ(parsed, tx);
    EXPECT_EQ(sender_address(parsed), key.address());
    EXPECT_TRUE(verify(key.public_key(), signing_hash(parsed), transaction_signature(parsed)));
  }
}

TEST(TxCodec, SigningHashIgnoresSignatureButNotPayload) {
  std::mt19937_64 rng(43);
  for (TxType type : kAllTypes) {
    SigningKey key(random_nonzero(rng));
    RawTransaction tx = testing::random_unsigned_tx(rng, type);
    tx.to = Address{};
    sign_transaction(tx, key, random_nonzero(rng));
    Scalar e = signing_hash(tx);

    RawTransaction sig_changed = tx;
    sig_changed.r = sig_changed.r + U256(1);
    sig_changed.s = U256(5);
    sig_changed.v = tx.type == TxType::Legacy ? tx.v + U256(1) : U256(1) - tx.v;
    EXPECT_EQ(signing_hash(sig_changed), e);

    std::vector<std::function<void(RawTransaction&)>> mutations = {
        [](RawTransaction& t) { t.nonce += 1; },
        [](RawTransaction& t) { t.gas_limit += 1; },
        [](RawTransaction& t) { (*t.to)[0] ^= 1; },
        [](RawTransaction& t) { t.value = t.value + U256(1); },
        [](RawTransaction& t) { t.data.push_back(0); },
        [](RawTransaction& t) { *t.chain_id += 1; },
    };
    if (type == TxType::DynamicFee) {
      mutations.push_back([](RawTransaction& t) { t.max_fee_per_gas = t.max_fee_per_gas + U256(1); });
      mutations.push_back([](RawTransaction& t) { t.max_priority_fee_per_gas = t.max_priority_fee_per_gas + U256(1); });
    } else {
      mutations.push_back([](RawTransaction& t) { t.gas_price = t.gas_price + U256(1); });
    }
    if (type != TxType::Legacy) {
      mutations.push_back([](RawTransaction& t) { t.access_list.push_back({}); });
    }
    for (auto& mutate : mutations) {
      RawTransaction changed = tx;
      mutate(changed);
      EXPECT_NE(signing_hash(changed), e);
    }
  }
}

TEST(TxCodec, SenderFailuresAndParityFlip) {
  std::mt19937_64 rng(44);
  SigningKey key(random_nonzero(rng));
  RawTransaction tx = testing::random_unsigned_tx(rng, TxType::DynamicFee);
  sign_transaction(tx, key, random_nonzero(rng));
  RawTransaction flipped = tx;
  flipped.v = U256(1) - tx.v;
  EXPECT_NE(sender_address(flipped), key.address());

  RawTransaction bad = tx;
  bad.r = kSecp256k1Order;
  try {
    (void)sender_address(bad);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::RecoveryFailed);
  }
}

TEST(TxCodec, ParseErrors) {
  std::mt19937_64 rng(45);
  SigningKey key(random_nonzero(rng));
  RawTransaction tx = testing::random_unsigned_tx(rng, TxType::DynamicFee);
  sign_transaction(tx, key, random_nonzero(rng));
  Bytes raw = serialize(tx);

  Bytes blob = raw;
  blob[0] = 0x03;
  EXPECT_EQ(parse_error(blob), ErrorCode::UnknownTxType);

  auto body = rlp::decode(ByteView(raw).subspan(1)).as_list();
  body.pop_back();
  Bytes short_tx = {0x02};
  Bytes enc = rlp::encode(rlp::Item::list(body));
  short_tx.insert(short_tx.end(), enc.begin(), enc.end());
  EXPECT_EQ(parse_error(short_tx), ErrorCode::MalformedFieldCount);

  RawTransaction zero_r = tx;
  zero_r.r = U256(0);
  EXPECT_EQ(parse_error(serialize(zero_r)), ErrorCode::SignatureOutOfRange);
  RawTransaction big_parity = tx;
  big_parity.v = U256(2);
  EXPECT_EQ(parse_error(serialize(big_parity)), ErrorCode::SignatureOutOfRange);

  RawTransaction legacy = testing::random_unsigned_tx(rng, TxType::Legacy);
  sign_transaction(legacy, key, random_nonzero(rng));
  legacy.v = U256(30);
  EXPECT_EQ(parse_error(serialize(legacy)), ErrorCode::SignatureOutOfRange);

  // non-canonical integer: nonce with a leading zero byte
  auto fields = rlp::decode(ByteView(raw).subspan(1)).as_list();
  fields[1] = rlp::Item::bytes(Bytes{0x00, 0x05});
  Bytes noncanon = {0x02};
  enc = rlp::encode(rlp::Item::list(fields));
  noncanon.insert(noncanon.end(), enc.begin(), enc.end());
  EXPECT_EQ(parse_error(noncanon), ErrorCode::NonCanonical);

  Bytes trailing = raw;
  trailing.push_back(0x00);
  EXPECT_EQ(parse_error(trailing), ErrorCode::TrailingBytes);
}

TEST(TxCodec, ToRecord) {
  std::mt19937_64 rng(46);
  std::vector<SigningKey> keys;
  std::vector<RawTransaction> block;
  for (int i = 0; i < 3; ++i) {
    keys.emplace_back(random_nonzero(rng));
    RawTransaction tx = testing::random_unsigned_tx(rng, kAllTypes[i]);
    sign_transaction(tx, keys.back(), random_nonzero(rng));
    block.push_back(tx);
  }
  for (int i = 0; i < 3; ++i) {
    SignatureRecord rec = to_record(block[i], {1000, 137});
    EXPECT_EQ(rec.signer, keys[i].address());
    EXPECT_EQ(rec.source.block, 1000u);
    EXPECT_EQ(rec.source.chain_id, 137u);
    EXPECT_EQ(rec.source.tx_hash, keccak256(serialize(block[i])));
    EXPECT_TRUE(verify(keys[i].public_key(), rec.e, Signature{rec.r, rec.s, rec.parity, false}));
  }

  // force a nonce whose raw s is high, so low-s normalization flips it
  SigningKey key(random_nonzero(rng));
  for (;;) {
    RawTransaction tx = testing::random_unsigned_tx(rng, TxType::DynamicFee);
    Scalar k = random_nonzero(rng);
    if (!sign(key, signing_hash(tx), k).s.is_high()) continue;
    Signature sig = sign_transaction(tx, key, k);
    EXPECT_TRUE(sig.low_s);
    SignatureRecord rec = to_record(tx, {5, 137});
    EXPECT_TRUE(rec.s_normalized);
    EXPECT_EQ(rec.signer, key.address());

    RawTransaction raw_high = testing::random_unsigned_tx(rng, TxType::DynamicFee);
    Scalar k2 = random_nonzero(rng);
    if (!sign(key, signing_hash(raw_high), k2).s.is_high()) continue;
    sign_transaction(raw_high, key, k2, false);
    EXPECT_FALSE(to_record(raw_high, {5, 137}).s_normalized);
    break;
  }

  // pre-155 legacy takes the chain id from the block
  RawTransaction pre = testing::random_unsigned_tx(rng, TxType::Legacy);
  pre.chain_id.reset();
  sign_transaction(pre, key, random_nonzero(rng));
  EXPECT_EQ(to_record(pre, {9, 80001}).source.chain_id, 80001u);
}

}  // namespace
}  // namespace noncehunt
