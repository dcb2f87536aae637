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

#pragma once

#include <array>
#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "noncehunt/address.hpp"
#include "noncehunt/curve.hpp"
#include "noncehunt/error.hpp"
#include "noncehunt/hash.hpp"

namespace noncehunt {

class SigningKey {
 public:
  explicit SigningKey(const Scalar& secret, const Curve& curve = secp256k1())
      : secret_(secret), curve_(&curve) {
    if (secret.is_zero()) throw std::invalid_argument("private key must be nonzero");
    public_ = curve.multiply_base(secret);
  }

  const Scalar& secret() const { return secret_; }
  const CurvePoint& public_key() const { return public_; }
  const Curve& curve() const { return *curve_; }
  Address address() const { return address_of(public_, *curve_); }

 private:
  Scalar secret_;
  CurvePoint public_;
  const Curve* curve_;
};

struct Signature {
  Scalar r;
  Scalar s;
  std::uint8_t parity = 0;  // y parity of R
  bool low_s = false;       // low-s convention was applied when emitting

  /// r (32) || s (32) || parity (1), big-endian.
  std::array<std::uint8_t, 65> to_bytes() const {
    std::array<std::uint8_t, 65> out{};
    auto rb = r.value().to_be_bytes();
    auto sb = s.value().to_be_bytes();
    std::copy(rb.begin(), rb.end(), out.begin());
    std::copy(sb.begin(), sb.end(), out.begin() + 32);
    out[64] = parity;
    return out;
  }

  static Signature from_bytes(ByteView bytes, const Modulus& order = secp256k1_order()) {
    if (bytes.size() != 65) throw Error(ErrorCode::InvalidEncoding, "signature must be 65 bytes");
    auto r = *U256::from_be_bytes(bytes.subspan(0, 32));
    auto s = *U256::from_be_bytes(bytes.subspan(32, 32));
    if (r.is_zero() || s.is_zero() || r >= order.value() || s >= order.value() || bytes[64] > 1) {
      throw Error(ErrorCode::InvalidEncoding, "signature component out of range");
    }
    return {Scalar(order, r), Scalar(order, s), bytes[64], false};
  }

  std::string to_hex() const { return hex::encode(to_bytes()); }
  static Signature from_hex(std::string_view text, const Modulus& order = secp256k1_order()) {
    auto bytes = hex::decode(text);
    if (!bytes) throw Error(ErrorCode::InvalidEncoding, "bad signature hex");
    return from_bytes(*bytes, order);
  }

  friend bool operator==(const Signature& a, const Signature& b) {
    return a.r == b.r && a.s == b.s && a.parity == b.parity;
  }
};

/// s = k^-1 (e + x r). Fails with DegenerateNonce on k = 0, r = 0 or s = 0.
inline Signature sign(const SigningKey& key, const Scalar& e, const Scalar& nonce) {
  const Curve& curve = key.curve();
  if (nonce.is_zero()) throw Error(ErrorCode::DegenerateNonce, "nonce is zero");
  CurvePoint big_r = curve.multiply_base(nonce);
  Scalar r = curve.x_mod_n(big_r);
  if (r.is_zero()) throw Error(ErrorCode::DegenerateNonce, "r = 0");
  Scalar s = nonce.inv() * (e + key.secret() * r);
  if (s.is_zero()) throw Error(ErrorCode::DegenerateNonce, "s = 0");
  return {r, s, static_cast<std::uint8_t>(big_r.y.is_odd() ? 1 : 0), false};
}

/// Replaces s by n - s when s > n/2. The implied nonce becomes -k, so R is
/// negated and the parity bit flips.
inline Signature normalize_low_s(Signature sig) {
  if (sig.s.is_high()) {
    sig.s = -sig.s;
    sig.parity ^= 1;
  }
  sig.low_s = true;
  return sig;
}

inline bool verify(const CurvePoint& pub, const Scalar& e, const Signature& sig, const Curve& curve = secp256k1()) {
  if (sig.r.is_zero() || sig.s.is_zero() || pub.is_identity() || !curve.on_curve(pub)) return false;
  Scalar w = sig.s.inv();
  CurvePoint p = curve.multiply_add(e * w, sig.r * w, pub);
  if (p.is_identity()) return false;
  return curve.x_mod_n(p) == sig.r;
}

/// X = r^-1 (s R - e G), with R rebuilt from (r, parity).
inline CurvePoint recover_public_key(const Scalar& e, const Signature& sig, const Curve& curve = secp256k1()) {
  if (sig.r.is_zero() || sig.s.is_zero()) throw Error(ErrorCode::NoSuchPoint, "zero signature component");
  auto big_r = curve.lift_x(sig.r.value(), sig.parity != 0);
  if (!big_r) throw Error(ErrorCode::NoSuchPoint, "r is not the x-coordinate of a curve point");
  Scalar r_inv = sig.r.inv();
  CurvePoint pub = curve.multiply_add(-(e * r_inv), sig.s * r_inv, *big_r);
  if (pub.is_identity()) throw Error(ErrorCode::NoSuchPoint, "recovered the identity");
  return pub;
}

/// Deterministic nonce per RFC 6979 section 3.2 with HMAC-SHA-256. The
/// message input is e itself, which equals bits2octets(H(m)) whenever the
/// digest is no wider than the order.
inline Scalar rfc6979_nonce(const SigningKey& key, const Scalar& e) {
  const Modulus& order = key.curve().order();
  const unsigned qlen = order.value().bit_length();
  const std::size_t rlen = (qlen + 7) / 8;

  auto int2octets = [&](const U256& v) {
    auto full = v.to_be_bytes();
    return Bytes(full.end() - static_cast<std::ptrdiff_t>(rlen), full.end());
  };
  auto bits2int = [&](ByteView t) {
    // leftmost qlen bits of t (t is at least rlen bytes)
    U256 v = *U256::from_be_bytes(t.subspan(0, rlen));
    if (rlen * 8 > qlen) v = v >> static_cast<unsigned>(rlen * 8 - qlen);
    return v;
  };

  Bytes x = int2octets(key.secret().value());
  Bytes h = int2octets(e.value());
  Bytes v(32, 0x01);
  Bytes k(32, 0x00);

  auto mac = [&](std::initializer_list<ByteView> parts) {
    Bytes msg;
    for (auto p : parts) msg.insert(msg.end(), p.begin(), p.end());
    Hash32 out = hmac_sha256(k, msg);
    return Bytes(out.begin(), out.end());
  };
  const std::uint8_t zero = 0x00, one = 0x01;

  k = mac({v, ByteView(&zero, 1), x, h});
  v = mac({v});
  k = mac({v, ByteView(&one, 1), x, h});
  v = mac({v});

  for (;;) {
    Bytes t;
    while (t.size() < rlen) {
      v = mac({v});
      t.insert(t.end(), v.begin(), v.end());
    }
    U256 candidate = bits2int(t);
    if (!candidate.is_zero() && candidate < order.value()) return {order, candidate};
    k = mac({v, ByteView(&zero, 1)});
    v = mac({v});
  }
}

/// Source of per-signature nonces. AffineSequence yields k_i = alpha_i*k0 + beta_i
/// for the i-th signature; Constant is the alpha = 1, beta = 0 special case.
class NoncePolicy {
 public:
  enum class Kind { FreshRandom, Constant, AffineSequence, Rfc6979 };

  static NoncePolicy fresh_random(std::uint64_t seed) {
    NoncePolicy p(Kind::FreshRandom);
    p.rng_.seed(seed);
    return p;
  }
  static NoncePolicy constant(const Scalar& k) {
    NoncePolicy p(Kind::Constant);
    p.base_ = k;
    return p;
  }
  static NoncePolicy affine_sequence(const Scalar& k0, std::vector<std::pair<Scalar, Scalar>> coefficients) {
    NoncePolicy p(Kind::AffineSequence);
    p.base_ = k0;
    p.coefficients_ = std::move(coefficients);
    return p;
  }
  /// alpha_i = 1, beta_i = i: the sequential-counter pattern.
  static NoncePolicy counter(const Scalar& k0, std::size_t count) {
    const Modulus& m = k0.modulus();
    std::vector<std::pair<Scalar, Scalar>> coeffs;
    for (std::size_t i = 0; i < count; ++i) coeffs.emplace_back(Scalar::one(m), Scalar(m, U256(i)));
    return affine_sequence(k0, std::move(coeffs));
  }
  static NoncePolicy rfc6979() { return NoncePolicy(Kind::Rfc6979); }

  Kind kind() const { return kind_; }
  /// Fixed policies are reproducible fixtures and never silently redraw.
  bool redraws() const { return kind_ == Kind::FreshRandom; }
  std::size_t issued() const { return issued_; }
  const Scalar& base_nonce() const { return base_; }
  const std::vector<std::pair<Scalar, Scalar>>& coefficients() const { return coefficients_; }

  Scalar next(const SigningKey& key, const Scalar& e) {
    const Modulus& order = key.curve().order();
    switch (kind_) {
      case Kind::FreshRandom:
        ++issued_;
        return random_nonzero(rng_, order);
      case Kind::Constant:
        ++issued_;
        return base_;
      case Kind::AffineSequence: {
        if (issued_ >= coefficients_.size()) {
          throw Error(ErrorCode::NonceSequenceExhausted, "affine sequence has no coefficients left");
        }
        const auto& [alpha, beta] = coefficients_[issued_++];
        return alpha * base_ + beta;
      }
      case Kind::Rfc6979:
        ++issued_;
        return rfc6979_nonce(key, e);
    }
    return base_;
  }

 private:
  explicit NoncePolicy(Kind kind) : kind_(kind) {}

  Kind kind_;
  Scalar base_;
  std::vector<std::pair<Scalar, Scalar>> coefficients_;
  std::mt19937_64 rng_;
  std::size_t issued_ = 0;
};

/// Draws from the policy and signs; FreshRandom redraws on degenerate output.
inline Signature sign_with(const SigningKey& key, const Scalar& e, NoncePolicy& policy, Scalar* used_nonce = nullptr) {
  for (;;) {
    Scalar k = policy.next(key, e);
    try {
      Signature sig = sign(key, e, k);
      if (used_nonce != nullptr) *used_nonce = k;
      return sig;
    } catch (const Error& err) {
      if (err.code() != ErrorCode::DegenerateNonce || !policy.redraws()) throw;
    }
  }
}

}  // namespace noncehunt
