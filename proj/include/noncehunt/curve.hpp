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
#include <memory>
#include <optional>

#include "noncehunt/error.hpp"
#include "noncehunt/modular.hpp"

namespace noncehunt {

/// Affine point or the identity. Coordinates are canonical residues mod p.
struct CurvePoint {
  bool infinity = true;
  U256 x;
  U256 y;

  static CurvePoint identity() { return {}; }
  static CurvePoint affine(const U256& x, const U256& y) { return {false, x, y}; }

  bool is_identity() const { return infinity; }
  friend bool operator==(const CurvePoint& a, const CurvePoint& b) {
    if (a.infinity || b.infinity) return a.infinity == b.infinity;
    return a.x == b.x && a.y == b.y;
  }
};

/// Short Weierstrass curve y^2 = x^3 + a*x + b over F_p with a prime-order generator.
struct CurveParams {
  U256 p;
  U256 a;
  U256 b;
  U256 gx;
  U256 gy;
  U256 n;
};

inline constexpr CurveParams kSecp256k1Params{
    U256(0xFFFFFFFFFFFFFFFFull, 0xFFFFFFFFFFFFFFFFull, 0xFFFFFFFFFFFFFFFFull, 0xFFFFFFFEFFFFFC2Full),
    U256(0),
    U256(7),
    U256(0x79BE667EF9DCBBACull, 0x55A06295CE870B07ull, 0x029BFCDB2DCE28D9ull, 0x59F2815B16F81798ull),
    U256(0x483ADA7726A3C465ull, 0x5DA4FBFC0E1108A8ull, 0xFD17B448A6855419ull, 0x9C47D08FFB10D4B8ull),
    kSecp256k1Order,
};

/// Group law over a CurveParams instance. Public operations are affine;
/// internally points travel in Jacobian coordinates (Montgomery form) so a
/// scalar multiplication costs one field inversion.
class Curve {
 public:
  /// Builds a curve with its own moduli for p and n.
  explicit Curve(const CurveParams& params)
      : params_(params), owned_field_(std::make_unique<Modulus>(params.p)), field_(owned_field_.get()) {
    owned_order_ = std::make_unique<Modulus>(params.n);
    order_ = owned_order_.get();
    init();
  }

  /// Shares an existing order modulus (secp256k1 scalars default to it).
  Curve(const CurveParams& params, const Modulus& order)
      : params_(params), owned_field_(std::make_unique<Modulus>(params.p)), field_(owned_field_.get()),
        order_(&order) {
    init();
  }

  Curve(const Curve&) = delete;
  Curve& operator=(const Curve&) = delete;

  const CurveParams& params() const { return params_; }
  const Modulus& field() const { return *field_; }
  const Modulus& order() const { return *order_; }
  const CurvePoint& generator() const { return generator_; }

  bool on_curve(const CurvePoint& p) const {
    if (p.infinity) return true;
    if (p.x >= params_.p || p.y >= params_.p) return false;
    const Modulus& f = *field_;
    U256 lhs = f.mul(p.y, p.y);
    U256 rhs = f.add(f.add(f.mul(f.mul(p.x, p.x), p.x), f.mul(params_.a, p.x)), params_.b);
    return lhs == rhs;
  }

  CurvePoint negate(const CurvePoint& p) const {
    if (p.infinity) return p;
    return CurvePoint::affine(p.x, field_->neg(p.y));
  }

  CurvePoint add(const CurvePoint& p, const CurvePoint& q) const { return to_affine(jadd(to_jacobian(p), to_jacobian(q))); }
  CurvePoint dbl(const CurvePoint& p) const { return to_affine(jdbl(to_jacobian(p))); }

  /// k-fold sum by left-to-right double-and-add; k may exceed n.
  CurvePoint multiply(const U256& k, const CurvePoint& p) const { return to_affine(jmul(k, to_jacobian(p))); }
  CurvePoint multiply(const Scalar& k, const CurvePoint& p) const { return multiply(k.value(), p); }
  CurvePoint multiply_base(const Scalar& k) const { return multiply(k.value(), generator_); }

  /// u1*G + u2*Q with a single final inversion.
  CurvePoint multiply_add(const Scalar& u1, const Scalar& u2, const CurvePoint& q) const {
    return to_affine(jadd(jmul(u1.value(), to_jacobian(generator_)), jmul(u2.value(), to_jacobian(q))));
  }

  /// r = P.x mod n.
  Scalar x_mod_n(const CurvePoint& p) const {
    if (p.infinity) throw Error(ErrorCode::IdentityPoint, "x coordinate of the identity");
    return {*order_, p.x};
  }

  /// The point with the given x and y parity, if x is on the curve.
  std::optional<CurvePoint> lift_x(const U256& x, bool odd_y) const {
    if (x >= params_.p) return std::nullopt;
    const Modulus& f = *field_;
    U256 rhs = f.add(f.add(f.mul(f.mul(x, x), x), f.mul(params_.a, x)), params_.b);
    auto y = f.sqrt(rhs);
    if (!y) return std::nullopt;
    if (y->is_odd() != odd_y) y = f.neg(*y);
    if (y->is_odd() != odd_y) return std::nullopt;  // y == 0 admits only even parity
    return CurvePoint::affine(x, *y);
  }

  /// SEC1 compressed form: 0x02/0x03 || x (32 bytes).
  std::array<std::uint8_t, 33> encode_compressed(const CurvePoint& p) const {
    if (p.infinity) throw Error(ErrorCode::IdentityPoint, "cannot encode the identity");
    std::array<std::uint8_t, 33> out{};
    out[0] = p.y.is_odd() ? 0x03 : 0x02;
    auto xb = p.x.to_be_bytes();
    std::copy(xb.begin(), xb.end(), out.begin() + 1);
    return out;
  }

  /// SEC1 uncompressed form: 0x04 || x || y.
  std::array<std::uint8_t, 65> encode_uncompressed(const CurvePoint& p) const {
    if (p.infinity) throw Error(ErrorCode::IdentityPoint, "cannot encode the identity");
    std::array<std::uint8_t, 65> out{};
    out[0] = 0x04;
    auto xb = p.x.to_be_bytes();
    auto yb = p.y.to_be_bytes();
    std::copy(xb.begin(), xb.end(), out.begin() + 1);
    std::copy(yb.begin(), yb.end(), out.begin() + 33);
    return out;
  }

  CurvePoint decode(ByteView bytes) const {
    if (bytes.size() == 33 && (bytes[0] == 0x02 || bytes[0] == 0x03)) {
      auto x = U256::from_be_bytes(bytes.subspan(1));
      auto p = lift_x(*x, bytes[0] == 0x03);
      if (!p) throw Error(ErrorCode::InvalidEncoding, "compressed x is not on the curve");
      return *p;
    }
    if (bytes.size() == 65 && bytes[0] == 0x04) {
      auto p = CurvePoint::affine(*U256::from_be_bytes(bytes.subspan(1, 32)), *U256::from_be_bytes(bytes.subspan(33)));
      if (!on_curve(p)) throw Error(ErrorCode::InvalidEncoding, "uncompressed point is not on the curve");
      return p;
    }
    throw Error(ErrorCode::InvalidEncoding, "expected a 33- or 65-byte SEC1 point");
  }

 private:
  struct Jacobian {
    U256 x, y, z;  // Montgomery form; z == 0 is the identity
    bool is_identity() const { return z.is_zero(); }
  };

  void init() {
    a_mont_ = field_->to_mont(params_.a);
    generator_ = CurvePoint::affine(params_.gx, params_.gy);
  }

  Jacobian to_jacobian(const CurvePoint& p) const {
    if (p.infinity) return {U256(), U256(), U256()};
    return {field_->to_mont(p.x), field_->to_mont(p.y), field_->mont_one()};
  }

  CurvePoint to_affine(const Jacobian& j) const {
    if (j.is_identity()) return CurvePoint::identity();
    const Modulus& f = *field_;
    U256 zinv = f.mont_inv(j.z);
    U256 zinv2 = f.mont_mul(zinv, zinv);
    U256 x = f.mont_mul(j.x, zinv2);
    U256 y = f.mont_mul(j.y, f.mont_mul(zinv2, zinv));
    return CurvePoint::affine(f.from_mont(x), f.from_mont(y));
  }

  Jacobian jdbl(const Jacobian& p) const {
    if (p.is_identity() || p.y.is_zero()) return {U256(), U256(), U256()};
    const Modulus& f = *field_;
    U256 xx = f.mont_mul(p.x, p.x);
    U256 yy = f.mont_mul(p.y, p.y);
    U256 yyyy = f.mont_mul(yy, yy);
    U256 s = f.mont_mul(p.x, yy);
    s = f.add(s, s);
    s = f.add(s, s);
    U256 m = f.add(f.add(xx, xx), xx);
    if (!params_.a.is_zero()) {
      U256 zz = f.mont_mul(p.z, p.z);
      m = f.add(m, f.mont_mul(a_mont_, f.mont_mul(zz, zz)));
    }
    U256 x3 = f.sub(f.mont_mul(m, m), f.add(s, s));
    U256 y8 = f.add(yyyy, yyyy);
    y8 = f.add(y8, y8);
    y8 = f.add(y8, y8);
    U256 y3 = f.sub(f.mont_mul(m, f.sub(s, x3)), y8);
    U256 z3 = f.mont_mul(p.y, p.z);
    z3 = f.add(z3, z3);
    return {x3, y3, z3};
  }

  Jacobian jadd(const Jacobian& p, const Jacobian& q) const {
    if (p.is_identity()) return q;
    if (q.is_identity()) return p;
    const Modulus& f = *field_;
    U256 z1z1 = f.mont_mul(p.z, p.z);
    U256 z2z2 = f.mont_mul(q.z, q.z);
    U256 u1 = f.mont_mul(p.x, z2z2);
    U256 u2 = f.mont_mul(q.x, z1z1);
    U256 s1 = f.mont_mul(p.y, f.mont_mul(q.z, z2z2));
    U256 s2 = f.mont_mul(q.y, f.mont_mul(p.z, z1z1));
    if (u1 == u2) {
      if (s1 == s2) return jdbl(p);
      return {U256(), U256(), U256()};
    }
    U256 h = f.sub(u2, u1);
    U256 r = f.sub(s2, s1);
    U256 hh = f.mont_mul(h, h);
    U256 hhh = f.mont_mul(hh, h);
    U256 v = f.mont_mul(u1, hh);
    U256 x3 = f.sub(f.sub(f.mont_mul(r, r), hhh), f.add(v, v));
    U256 y3 = f.sub(f.mont_mul(r, f.sub(v, x3)), f.mont_mul(s1, hhh));
    U256 z3 = f.mont_mul(h, f.mont_mul(p.z, q.z));
    return {x3, y3, z3};
  }

  Jacobian jmul(const U256& k, const Jacobian& p) const {
    Jacobian acc{U256(), U256(), U256()};
    for (int i = static_cast<int>(k.bit_length()) - 1; i >= 0; --i) {
      acc = jdbl(acc);
      if (k.bit(static_cast<unsigned>(i))) acc = jadd(acc, p);
    }
    return acc;
  }

  CurveParams params_;
  std::unique_ptr<Modulus> owned_field_;
  std::unique_ptr<Modulus> owned_order_;
  const Modulus* field_;
  const Modulus* order_ = nullptr;
  U256 a_mont_;
  CurvePoint generator_;
};

inline const Curve& secp256k1() {
  static const Curve curve(kSecp256k1Params, secp256k1_order());
  return curve;
}

inline CurvePoint point_add(const CurvePoint& p, const CurvePoint& q, const Curve& curve = secp256k1()) {
  return curve.add(p, q);
}
inline CurvePoint scalar_mul(const Scalar& k, const CurvePoint& p, const Curve& curve = secp256k1()) {
  return curve.multiply(k, p);
}
inline Scalar x_mod_n(const CurvePoint& p, const Curve& curve = secp256k1()) { return curve.x_mod_n(p); }

}  // namespace noncehunt
