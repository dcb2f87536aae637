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

#include <cassert>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "noncehunt/error.hpp"
#include "noncehunt/uint256.hpp"

namespace noncehunt {

/// Arithmetic modulo an odd integer m with 1 < m < 2^256, via Montgomery
/// multiplication with R = 2^256. The same code serves the secp256k1 field
/// prime, the group order, and small toy primes used by exhaustive tests.
class Modulus {
 public:
  explicit Modulus(const U256& m) : m_(m) {
    if (!m.is_odd() || m <= U256(1)) throw std::invalid_argument("modulus must be odd and > 1");
    // Newton iteration for m^-1 mod 2^64, doubling correct bits each step.
    std::uint64_t inv = 1;
    for (int i = 0; i < 7; ++i) inv *= 2 - m.limb[0] * inv;
    m_inv_neg_ = ~inv + 1;
    U256 r = 1;
    for (int i = 0; i < 512; ++i) r = add(r, r);
    r2_ = r;
    one_mont_ = to_mont(1);
    half_ = m >> 1;
  }

  Modulus(const Modulus&) = delete;
  Modulus& operator=(const Modulus&) = delete;

  const U256& value() const { return m_; }
  /// floor(m / 2); low-s normalization compares against this.
  const U256& half() const { return half_; }

  U256 add(const U256& a, const U256& b) const {
    U256 sum;
    std::uint64_t carry = U256::add_carry(sum, a, b);
    if (carry != 0 || sum >= m_) sum = sum - m_;
    return sum;
  }

  U256 sub(const U256& a, const U256& b) const {
    U256 diff;
    if (U256::sub_borrow(diff, a, b) != 0) diff = diff + m_;
    return diff;
  }

  U256 neg(const U256& a) const { return a.is_zero() ? a : m_ - a; }

  /// Montgomery product a*b*R^-1 mod m. Requires a*b < m*R, which holds
  /// when one operand is reduced and the other is any 256-bit value.
  U256 mont_mul(const U256& a, const U256& b) const {
    std::uint64_t t[6] = {0, 0, 0, 0, 0, 0};
    for (int i = 0; i < 4; ++i) {
      std::uint64_t carry = 0;
      for (int j = 0; j < 4; ++j) {
        u128 acc = static_cast<u128>(a.limb[j]) * b.limb[i] + t[j] + carry;
        t[j] = static_cast<std::uint64_t>(acc);
        carry = static_cast<std::uint64_t>(acc >> 64);
      }
      u128 acc = static_cast<u128>(t[4]) + carry;
      t[4] = static_cast<std::uint64_t>(acc);
      t[5] = static_cast<std::uint64_t>(acc >> 64);

      std::uint64_t q = t[0] * m_inv_neg_;
      acc = static_cast<u128>(q) * m_.limb[0] + t[0];
      carry = static_cast<std::uint64_t>(acc >> 64);
      for (int j = 1; j < 4; ++j) {
        acc = static_cast<u128>(q) * m_.limb[j] + t[j] + carry;
        t[j - 1] = static_cast<std::uint64_t>(acc);
        carry = static_cast<std::uint64_t>(acc >> 64);
      }
      acc = static_cast<u128>(t[4]) + carry;
      t[3] = static_cast<std::uint64_t>(acc);
      t[4] = t[5] + static_cast<std::uint64_t>(acc >> 64);
    }
    U256 out(t[3], t[2], t[1], t[0]);
    if (t[4] != 0 || out >= m_) out = out - m_;
    return out;
  }

  U256 to_mont(const U256& a) const { return mont_mul(a, r2_); }
  U256 from_mont(const U256& a) const { return mont_mul(a, U256(1)); }
  const U256& mont_one() const { return one_mont_; }

  /// Any 256-bit value reduced into [0, m).
  U256 reduce(const U256& a) const {
    if (a < m_) return a;
    return from_mont(to_mont(a));
  }

  U256 mul(const U256& a, const U256& b) const { return mont_mul(mont_mul(a, b), r2_); }

  /// Exponentiation inside the Montgomery domain: base and result are Montgomery forms.
  U256 mont_pow(const U256& base, const U256& exponent) const {
    U256 result = one_mont_;
    for (int i = static_cast<int>(exponent.bit_length()) - 1; i >= 0; --i) {
      result = mont_mul(result, result);
      if (exponent.bit(static_cast<unsigned>(i))) result = mont_mul(result, base);
    }
    return result;
  }

  U256 pow(const U256& base, const U256& exponent) const {
    return from_mont(mont_pow(to_mont(reduce(base)), exponent));
  }

  /// Fermat inverse; correct only for prime moduli, which is all this library uses.
  U256 inv(const U256& a) const {
    if (a.is_zero()) throw Error(ErrorCode::ZeroInverse, "inverse of zero");
    return pow(a, m_ - U256(2));
  }

  U256 mont_inv(const U256& a_mont) const {
    if (a_mont.is_zero()) throw Error(ErrorCode::ZeroInverse, "inverse of zero");
    return mont_pow(a_mont, m_ - U256(2));
  }

  /// Square root modulo a prime (Tonelli-Shanks); nullopt for non-residues.
  std::optional<U256> sqrt(const U256& a) const {
    U256 x = reduce(a);
    if (x.is_zero()) return U256(0);
    U256 pm1 = m_ - U256(1);
    if (pow(x, pm1 >> 1) != U256(1)) return std::nullopt;
    if ((m_.limb[0] & 3) == 3) return pow(x, (m_ >> 2) + U256(1));

    U256 q = pm1;
    unsigned s = 0;
    while (!q.is_odd()) {
      q = q >> 1;
      ++s;
    }
    U256 z = 2;
    while (pow(z, pm1 >> 1) == U256(1)) z = z + U256(1);
    U256 c = pow(z, q);
    U256 t = pow(x, q);
    U256 r = pow(x, (q + U256(1)) >> 1);
    unsigned mexp = s;
    while (t != U256(1)) {
      unsigned i = 0;
      U256 probe = t;
      while (probe != U256(1)) {
        probe = mul(probe, probe);
        ++i;
      }
      U256 b = c;
      for (unsigned j = 0; j + i + 1 < mexp; ++j) b = mul(b, b);
      mexp = i;
      c = mul(b, b);
      t = mul(t, c);
      r = mul(r, b);
    }
    return r;
  }

 private:
  U256 m_;
  U256 r2_;
  U256 one_mont_;
  U256 half_;
  std::uint64_t m_inv_neg_ = 0;
};

inline constexpr U256 kSecp256k1Order{0xFFFFFFFFFFFFFFFFull, 0xFFFFFFFFFFFFFFFEull, 0xBAAEDCE6AF48A03Bull,
                                      0xBFD25E8CD0364141ull};

/// Group order n of secp256k1; the default modulus for Scalar.
inline const Modulus& secp256k1_order() {
  static const Modulus order(kSecp256k1Order);
  return order;
}

/// Residue modulo a prime. The modulus is fixed at construction and must
/// outlive the value; it defaults to the secp256k1 group order.
class Scalar {
 public:
  Scalar() : mod_(&secp256k1_order()) {}
  explicit Scalar(const U256& v) : Scalar(secp256k1_order(), v) {}
  Scalar(const Modulus& m, const U256& v) : value_(m.reduce(v)), mod_(&m) {}

  static Scalar zero(const Modulus& m = secp256k1_order()) { return {m, 0}; }
  static Scalar one(const Modulus& m = secp256k1_order()) { return {m, 1}; }

  /// Strict parse: value must already be reduced.
  static Scalar from_hex(std::string_view text, const Modulus& m = secp256k1_order()) {
    auto v = U256::from_hex(text);
    if (!v || *v >= m.value()) throw std::invalid_argument("not a canonical scalar: " + std::string(text));
    return {m, *v};
  }

  const U256& value() const { return value_; }
  const Modulus& modulus() const { return *mod_; }
  bool is_zero() const { return value_.is_zero(); }
  /// True when value > floor(n / 2), i.e. the high half of the range.
  bool is_high() const { return value_ > mod_->half(); }
  std::string to_hex() const { return value_.to_hex(); }

  Scalar inv() const { return {*mod_, mod_->inv(value_)}; }
  Scalar pow(const U256& e) const { return {*mod_, mod_->pow(value_, e)}; }

  friend Scalar operator+(const Scalar& a, const Scalar& b) {
    check_same(a, b);
    return {*a.mod_, a.mod_->add(a.value_, b.value_)};
  }
  friend Scalar operator-(const Scalar& a, const Scalar& b) {
    check_same(a, b);
    return {*a.mod_, a.mod_->sub(a.value_, b.value_)};
  }
  friend Scalar operator*(const Scalar& a, const Scalar& b) {
    check_same(a, b);
    return {*a.mod_, a.mod_->mul(a.value_, b.value_)};
  }
  Scalar operator-() const { return {*mod_, mod_->neg(value_)}; }

  Scalar& operator+=(const Scalar& o) { return *this = *this + o; }
  Scalar& operator-=(const Scalar& o) { return *this = *this - o; }
  Scalar& operator*=(const Scalar& o) { return *this = *this * o; }

  friend bool operator==(const Scalar& a, const Scalar& b) {
    return a.value_ == b.value_ && a.mod_->value() == b.mod_->value();
  }

 private:
  static void check_same(const Scalar& a, const Scalar& b) {
    assert(a.mod_ == b.mod_ || a.mod_->value() == b.mod_->value());
    (void)a;
    (void)b;
  }

  U256 value_;
  const Modulus* mod_;
};

/// Uniform nonzero residue by masked rejection sampling.
template <class Urbg>
Scalar random_nonzero(Urbg& rng, const Modulus& m = secp256k1_order()) {
  const unsigned bits = m.value().bit_length();
  for (;;) {
    U256 v;
    for (auto& l : v.limb) l = static_cast<std::uint64_t>(rng());
    if (bits < 256) v = (v << (256 - bits)) >> (256 - bits);
    if (!v.is_zero() && v < m.value()) return {m, v};
  }
}

inline Scalar add(const Scalar& a, const Scalar& b) { return a + b; }
inline Scalar sub(const Scalar& a, const Scalar& b) { return a - b; }
inline Scalar mul(const Scalar& a, const Scalar& b) { return a * b; }
inline Scalar neg(const Scalar& a) { return -a; }
inline Scalar inv(const Scalar& a) { return a.inv(); }

/// Dense row-major matrix over a prime field.
class ScalarMatrix {
 public:
  ScalarMatrix(std::size_t rows, std::size_t cols, const Modulus& m = secp256k1_order())
      : rows_(rows), cols_(cols), entries_(rows * cols, Scalar::zero(m)), mod_(&m) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  const Modulus& modulus() const { return *mod_; }

  Scalar& at(std::size_t r, std::size_t c) { return entries_[r * cols_ + c]; }
  const Scalar& at(std::size_t r, std::size_t c) const { return entries_[r * cols_ + c]; }

 private:
  std::size_t rows_;
  std::size_t cols_;
  std::vector<Scalar> entries_;
  const Modulus* mod_;
};

struct SolveOutcome {
  enum class Kind { Unique, Underdetermined, Inconsistent };

  Kind kind = Kind::Inconsistent;
  std::size_t rank = 0;
  /// One slot per unknown. Unique fills every slot; Underdetermined fills the
  /// unknowns that the reduced system pins regardless of the free variables.
  std::vector<std::optional<Scalar>> values;

  bool unique() const { return kind == Kind::Unique; }
  std::vector<Scalar> solution() const {
    std::vector<Scalar> out;
    for (const auto& v : values) out.push_back(v.value());
    return out;
  }
};

/// Gauss-Jordan elimination with first-nonzero pivoting. Every row takes part,
/// so surplus rows of an overdetermined system act as consistency checks.
inline SolveOutcome solve(const ScalarMatrix& a, const std::vector<Scalar>& b) {
  if (b.size() != a.rows()) throw std::invalid_argument("solve: rhs length differs from row count");
  const std::size_t rows = a.rows(), cols = a.cols();

  std::vector<std::vector<Scalar>> aug(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    aug[r].reserve(cols + 1);
    for (std::size_t c = 0; c < cols; ++c) aug[r].push_back(a.at(r, c));
    aug[r].push_back(b[r]);
  }

  std::vector<std::size_t> pivot_col;
  std::size_t rank = 0;
  for (std::size_t c = 0; c < cols && rank < rows; ++c) {
    std::size_t pivot = rank;
    while (pivot < rows && aug[pivot][c].is_zero()) ++pivot;
    if (pivot == rows) continue;
    std::swap(aug[pivot], aug[rank]);
    Scalar scale = aug[rank][c].inv();
    for (auto& e : aug[rank]) e *= scale;
    for (std::size_t r = 0; r < rows; ++r) {
      if (r == rank || aug[r][c].is_zero()) continue;
      Scalar factor = aug[r][c];
      for (std::size_t k = c; k <= cols; ++k) aug[r][k] -= factor * aug[rank][k];
    }
    pivot_col.push_back(c);
    ++rank;
  }

  SolveOutcome out;
  out.rank = rank;
  out.values.assign(cols, std::nullopt);
  for (std::size_t r = rank; r < rows; ++r) {
    if (!aug[r][cols].is_zero()) {
      out.kind = SolveOutcome::Kind::Inconsistent;
      return out;
    }
  }

  std::vector<bool> is_pivot(cols, false);
  for (std::size_t c : pivot_col) is_pivot[c] = true;
  for (std::size_t r = 0; r < rank; ++r) {
    bool pinned = true;
    for (std::size_t c = 0; c < cols && pinned; ++c) {
      if (!is_pivot[c] && !aug[r][c].is_zero()) pinned = false;
    }
    if (pinned) out.values[pivot_col[r]] = aug[r][cols];
  }
  out.kind = rank == cols ? SolveOutcome::Kind::Unique : SolveOutcome::Kind::Underdetermined;
  return out;
}

}  // namespace noncehunt
