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
#include <bit>
#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "noncehunt/hex.hpp"

namespace noncehunt {

using u128 = unsigned __int128;

/// Fixed-width 256-bit unsigned integer, four little-endian 64-bit limbs.
/// Arithmetic operators wrap modulo 2^256; modular work goes through Modulus.
struct U256 {
  std::array<std::uint64_t, 4> limb{};

  constexpr U256() = default;
  constexpr U256(std::uint64_t v) : limb{v, 0, 0, 0} {}  // NOLINT(google-explicit-constructor)
  constexpr U256(std::uint64_t l3, std::uint64_t l2, std::uint64_t l1, std::uint64_t l0)
      : limb{l0, l1, l2, l3} {}

  constexpr bool is_zero() const { return (limb[0] | limb[1] | limb[2] | limb[3]) == 0; }
  constexpr bool is_odd() const { return (limb[0] & 1) != 0; }
  constexpr bool bit(unsigned i) const { return ((limb[i / 64] >> (i % 64)) & 1) != 0; }
  constexpr std::uint64_t low64() const { return limb[0]; }

  constexpr unsigned bit_length() const {
    for (int i = 3; i >= 0; --i) {
      if (limb[i] != 0) return static_cast<unsigned>(i * 64 + 64 - std::countl_zero(limb[i]));
    }
    return 0;
  }

  friend constexpr bool operator==(const U256&, const U256&) = default;
  friend constexpr std::strong_ordering operator<=>(const U256& a, const U256& b) {
    for (int i = 3; i >= 0; --i) {
      if (a.limb[i] != b.limb[i]) return a.limb[i] <=> b.limb[i];
    }
    return std::strong_ordering::equal;
  }

  /// Returns the carry out of the top limb.
  static constexpr std::uint64_t add_carry(U256& out, const U256& a, const U256& b) {
    std::uint64_t carry = 0;
    for (int i = 0; i < 4; ++i) {
      u128 sum = static_cast<u128>(a.limb[i]) + b.limb[i] + carry;
      out.limb[i] = static_cast<std::uint64_t>(sum);
      carry = static_cast<std::uint64_t>(sum >> 64);
    }
    return carry;
  }

  /// Returns the borrow out of the top limb.
  static constexpr std::uint64_t sub_borrow(U256& out, const U256& a, const U256& b) {
    std::uint64_t borrow = 0;
    for (int i = 0; i < 4; ++i) {
      u128 diff = static_cast<u128>(a.limb[i]) - b.limb[i] - borrow;
      out.limb[i] = static_cast<std::uint64_t>(diff);
      borrow = static_cast<std::uint64_t>(diff >> 64) & 1;
    }
    return borrow;
  }

  friend constexpr U256 operator+(const U256& a, const U256& b) {
    U256 out;
    add_carry(out, a, b);
    return out;
  }
  friend constexpr U256 operator-(const U256& a, const U256& b) {
    U256 out;
    sub_borrow(out, a, b);
    return out;
  }

  friend constexpr U256 operator>>(const U256& a, unsigned shift) {
    if (shift >= 256) return {};
    U256 out;
    unsigned words = shift / 64, bits = shift % 64;
    for (unsigned i = 0; i + words < 4; ++i) {
      std::uint64_t lo = a.limb[i + words] >> bits;
      std::uint64_t hi = (bits != 0 && i + words + 1 < 4) ? a.limb[i + words + 1] << (64 - bits) : 0;
      out.limb[i] = lo | hi;
    }
    return out;
  }
  friend constexpr U256 operator<<(const U256& a, unsigned shift) {
    if (shift >= 256) return {};
    U256 out;
    unsigned words = shift / 64, bits = shift % 64;
    for (unsigned i = words; i < 4; ++i) {
      std::uint64_t hi = a.limb[i - words] << bits;
      std::uint64_t lo = (bits != 0 && i > words) ? a.limb[i - words - 1] >> (64 - bits) : 0;
      out.limb[i] = hi | lo;
    }
    return out;
  }

  /// Big-endian input of at most 32 bytes.
  static std::optional<U256> from_be_bytes(ByteView bytes) {
    while (!bytes.empty() && bytes.front() == 0 && bytes.size() > 32) bytes = bytes.subspan(1);
    if (bytes.size() > 32) return std::nullopt;
    U256 out;
    unsigned pos = 0;
    for (auto it = bytes.rbegin(); it != bytes.rend(); ++it, ++pos) {
      out.limb[pos / 8] |= static_cast<std::uint64_t>(*it) << (8 * (pos % 8));
    }
    return out;
  }

  std::array<std::uint8_t, 32> to_be_bytes() const {
    std::array<std::uint8_t, 32> out{};
    for (unsigned pos = 0; pos < 32; ++pos) {
      out[31 - pos] = static_cast<std::uint8_t>(limb[pos / 8] >> (8 * (pos % 8)));
    }
    return out;
  }

  /// Minimal big-endian encoding; zero encodes as the empty string.
  Bytes to_minimal_be() const {
    auto full = to_be_bytes();
    std::size_t skip = 0;
    while (skip < 32 && full[skip] == 0) ++skip;
    return Bytes(full.begin() + static_cast<std::ptrdiff_t>(skip), full.end());
  }

  static std::optional<U256> from_hex(std::string_view text) {
    text = hex::strip_prefix(text);
    if (text.empty() || text.size() > 64) return std::nullopt;
    auto bytes = hex::decode(text);
    if (!bytes) return std::nullopt;
    return from_be_bytes(*bytes);
  }

  /// 0x-prefixed, 64 nibbles.
  std::string to_hex() const {
    auto bytes = to_be_bytes();
    return hex::encode(bytes);
  }

  /// 0x-prefixed without leading zeros ("0x0" for zero), the JSON-RPC quantity form.
  std::string to_quantity_hex() const {
    std::string full = hex::encode(to_be_bytes(), false);
    auto first = full.find_first_not_of('0');
    return "0x" + (first == std::string::npos ? std::string("0") : full.substr(first));
  }
};

}  // namespace noncehunt
