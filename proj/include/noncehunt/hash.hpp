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

#include <openssl/evp.h>

#include <array>
#include <cstdint>
#include <cstring>
#include <stdexcept>
#include <string_view>

#include "noncehunt/hex.hpp"

namespace noncehunt {

using Hash32 = std::array<std::uint8_t, 32>;

namespace detail {

inline void keccak_f1600(std::uint64_t st[25]) {
  static constexpr std::uint64_t kRoundConstants[24] = {
      0x0000000000000001ull, 0x0000000000008082ull, 0x800000000000808aull, 0x8000000080008000ull,
      0x000000000000808bull, 0x0000000080000001ull, 0x8000000080008081ull, 0x8000000000008009ull,
      0x000000000000008aull, 0x0000000000000088ull, 0x0000000080008009ull, 0x000000008000000aull,
      0x000000008000808bull, 0x800000000000008bull, 0x8000000000008089ull, 0x8000000000008003ull,
      0x8000000000008002ull, 0x8000000000000080ull, 0x000000000000800aull, 0x800000008000000aull,
      0x8000000080008081ull, 0x8000000000008080ull, 0x0000000080000001ull, 0x8000000080008008ull};
  static constexpr int kRotation[24] = {1,  3,  6,  10, 15, 21, 28, 36, 45, 55, 2,  14,
                                        27, 41, 56, 8,  25, 43, 62, 18, 39, 61, 20, 44};
  static constexpr int kPi[24] = {10, 7, 11, 17, 18, 3, 5, 16, 8, 21, 24, 4, 15, 23, 19, 13, 12, 2, 20, 14, 22, 9, 6, 1};

  auto rotl = [](std::uint64_t v, int s) { return (v << s) | (v >> (64 - s)); };
  for (std::uint64_t rc : kRoundConstants) {
    std::uint64_t c[5];
    for (int x = 0; x < 5; ++x) c[x] = st[x] ^ st[x + 5] ^ st[x + 10] ^ st[x + 15] ^ st[x + 20];
    for (int x = 0; x < 5; ++x) {
      std::uint64_t d = c[(x + 4) % 5] ^ rotl(c[(x + 1) % 5], 1);
      for (int y = 0; y < 25; y += 5) st[y + x] ^= d;
    }
    std::uint64_t t = st[1];
    for (int i = 0; i < 24; ++i) {
      int j = kPi[i];
      std::uint64_t tmp = st[j];
      st[j] = rotl(t, kRotation[i]);
      t = tmp;
    }
    for (int y = 0; y < 25; y += 5) {
      std::uint64_t row[5];
      for (int x = 0; x < 5; ++x) row[x] = st[y + x];
      for (int x = 0; x < 5; ++x) st[y + x] = row[x] ^ (~row[(x + 1) % 5] & row[(x + 2) % 5]);
    }
    st[0] ^= rc;
  }
}

}  // namespace detail

/// Ethereum's Keccak-256: original Keccak padding (0x01), not FIPS-202 SHA3.
inline Hash32 keccak256(ByteView data) {
  constexpr std::size_t kRate = 136;
  std::uint64_t st[25] = {};
  auto absorb = [&](const std::uint8_t* block) {
    for (std::size_t i = 0; i < kRate / 8; ++i) {
      std::uint64_t lane = 0;
      for (int b = 0; b < 8; ++b) lane |= static_cast<std::uint64_t>(block[i * 8 + b]) << (8 * b);
      st[i] ^= lane;
    }
    detail::keccak_f1600(st);
  };

  std::size_t offset = 0;
  for (; offset + kRate <= data.size(); offset += kRate) absorb(data.data() + offset);
  std::uint8_t last[kRate] = {};
  std::size_t rem = data.size() - offset;
  if (rem != 0) std::memcpy(last, data.data() + offset, rem);
  last[rem] ^= 0x01;
  last[kRate - 1] ^= 0x80;
  absorb(last);

  Hash32 out{};
  for (std::size_t i = 0; i < 32; ++i) out[i] = static_cast<std::uint8_t>(st[i / 8] >> (8 * (i % 8)));
  return out;
}

inline Hash32 keccak256(std::string_view text) {
  return keccak256(ByteView(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

inline Hash32 sha256(ByteView data) {
  Hash32 out{};
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), out.data(), &len, EVP_sha256(), nullptr) != 1 || len != out.size()) {
    throw std::runtime_error("EVP_Digest(sha256) failed");
  }
  return out;
}

inline Hash32 hmac_sha256(ByteView key, ByteView data) {
  Hash32 out{};
  std::size_t len = 0;
  if (EVP_Q_mac(nullptr, "HMAC", nullptr, "SHA256", nullptr, key.data(), key.size(), data.data(), data.size(),
                out.data(), out.size(), &len) == nullptr ||
      len != out.size()) {
    throw std::runtime_error("EVP_Q_mac(HMAC-SHA256) failed");
  }
  return out;
}

}  // namespace noncehunt
