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

#include "noncehunt/curve.hpp"
#include "noncehunt/hash.hpp"

namespace noncehunt {

using Address = std::array<std::uint8_t, 20>;

/// Last 20 bytes of Keccak-256 over the 64-byte x||y encoding.
inline Address address_of(const CurvePoint& point, const Curve& curve = secp256k1()) {
  auto encoded = curve.encode_uncompressed(point);
  Hash32 digest = keccak256(ByteView(encoded).subspan(1));
  Address out{};
  std::copy(digest.begin() + 12, digest.end(), out.begin());
  return out;
}

inline std::string to_hex(const Address& a) { return hex::encode(a); }
inline std::string to_hex(const Hash32& h) { return hex::encode(h); }

}  // namespace noncehunt
