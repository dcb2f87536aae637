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

#include <cstdint>
#include <utility>
#include <variant>
#include <vector>

#include "noncehunt/error.hpp"
#include "noncehunt/hex.hpp"
#include "noncehunt/uint256.hpp"

namespace noncehunt::rlp {

/// Either a byte string or a list of items.
class Item {
 public:
  Item() : value_(Bytes{}) {}

  static Item bytes(Bytes b) { return Item(std::move(b)); }
  static Item bytes(ByteView b) { return Item(Bytes(b.begin(), b.end())); }
  static Item list(std::vector<Item> items) { return Item(std::move(items)); }
  /// Minimal big-endian integer; zero is the empty string.
  static Item uint(const U256& v) { return bytes(v.to_minimal_be()); }

  bool is_list() const { return std::holds_alternative<std::vector<Item>>(value_); }
  const Bytes& as_bytes() const { return std::get<Bytes>(value_); }
  const std::vector<Item>& as_list() const { return std::get<std::vector<Item>>(value_); }

  friend bool operator==(const Item& a, const Item& b) { return a.value_ == b.value_; }

 private:
  explicit Item(Bytes b) : value_(std::move(b)) {}
  explicit Item(std::vector<Item> l) : value_(std::move(l)) {}

  std::variant<Bytes, std::vector<Item>> value_;
};

namespace detail {

inline void put_length(Bytes& out, std::size_t len, std::uint8_t offset) {
  if (len < 56) {
    out.push_back(static_cast<std::uint8_t>(offset + len));
    return;
  }
  Bytes be;
  for (std::size_t v = len; v != 0; v >>= 8) be.insert(be.begin(), static_cast<std::uint8_t>(v & 0xff));
  out.push_back(static_cast<std::uint8_t>(offset + 55 + be.size()));
  out.insert(out.end(), be.begin(), be.end());
}

inline void encode_into(const Item& item, Bytes& out) {
  if (!item.is_list()) {
    const Bytes& b = item.as_bytes();
    if (b.size() == 1 && b[0] < 0x80) {
      out.push_back(b[0]);
      return;
    }
    put_length(out, b.size(), 0x80);
    out.insert(out.end(), b.begin(), b.end());
    return;
  }
  Bytes body;
  for (const Item& child : item.as_list()) encode_into(child, body);
  put_length(out, body.size(), 0xc0);
  out.insert(out.end(), body.begin(), body.end());
}

constexpr int kMaxDepth = 64;

// Reads one item starting at pos; advances pos past it.
inline Item decode_at(ByteView in, std::size_t& pos, int depth) {
  if (depth > kMaxDepth) throw Error(ErrorCode::NonCanonical, "nesting too deep");
  if (pos >= in.size()) throw Error(ErrorCode::Truncated, "expected an item");
  const std::uint8_t prefix = in[pos++];

  auto read_long_length = [&](std::size_t len_of_len) -> std::size_t {
    if (len_of_len > sizeof(std::size_t) || in.size() - pos < len_of_len) {
      throw Error(ErrorCode::Truncated, "length-of-length runs past input");
    }
    if (in[pos] == 0) throw Error(ErrorCode::NonCanonical, "leading zero in length");
    std::size_t len = 0;
    for (std::size_t i = 0; i < len_of_len; ++i) len = (len << 8) | in[pos++];
    if (len < 56) throw Error(ErrorCode::NonCanonical, "long form used for a short payload");
    return len;
  };
  auto take = [&](std::size_t len) {
    if (in.size() - pos < len) throw Error(ErrorCode::Truncated, "payload runs past input");
    ByteView out = in.subspan(pos, len);
    pos += len;
    return out;
  };

  if (prefix < 0x80) return Item::bytes(Bytes{prefix});
  if (prefix <= 0xbf) {
    std::size_t len = prefix <= 0xb7 ? prefix - 0x80u : read_long_length(prefix - 0xb7u);
    ByteView payload = take(len);
    if (len == 1 && payload[0] < 0x80) throw Error(ErrorCode::NonCanonical, "single byte below 0x80 must be bare");
    return Item::bytes(payload);
  }
  std::size_t len = prefix <= 0xf7 ? prefix - 0xc0u : read_long_length(prefix - 0xf7u);
  ByteView payload = take(len);
  std::vector<Item> children;
  std::size_t inner = 0;
  while (inner < payload.size()) children.push_back(decode_at(payload, inner, depth + 1));
  return Item::list(std::move(children));
}

}  // namespace detail

inline Bytes encode(const Item& item) {
  Bytes out;
  detail::encode_into(item, out);
  return out;
}

/// Decodes exactly one item; the input must contain nothing else.
inline Item decode(ByteView in) {
  if (in.empty()) throw Error(ErrorCode::Truncated, "empty input");
  std::size_t pos = 0;
  Item item = detail::decode_at(in, pos, 0);
  if (pos != in.size()) throw Error(ErrorCode::TrailingBytes, "bytes after the top-level item");
  return item;
}

/// Canonical integer: at most 32 bytes, no leading zero.
inline U256 to_uint(const Item& item) {
  if (item.is_list()) throw Error(ErrorCode::NonCanonical, "expected an integer, found a list");
  const Bytes& b = item.as_bytes();
  if (b.size() > 32) throw Error(ErrorCode::NonCanonical, "integer wider than 256 bits");
  if (!b.empty() && b[0] == 0) throw Error(ErrorCode::NonCanonical, "integer with leading zero");
  return *U256::from_be_bytes(b);
}

inline std::uint64_t to_u64(const Item& item) {
  U256 v = to_uint(item);
  if (v.bit_length() > 64) throw Error(ErrorCode::NonCanonical, "integer wider than 64 bits");
  return v.low64();
}

}  // namespace noncehunt::rlp
