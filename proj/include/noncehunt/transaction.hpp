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
#include <optional>
#include <vector>

#include "noncehunt/address.hpp"
#include "noncehunt/ecdsa.hpp"
#include "noncehunt/error.hpp"
#include "noncehunt/hash.hpp"
#include "noncehunt/record.hpp"
#include "noncehunt/rlp.hpp"

namespace noncehunt {

enum class TxType : std::uint8_t { Legacy = 0, AccessList = 1, DynamicFee = 2 };

struct AccessListEntry {
  Address address{};
  std::vector<Hash32> storage_keys;
  friend bool operator==(const AccessListEntry&, const AccessListEntry&) = default;
};

/// A signed Ethereum-style transaction. `nonce` is the account counter, not the
/// ECDSA nonce.
struct RawTransaction {
  TxType type = TxType::Legacy;
  /// Absent only for pre-EIP-155 legacy transactions.
  std::optional<std::uint64_t> chain_id;
  std::uint64_t nonce = 0;
  U256 gas_price;  // Legacy, AccessList
  U256 max_priority_fee_per_gas;  // DynamicFee
  U256 max_fee_per_gas;           // DynamicFee
  std::uint64_t gas_limit = 0;
  std::optional<Address> to;  // empty for contract creation
  U256 value;
  Bytes data;
  std::vector<AccessListEntry> access_list;
  /// Legacy: raw v (27/28 or 35 + 2*chain_id + parity). Typed: y parity.
  U256 v;
  U256 r;
  U256 s;

  std::uint8_t parity() const {
    if (type != TxType::Legacy) return static_cast<std::uint8_t>(v.low64() & 1);
    std::uint64_t raw = v.low64();
    return static_cast<std::uint8_t>(raw <= 28 ? raw - 27 : (raw - 35) % 2);
  }

  friend bool operator==(const RawTransaction&, const RawTransaction&) = default;
};

struct BlockMeta {
  std::uint64_t number = 0;
  std::uint64_t chain_id = 0;
};

namespace detail {

inline rlp::Item encode_to(const std::optional<Address>& to) {
  return to ? rlp::Item::bytes(ByteView(*to)) : rlp::Item::bytes(Bytes{});
}

inline rlp::Item encode_access_list(const std::vector<AccessListEntry>& list) {
  std::vector<rlp::Item> entries;
  for (const auto& entry : list) {
    std::vector<rlp::Item> keys;
    for (const auto& k : entry.storage_keys) keys.push_back(rlp::Item::bytes(ByteView(k)));
    entries.push_back(rlp::Item::list({rlp::Item::bytes(ByteView(entry.address)), rlp::Item::list(std::move(keys))}));
  }
  return rlp::Item::list(std::move(entries));
}

inline std::optional<Address> decode_to(const rlp::Item& item) {
  if (item.is_list()) throw Error(ErrorCode::NonCanonical, "'to' must be a byte string");
  const Bytes& b = item.as_bytes();
  if (b.empty()) return std::nullopt;
  if (b.size() != 20) throw Error(ErrorCode::NonCanonical, "'to' must be 20 bytes");
  Address a{};
  std::copy(b.begin(), b.end(), a.begin());
  return a;
}

inline std::vector<AccessListEntry> decode_access_list(const rlp::Item& item) {
  if (!item.is_list()) throw Error(ErrorCode::NonCanonical, "access list must be a list");
  std::vector<AccessListEntry> out;
  for (const auto& entry : item.as_list()) {
    if (!entry.is_list() || entry.as_list().size() != 2) {
      throw Error(ErrorCode::MalformedFieldCount, "access list entry must be [address, keys]");
    }
    const auto& addr = entry.as_list()[0];
    const auto& keys = entry.as_list()[1];
    if (addr.is_list() || addr.as_bytes().size() != 20 || !keys.is_list()) {
      throw Error(ErrorCode::NonCanonical, "bad access list entry");
    }
    AccessListEntry e;
    std::copy(addr.as_bytes().begin(), addr.as_bytes().end(), e.address.begin());
    for (const auto& k : keys.as_list()) {
      if (k.is_list() || k.as_bytes().size() != 32) throw Error(ErrorCode::NonCanonical, "storage key must be 32 bytes");
      Hash32 h{};
      std::copy(k.as_bytes().begin(), k.as_bytes().end(), h.begin());
      e.storage_keys.push_back(h);
    }
    out.push_back(std::move(e));
  }
  return out;
}

inline Bytes decode_data(const rlp::Item& item) {
  if (item.is_list()) throw Error(ErrorCode::NonCanonical, "data must be a byte string");
  return item.as_bytes();
}

// Unsigned field list in wire order, without the signature triple.
inline std::vector<rlp::Item> unsigned_fields(const RawTransaction& tx) {
  using rlp::Item;
  switch (tx.type) {
    case TxType::Legacy:
      return {Item::uint(tx.nonce), Item::uint(tx.gas_price), Item::uint(tx.gas_limit), encode_to(tx.to),
              Item::uint(tx.value), Item::bytes(ByteView(tx.data))};
    case TxType::AccessList:
      return {Item::uint(tx.chain_id.value_or(0)), Item::uint(tx.nonce), Item::uint(tx.gas_price),
              Item::uint(tx.gas_limit), encode_to(tx.to), Item::uint(tx.value), Item::bytes(ByteView(tx.data)),
              encode_access_list(tx.access_list)};
    case TxType::DynamicFee:
      return {Item::uint(tx.chain_id.value_or(0)), Item::uint(tx.nonce), Item::uint(tx.max_priority_fee_per_gas),
              Item::uint(tx.max_fee_per_gas), Item::uint(tx.gas_limit), encode_to(tx.to), Item::uint(tx.value),
              Item::bytes(ByteView(tx.data)), encode_access_list(tx.access_list)};
  }
  return {};
}

inline Bytes with_envelope(TxType type, const rlp::Item& body) {
  Bytes out;
  if (type != TxType::Legacy) out.push_back(static_cast<std::uint8_t>(type));
  Bytes enc = rlp::encode(body);
  out.insert(out.end(), enc.begin(), enc.end());
  return out;
}

inline void check_signature_range(const RawTransaction& tx) {
  const U256& n = kSecp256k1Order;
  if (tx.r.is_zero() || tx.r >= n || tx.s.is_zero() || tx.s >= n) {
    throw Error(ErrorCode::SignatureOutOfRange, "r and s must lie in [1, n-1]");
  }
}

}  // namespace detail

/// Wire encoding: legacy RLP list, or type byte || RLP list for typed envelopes.
inline Bytes serialize(const RawTransaction& tx) {
  auto fields = detail::unsigned_fields(tx);
  fields.push_back(rlp::Item::uint(tx.v));
  fields.push_back(rlp::Item::uint(tx.r));
  fields.push_back(rlp::Item::uint(tx.s));
  return detail::with_envelope(tx.type, rlp::Item::list(std::move(fields)));
}

/// The byte string whose Keccak-256 is the signed hash e. EIP-155 legacy
/// transactions append (chain_id, 0, 0) in place of the signature.
inline Bytes signing_payload(const RawTransaction& tx) {
  auto fields = detail::unsigned_fields(tx);
  if (tx.type == TxType::Legacy && tx.chain_id) {
    fields.push_back(rlp::Item::uint(*tx.chain_id));
    fields.push_back(rlp::Item::uint(0));
    fields.push_back(rlp::Item::uint(0));
  }
  return detail::with_envelope(tx.type, rlp::Item::list(std::move(fields)));
}

inline Scalar signing_hash(const RawTransaction& tx) {
  Hash32 digest = keccak256(signing_payload(tx));
  return Scalar(*U256::from_be_bytes(digest));
}

inline Hash32 tx_hash(const RawTransaction& tx) { return keccak256(serialize(tx)); }

/// Parses a raw signed transaction. Pre-EIP-155 legacy transactions carry no
/// chain id; to_record falls back to the block's chain id for those.
inline RawTransaction parse_transaction(ByteView raw) {
  if (raw.empty()) throw Error(ErrorCode::Truncated, "empty transaction");
  RawTransaction tx;
  ByteView body = raw;
  if (raw[0] < 0xc0) {
    if (raw[0] == 0x01) {
      tx.type = TxType::AccessList;
    } else if (raw[0] == 0x02) {
      tx.type = TxType::DynamicFee;
    } else {
      throw Error(ErrorCode::UnknownTxType, "transaction type " + std::to_string(raw[0]));
    }
    body = raw.subspan(1);
  }
  rlp::Item item = rlp::decode(body);
  if (!item.is_list()) throw Error(ErrorCode::MalformedFieldCount, "transaction body is not a list");
  const auto& f = item.as_list();

  auto signature_tail = [&](std::size_t at) {
    tx.v = rlp::to_uint(f[at]);
    tx.r = rlp::to_uint(f[at + 1]);
    tx.s = rlp::to_uint(f[at + 2]);
  };

  switch (tx.type) {
    case TxType::Legacy: {
      if (f.size() != 9) throw Error(ErrorCode::MalformedFieldCount, "legacy transaction needs 9 fields");
      tx.nonce = rlp::to_u64(f[0]);
      tx.gas_price = rlp::to_uint(f[1]);
      tx.gas_limit = rlp::to_u64(f[2]);
      tx.to = detail::decode_to(f[3]);
      tx.value = rlp::to_uint(f[4]);
      tx.data = detail::decode_data(f[5]);
      signature_tail(6);
      if (tx.v.bit_length() > 64) throw Error(ErrorCode::SignatureOutOfRange, "v too large");
      std::uint64_t v = tx.v.low64();
      if (v == 27 || v == 28) {
        tx.chain_id = std::nullopt;
      } else if (v >= 35) {
        tx.chain_id = (v - 35) / 2;
      } else {
        throw Error(ErrorCode::SignatureOutOfRange, "legacy v must be 27, 28 or >= 35");
      }
      break;
    }
    case TxType::AccessList: {
      if (f.size() != 11) throw Error(ErrorCode::MalformedFieldCount, "EIP-2930 transaction needs 11 fields");
      tx.chain_id = rlp::to_u64(f[0]);
      tx.nonce = rlp::to_u64(f[1]);
      tx.gas_price = rlp::to_uint(f[2]);
      tx.gas_limit = rlp::to_u64(f[3]);
      tx.to = detail::decode_to(f[4]);
      tx.value = rlp::to_uint(f[5]);
      tx.data = detail::decode_data(f[6]);
      tx.access_list = detail::decode_access_list(f[7]);
      signature_tail(8);
      break;
    }
    case TxType::DynamicFee: {
      if (f.size() != 12) throw Error(ErrorCode::MalformedFieldCount, "EIP-1559 transaction needs 12 fields");
      tx.chain_id = rlp::to_u64(f[0]);
      tx.nonce = rlp::to_u64(f[1]);
      tx.max_priority_fee_per_gas = rlp::to_uint(f[2]);
      tx.max_fee_per_gas = rlp::to_uint(f[3]);
      tx.gas_limit = rlp::to_u64(f[4]);
      tx.to = detail::decode_to(f[5]);
      tx.value = rlp::to_uint(f[6]);
      tx.data = detail::decode_data(f[7]);
      tx.access_list = detail::decode_access_list(f[8]);
      signature_tail(9);
      break;
    }
  }
  if (tx.type != TxType::Legacy && tx.v > U256(1)) throw Error(ErrorCode::SignatureOutOfRange, "y parity must be 0 or 1");
  detail::check_signature_range(tx);
  return tx;
}

inline RawTransaction parse_transaction_hex(std::string_view text) {
  auto bytes = hex::decode(text);
  if (!bytes) throw Error(ErrorCode::Truncated, "transaction hex is not valid hex");
  return parse_transaction(*bytes);
}

/// Writes (v, r, s) for the given signature, deriving legacy v from the chain id.
inline void apply_signature(RawTransaction& tx, const Signature& sig) {
  tx.r = sig.r.value();
  tx.s = sig.s.value();
  if (tx.type != TxType::Legacy) {
    tx.v = U256(sig.parity);
  } else if (tx.chain_id) {
    tx.v = U256(35 + 2 * *tx.chain_id + sig.parity);
  } else {
    tx.v = U256(27u + sig.parity);
  }
}

/// Signs with an explicit nonce. Ethereum rejects high s, so low-s
/// normalization is on unless a raw fixture is being built.
inline Signature sign_transaction(RawTransaction& tx, const SigningKey& key, const Scalar& nonce, bool low_s = true) {
  Signature sig = sign(key, signing_hash(tx), nonce);
  if (low_s) sig = normalize_low_s(sig);
  apply_signature(tx, sig);
  return sig;
}

inline Signature transaction_signature(const RawTransaction& tx) {
  return {Scalar(tx.r), Scalar(tx.s), tx.parity(), !Scalar(tx.s).is_high()};
}

inline Address sender_address(const RawTransaction& tx) {
  try {
    detail::check_signature_range(tx);
    CurvePoint pub = recover_public_key(signing_hash(tx), transaction_signature(tx));
    return address_of(pub);
  } catch (const Error& err) {
    throw Error(ErrorCode::RecoveryFailed, err.what());
  }
}

inline SignatureRecord to_record(const RawTransaction& tx, const BlockMeta& block) {
  SignatureRecord rec;
  rec.signer = sender_address(tx);
  rec.r = Scalar(tx.r);
  rec.s = Scalar(tx.s);
  rec.e = signing_hash(tx);
  rec.parity = tx.parity();
  rec.s_normalized = !rec.s.is_high();
  rec.source.tx_hash = tx_hash(tx);
  rec.source.block = block.number;
  rec.source.chain_id = tx.chain_id.value_or(block.chain_id);
  return rec;
}

}  // namespace noncehunt
