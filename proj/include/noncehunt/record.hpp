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
#include <string>

#include <nlohmann/json.hpp>

#include "noncehunt/address.hpp"
#include "noncehunt/error.hpp"
#include "noncehunt/modular.hpp"

namespace noncehunt {

struct RecordSource {
  Hash32 tx_hash{};
  std::uint64_t block = 0;
  std::uint64_t chain_id = 0;
};

/// One observed signature: who signed, (r, s), the signed hash e, and where it came from.
struct SignatureRecord {
  Address signer{};
  Scalar r;
  Scalar s;
  Scalar e;
  std::uint8_t parity = 0;
  /// s is in low-s form, so the signer may have negated it; the effective
  /// nonce is then -k and solvers must consider both signs.
  bool s_normalized = false;
  RecordSource source;
};

namespace detail {

inline std::string quantity(std::uint64_t v) { return U256(v).to_quantity_hex(); }

inline std::uint64_t read_quantity(const nlohmann::json& j, const char* field) {
  const auto& v = j.at(field);
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  auto parsed = U256::from_hex(v.get<std::string>());
  if (!parsed || parsed->bit_length() > 64) throw std::invalid_argument(std::string("bad quantity ") + field);
  return parsed->low64();
}

}  // namespace detail

/// JSONL ledger row: {signer, r, s, e, tx_hash, block, chain_id, parity}, all hex.
inline nlohmann::json record_to_json(const SignatureRecord& rec) {
  return {{"signer", to_hex(rec.signer)},
          {"r", rec.r.to_hex()},
          {"s", rec.s.to_hex()},
          {"e", rec.e.to_hex()},
          {"tx_hash", to_hex(rec.source.tx_hash)},
          {"block", detail::quantity(rec.source.block)},
          {"chain_id", detail::quantity(rec.source.chain_id)},
          {"parity", detail::quantity(rec.parity)}};
}

/// Inverse of record_to_json. s_normalized is not stored; it is re-derived as
/// "s is in the low half", which is exactly when the sign is ambiguous.
inline SignatureRecord record_from_json(const nlohmann::json& j, const Modulus& order = secp256k1_order()) {
  try {
    SignatureRecord rec;
    auto signer = hex::decode_fixed<20>(j.at("signer").get<std::string>());
    auto tx_hash = hex::decode_fixed<32>(j.at("tx_hash").get<std::string>());
    if (!signer || !tx_hash) throw std::invalid_argument("bad signer or tx_hash");
    rec.signer = *signer;
    rec.source.tx_hash = *tx_hash;
    rec.r = Scalar::from_hex(j.at("r").get<std::string>(), order);
    rec.s = Scalar::from_hex(j.at("s").get<std::string>(), order);
    rec.e = Scalar::from_hex(j.at("e").get<std::string>(), order);
    rec.source.block = detail::read_quantity(j, "block");
    rec.source.chain_id = detail::read_quantity(j, "chain_id");
    std::uint64_t parity = detail::read_quantity(j, "parity");
    if (parity > 1) throw std::invalid_argument("parity must be 0 or 1");
    rec.parity = static_cast<std::uint8_t>(parity);
    rec.s_normalized = !rec.s.is_high();
    return rec;
  } catch (const Error&) {
    throw;
  } catch (const std::exception& ex) {
    throw Error(ErrorCode::MalformedRecord, ex.what());
  }
}

}  // namespace noncehunt
