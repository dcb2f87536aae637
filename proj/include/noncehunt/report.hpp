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

#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "noncehunt/detector.hpp"
#include "noncehunt/recovery.hpp"

namespace noncehunt {

/// Keeps the first and last four hex digits of a secret.
inline std::string redact(const std::string& hex_value) {
  std::string digits(hex::strip_prefix(hex_value));
  if (digits.size() <= 8) return "0x" + std::string(digits.size(), '*');
  return "0x" + digits.substr(0, 4) + "..." + digits.substr(digits.size() - 4);
}

inline nlohmann::json component_to_json(const ComponentReport& c) {
  nlohmann::json signers = nlohmann::json::array(), rs = nlohmann::json::array(), txs = nlohmann::json::array();
  for (const auto& s : c.signers) signers.push_back(to_hex(s));
  for (const auto& r : c.r_values) rs.push_back(r.to_hex());
  for (const auto& rec : c.records) txs.push_back(to_hex(rec.source.tx_hash));
  return {{"id", c.id},
          {"class", to_string(c.cls)},
          {"signers", signers},
          {"r_values", rs},
          {"records", txs},
          {"unknowns", c.unknowns},
          {"equations", c.equations},
          {"solvable", c.solvable}};
}

inline nlohmann::json components_to_json(const std::vector<ComponentReport>& comps) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& c : comps) out.push_back(component_to_json(c));
  return out;
}

/// Private keys and nonces are redacted unless `reveal` is set.
inline nlohmann::json secret_to_json(const RecoveredSecret& s, bool reveal) {
  nlohmann::json evidence = nlohmann::json::array();
  for (const auto& h : s.evidence) evidence.push_back(to_hex(h));
  nlohmann::json j = {{"kind", to_string(s.kind)},
                      {"signer_or_r", s.kind == SecretKind::PrivateKey ? to_hex(s.signer) : s.r.to_hex()},
                      {"value_hex", reveal ? s.value.to_hex() : redact(s.value.to_hex())},
                      {"method", to_string(s.method)},
                      {"evidence", evidence},
                      {"validated", s.validated}};
  if (s.rank) j["rank"] = *s.rank;
  return j;
}

inline nlohmann::json recovery_to_json(const std::vector<RecoveredSecret>& secrets, bool reveal) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& s : secrets) out.push_back(secret_to_json(s, reveal));
  return out;
}

/// Plain-text audit summary from a component report and a recovery report.
inline std::string summary(std::size_t record_count, const nlohmann::json& components, const nlohmann::json& recovery) {
  std::map<std::string, std::size_t> per_class;
  std::size_t solvable = 0;
  for (const auto& c : components) {
    ++per_class[c.at("class").get<std::string>()];
    if (c.at("solvable").get<bool>()) ++solvable;
  }
  std::ostringstream out;
  out << "records: " << record_count << "\n";
  out << "components: " << components.size() << " (solvable " << solvable << ")\n";
  for (const char* cls : {"C1", "C3", "Mixed", "Benign"}) {
    if (per_class.contains(cls)) out << "  " << cls << ": " << per_class[cls] << "\n";
  }
  std::size_t keys = 0, nonces = 0;
  for (const auto& s : recovery) (s.at("kind") == "private_key" ? keys : nonces)++;
  out << "recovered private keys: " << keys << "\n";
  for (const auto& s : recovery) {
    if (s.at("kind") != "private_key") continue;
    out << "  " << s.at("signer_or_r").get<std::string>() << "  " << s.at("method").get<std::string>()
        << (s.at("validated").get<bool>() ? "  validated" : "  UNVALIDATED") << "\n";
    for (const auto& h : s.at("evidence")) out << "    " << h.get<std::string>() << "\n";
  }
  out << "recovered nonces: " << nonces << "\n";
  return out.str();
}

}  // namespace noncehunt
