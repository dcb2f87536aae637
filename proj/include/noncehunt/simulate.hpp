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

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "noncehunt/ecdsa.hpp"
#include "noncehunt/record.hpp"
#include "noncehunt/transaction.hpp"

namespace noncehunt {
namespace synth {

/// Record for a signature made directly by the engine, bypassing transactions.
/// The tx hash is a digest of the signature itself so records stay distinct.
inline SignatureRecord signed_record(const SigningKey& key, const Scalar& e, const Scalar& nonce, bool low_s,
                                     std::uint64_t block = 0, std::uint64_t chain_id = 137) {
  Signature sig = sign(key, e, nonce);
  if (low_s) sig = normalize_low_s(sig);
  SignatureRecord rec;
  rec.signer = key.address();
  rec.r = sig.r;
  rec.s = sig.s;
  rec.e = e;
  rec.parity = sig.parity;
  rec.s_normalized = low_s;
  Bytes material;
  for (const Scalar* v : {&rec.e, &rec.r, &rec.s}) {
    auto b = v->value().to_be_bytes();
    material.insert(material.end(), b.begin(), b.end());
  }
  material.insert(material.end(), rec.signer.begin(), rec.signer.end());
  rec.source = {keccak256(material), block, chain_id};
  return rec;
}

inline RawTransaction random_transaction(std::mt19937_64& rng, TxType type, std::uint64_t chain_id = 137) {
  RawTransaction tx;
  tx.type = type;
  tx.chain_id = chain_id;
  tx.nonce = rng() % 100000;
  tx.gas_limit = 21000 + rng() % 500000;
  if (type == TxType::DynamicFee) {
    tx.max_priority_fee_per_gas = U256(rng() % 100'000'000'000ull);
    tx.max_fee_per_gas = U256(rng() % 1'000'000'000'000ull);
  } else {
    tx.gas_price = U256(rng() % 1'000'000'000'000ull);
  }
  if (rng() % 8 != 0) {
    Address to{};
    for (auto& b : to) b = static_cast<std::uint8_t>(rng());
    tx.to = to;
  }
  tx.value = U256(0, 0, rng() % 16, rng());
  tx.data.resize(rng() % 80);
  for (auto& b : tx.data) b = static_cast<std::uint8_t>(rng());
  if (type != TxType::Legacy && rng() % 2 == 0) {
    AccessListEntry entry;
    for (auto& b : entry.address) b = static_cast<std::uint8_t>(rng());
    for (std::size_t i = rng() % 3; i > 0; --i) {
      Hash32 key{};
      for (auto& b : key) b = static_cast<std::uint8_t>(rng());
      entry.storage_keys.push_back(key);
    }
    tx.access_list.push_back(entry);
  }
  return tx;
}

}  // namespace synth

enum class WalletPolicy { Random, Constant, Counter, Rfc6979 };

struct WalletSpec {
  std::string name;
  WalletPolicy policy = WalletPolicy::Random;
  std::size_t txs = 0;  // signatures under the wallet's own policy
  std::uint64_t step = 1;  // Counter: k_i = k0 + i * step
};

/// One nonce signed with by several wallets.
struct SharedNonceSpec {
  std::string name;
  std::vector<std::string> signers;
  std::size_t per_signer = 1;
};

struct Scenario {
  std::string name;
  std::uint64_t chain_id = 137;
  std::uint64_t start_block = 1;
  std::uint64_t blocks = 10;
  std::vector<WalletSpec> wallets;
  std::vector<SharedNonceSpec> shared;
  std::size_t benign_wallets = 0;
  std::size_t benign_txs = 2;
};

NLOHMANN_JSON_SERIALIZE_ENUM(WalletPolicy, {{WalletPolicy::Random, "random"},
                                            {WalletPolicy::Constant, "constant"},
                                            {WalletPolicy::Counter, "counter"},
                                            {WalletPolicy::Rfc6979, "rfc6979"}})

inline void to_json(nlohmann::json& j, const WalletSpec& w) {
  j = {{"name", w.name}, {"policy", w.policy}, {"txs", w.txs}, {"step", w.step}};
}
inline void from_json(const nlohmann::json& j, WalletSpec& w) {
  j.at("name").get_to(w.name);
  static const std::map<std::string, WalletPolicy> kPolicies = {{"random", WalletPolicy::Random},
                                                                 {"constant", WalletPolicy::Constant},
                                                                 {"counter", WalletPolicy::Counter},
                                                                 {"rfc6979", WalletPolicy::Rfc6979}};
  auto policy = kPolicies.find(j.value("policy", std::string("random")));
  if (policy == kPolicies.end()) throw Error(ErrorCode::InvalidScenario, "unknown policy for wallet " + w.name);
  w.policy = policy->second;
  w.txs = j.value("txs", std::size_t{0});
  w.step = j.value("step", std::uint64_t{1});
}
inline void to_json(nlohmann::json& j, const SharedNonceSpec& s) {
  j = {{"name", s.name}, {"signers", s.signers}, {"per_signer", s.per_signer}};
}
inline void from_json(const nlohmann::json& j, SharedNonceSpec& s) {
  j.at("name").get_to(s.name);
  j.at("signers").get_to(s.signers);
  s.per_signer = j.value("per_signer", std::size_t{1});
}
inline void to_json(nlohmann::json& j, const Scenario& s) {
  j = {{"name", s.name},           {"chain_id", s.chain_id}, {"start_block", s.start_block},
       {"blocks", s.blocks},       {"wallets", s.wallets},   {"shared_nonces", s.shared},
       {"benign_wallets", s.benign_wallets}, {"benign_txs", s.benign_txs}};
}
inline void from_json(const nlohmann::json& j, Scenario& s) {
  s.name = j.value("name", std::string("custom"));
  s.chain_id = j.value("chain_id", std::uint64_t{137});
  s.start_block = j.value("start_block", std::uint64_t{1});
  s.blocks = j.value("blocks", std::uint64_t{10});
  s.wallets = j.value("wallets", std::vector<WalletSpec>{});
  s.shared = j.value("shared_nonces", std::vector<SharedNonceSpec>{});
  s.benign_wallets = j.value("benign_wallets", std::size_t{0});
  s.benign_txs = j.value("benign_txs", std::size_t{2});
}

inline void validate(const Scenario& s) {
  auto fail = [&](const std::string& why) { throw Error(ErrorCode::InvalidScenario, s.name + ": " + why); };
  if (s.blocks == 0) fail("blocks must be positive");
  std::set<std::string> names;
  for (const auto& w : s.wallets) {
    if (w.name.empty() || !names.insert(w.name).second) fail("wallet names must be unique and non-empty");
  }
  std::set<std::string> shared_names;
  for (const auto& n : s.shared) {
    if (!shared_names.insert(n.name).second) fail("duplicate shared nonce " + n.name);
    if (n.signers.empty() || n.per_signer == 0) fail("shared nonce " + n.name + " has no signatures");
    for (const auto& who : n.signers) {
      if (!names.contains(who)) fail("shared nonce " + n.name + " names unknown wallet " + who);
    }
  }
  if (s.benign_wallets > 0 && s.benign_txs == 0) fail("benign wallets need at least one tx");
}

inline Scenario scenario_from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::MissingInput, "cannot read scenario " + path.string());
  try {
    Scenario s = nlohmann::json::parse(in).get<Scenario>();
    validate(s);
    return s;
  } catch (const nlohmann::json::exception& ex) {
    throw Error(ErrorCode::InvalidScenario, ex.what());
  }
}

/// Named scenarios for the three observed failure modes and the graph shapes
/// used in tests.
inline std::optional<Scenario> builtin_scenario(const std::string& name) {
  Scenario s;
  s.name = name;
  if (name == "c1-constant") {
    s.wallets = {{"victim", WalletPolicy::Constant, 2}};
    s.benign_wallets = 20;
  } else if (name == "c2-sequential") {
    s.wallets = {{"victim", WalletPolicy::Counter, 4}};
    s.benign_wallets = 20;
  } else if (name == "c3-pair") {
    s.wallets = {{"A"}, {"B"}};
    s.shared = {{"k1", {"A", "B"}}, {"k2", {"A", "B"}}};
  } else if (name == "chain-10") {
    for (int i = 1; i <= 10; ++i) s.wallets.push_back({"W" + std::to_string(i)});
    for (int i = 1; i <= 9; ++i) {
      s.shared.push_back({"k" + std::to_string(i), {"W" + std::to_string(i), "W" + std::to_string(i + 1)}});
    }
    // W1 repeats k1 so the chain has an entry point without outside knowledge
    s.shared.front().signers.insert(s.shared.front().signers.begin(), "W1");
  } else if (name == "star") {
    s.wallets = {{"A"}, {"B"}, {"C"}, {"D"}};
    for (const char* leaf : {"B", "C", "D"}) s.shared.push_back({std::string("k") + leaf, {"A", "A", leaf}});
  } else if (name == "clean") {
    s.wallets = {{"rfc", WalletPolicy::Rfc6979, 5}};
    s.benign_wallets = 30;
  } else if (name == "polygon-mix") {
    s.blocks = 100;
    s.wallets = {{"reuser", WalletPolicy::Constant, 3}, {"sequencer", WalletPolicy::Counter, 5}, {"A"}, {"B"}};
    s.shared = {{"k1", {"A", "B"}}, {"k2", {"A", "B"}}};
    s.benign_wallets = 200;
  } else {
    return std::nullopt;
  }
  return s;
}

inline std::vector<std::string> builtin_scenario_names() {
  return {"c1-constant", "c2-sequential", "c3-pair", "chain-10", "star", "clean", "polygon-mix"};
}

struct FixtureTx {
  Bytes raw;
  std::uint64_t block = 0;
  std::uint64_t chain_id = 0;
};

struct WalletTruth {
  std::string name;
  Address address{};
  Scalar key;
  std::string policy;
  bool vulnerable = false;
  std::optional<Scalar> base_nonce;  // Constant / Counter
};

struct NonceTruth {
  std::string name;
  Scalar value;
  U256 r;
};

struct Simulation {
  Scenario scenario;
  std::uint64_t seed = 0;
  std::vector<FixtureTx> txs;  // block order
  std::vector<WalletTruth> wallets;
  std::vector<NonceTruth> shared_nonces;

  nlohmann::json ground_truth() const;
  /// One {raw_tx_hex, block, chain_id} line per tx; empty blocks get a bare {block, chain_id} marker.
  std::string fixture_jsonl() const;
  void write(const std::filesystem::path& dir) const;
};

inline Simulation simulate(const Scenario& scenario, std::uint64_t seed) {
  validate(scenario);
  std::mt19937_64 rng(seed);
  Simulation sim;
  sim.scenario = scenario;
  sim.seed = seed;

  struct Signer {
    SigningKey key;
    NoncePolicy policy;
    std::uint64_t account_nonce = 0;
  };
  std::vector<Signer> signers;
  std::map<std::string, std::size_t> index;

  // (signer, shared nonce or -1)
  std::vector<std::pair<std::size_t, int>> events;
  auto add_wallet = [&](const std::string& name, WalletPolicy policy, std::size_t txs, std::uint64_t step) {
    SigningKey key(random_nonzero(rng));
    Scalar base = random_nonzero(rng);
    NoncePolicy nonces = NoncePolicy::fresh_random(rng());
    WalletTruth truth{name, key.address(), key.secret(), "random", false, std::nullopt};
    switch (policy) {
      case WalletPolicy::Random: break;
      case WalletPolicy::Rfc6979:
        nonces = NoncePolicy::rfc6979();
        truth.policy = "rfc6979";
        break;
      case WalletPolicy::Constant:
        nonces = NoncePolicy::constant(base);
        truth.policy = "constant";
        truth.vulnerable = txs >= 2;
        truth.base_nonce = base;
        break;
      case WalletPolicy::Counter: {
        std::vector<std::pair<Scalar, Scalar>> coeffs;
        for (std::size_t i = 0; i < txs; ++i) coeffs.emplace_back(Scalar::one(), Scalar(U256(i * step)));
        nonces = NoncePolicy::affine_sequence(base, std::move(coeffs));
        truth.policy = "counter";
        truth.vulnerable = txs >= 2;
        truth.base_nonce = base;
        break;
      }
    }
    index[name] = signers.size();
    for (std::size_t i = 0; i < txs; ++i) events.emplace_back(signers.size(), -1);
    signers.push_back({std::move(key), std::move(nonces), rng() % 1000});
    sim.wallets.push_back(std::move(truth));
  };

  for (const auto& w : scenario.wallets) add_wallet(w.name, w.policy, w.txs, w.step);
  for (std::size_t i = 0; i < scenario.benign_wallets; ++i) {
    add_wallet("benign-" + std::to_string(i), WalletPolicy::Random, scenario.benign_txs, 1);
  }
  for (std::size_t j = 0; j < scenario.shared.size(); ++j) {
    const auto& spec = scenario.shared[j];
    Scalar k = random_nonzero(rng);
    sim.shared_nonces.push_back({spec.name, k, secp256k1().x_mod_n(secp256k1().multiply_base(k)).value()});
    std::set<std::string> distinct(spec.signers.begin(), spec.signers.end());
    for (const auto& who : spec.signers) {
      for (std::size_t c = 0; c < spec.per_signer; ++c) events.emplace_back(index[who], static_cast<int>(j));
    }
    for (const auto& who : distinct) sim.wallets[index[who]].vulnerable = true;
  }

  std::shuffle(events.begin(), events.end(), rng);
  static constexpr TxType kTypes[] = {TxType::Legacy, TxType::AccessList, TxType::DynamicFee};
  for (std::size_t i = 0; i < events.size(); ++i) {
    auto [who, shared] = events[i];
    Signer& signer = signers[who];
    RawTransaction tx = synth::random_transaction(rng, kTypes[rng() % 3], scenario.chain_id);
    tx.nonce = signer.account_nonce++;
    Scalar e = signing_hash(tx);
    Scalar k = shared >= 0 ? sim.shared_nonces[static_cast<std::size_t>(shared)].value : signer.policy.next(signer.key, e);
    sign_transaction(tx, signer.key, k);
    std::uint64_t block = scenario.start_block + i * scenario.blocks / events.size();
    sim.txs.push_back({serialize(tx), block, scenario.chain_id});
  }
  return sim;
}

inline nlohmann::json Simulation::ground_truth() const {
  nlohmann::json wallets = nlohmann::json::array();
  for (const auto& w : this->wallets) {
    nlohmann::json row = {{"name", w.name},     {"address", to_hex(w.address)}, {"private_key", w.key.to_hex()},
                          {"policy", w.policy}, {"vulnerable", w.vulnerable}};
    if (w.base_nonce) row["base_nonce"] = w.base_nonce->to_hex();
    wallets.push_back(std::move(row));
  }
  nlohmann::json nonces = nlohmann::json::array();
  for (const auto& n : shared_nonces) nonces.push_back({{"name", n.name}, {"value", n.value.to_hex()}, {"r", n.r.to_hex()}});
  return {{"scenario", scenario}, {"seed", seed}, {"tx_count", txs.size()}, {"wallets", wallets}, {"shared_nonces", nonces}};
}

inline std::string Simulation::fixture_jsonl() const {
  std::string out;
  std::size_t next = 0;
  for (std::uint64_t block = scenario.start_block; block < scenario.start_block + scenario.blocks; ++block) {
    if (next == txs.size() || txs[next].block != block) {
      out += nlohmann::json{{"block", block}, {"chain_id", scenario.chain_id}}.dump() + "\n";
      continue;
    }
    for (; next < txs.size() && txs[next].block == block; ++next) {
      out += nlohmann::json{{"raw_tx_hex", hex::encode(txs[next].raw)}, {"block", block}, {"chain_id", txs[next].chain_id}}
                 .dump() +
             "\n";
    }
  }
  return out;
}

inline void Simulation::write(const std::filesystem::path& dir) const {
  std::filesystem::create_directories(dir);
  std::ofstream fixture(dir / "fixture.jsonl", std::ios::trunc | std::ios::binary);
  std::ofstream truth(dir / "ground_truth.json", std::ios::trunc | std::ios::binary);
  if (!fixture || !truth) throw Error(ErrorCode::MissingInput, "cannot write to " + dir.string());
  fixture << fixture_jsonl();
  truth << ground_truth().dump(2) << '\n';
}

}  // namespace noncehunt
