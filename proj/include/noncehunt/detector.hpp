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
#include <functional>
#include <map>
#include <mutex>
#include <numeric>
#include <set>
#include <string>
#include <vector>

#include "noncehunt/ecdsa.hpp"
#include "noncehunt/error.hpp"
#include "noncehunt/record.hpp"

namespace noncehunt {

enum class CollisionClass { C1, C3, Mixed, Benign };

constexpr std::string_view to_string(CollisionClass c) {
  switch (c) {
    case CollisionClass::C1: return "C1";
    case CollisionClass::C3: return "C3";
    case CollisionClass::Mixed: return "Mixed";
    case CollisionClass::Benign: return "Benign";
  }
  return "?";
}

/// One connected component of the signer/r-value graph, restricted to r values
/// that occur in at least two records.
struct ComponentReport {
  std::size_t id = 0;
  std::vector<Address> signers;   // first-appearance order
  std::vector<U256> r_values;     // first-appearance order
  std::vector<SignatureRecord> records;  // ledger order
  CollisionClass cls = CollisionClass::Benign;
  std::size_t unknowns = 0;   // |signers| + |r_values|
  std::size_t equations = 0;  // |records|
  bool solvable = false;      // equations >= unknowns
};

/// Bipartite multigraph: signers on one side, r values on the other, one edge per record.
struct CollisionGraph {
  std::vector<SignatureRecord> edges;
};

/// k_i = alpha * k0 + beta for the record at position `index` of a group.
struct AffineRelation {
  Scalar alpha;
  Scalar beta;
  std::size_t index = 0;
};

/// A user-supplied guess about how one signer derives successive nonces.
struct AffineHypothesis {
  std::string name;
  std::function<AffineRelation(std::size_t index)> relation;
  std::size_t window = 0;  // records per group; 0 = the signer's whole history

  /// k_i = k0 + i * step
  static AffineHypothesis counter(std::size_t window = 0, std::uint64_t step = 1) {
    return {"counter", [step](std::size_t i) {
              return AffineRelation{Scalar::one(), Scalar(U256(static_cast<std::uint64_t>(i) * step)), i};
            },
            window};
  }
  /// k_i = k0 (C1 expressed as a degenerate affine relation)
  static AffineHypothesis constant(std::size_t window = 0) {
    return {"constant", [](std::size_t i) { return AffineRelation{Scalar::one(), Scalar::zero(), i}; }, window};
  }
};

struct AffineGroup {
  Address signer{};
  std::vector<SignatureRecord> records;   // block order
  std::vector<AffineRelation> relations;  // one per record
};

/// Observed signatures indexed by tx hash, r value and signer. Ingestion is
/// serialized by an internal lock; read operations work on a snapshot.
class Ledger {
 public:
  /// With verify_signers, a record is rejected unless recovering the public
  /// key from (e, r, s, parity) reproduces its signer address.
  explicit Ledger(const Curve& curve = secp256k1(), bool verify_signers = true)
      : curve_(&curve), verify_signers_(verify_signers) {}

  Ledger(const Ledger&) = delete;
  Ledger& operator=(const Ledger&) = delete;

  /// Returns false when a record with the same tx hash is already present.
  bool ingest(const SignatureRecord& rec) {
    validate(rec);
    std::lock_guard lock(mu_);
    if (by_tx_.contains(rec.source.tx_hash)) return false;
    std::size_t idx = records_.size();
    records_.push_back(rec);
    by_tx_.emplace(rec.source.tx_hash, idx);
    auto& bucket = by_r_[rec.r.value()];
    bucket.push_back(idx);
    if (bucket.size() == 2) ++collided_r_;
    return true;
  }

  std::size_t size() const {
    std::lock_guard lock(mu_);
    return records_.size();
  }

  std::vector<SignatureRecord> records() const {
    std::lock_guard lock(mu_);
    return records_;
  }

  /// Number of distinct r values seen in two or more records.
  std::size_t collided_r_count() const {
    std::lock_guard lock(mu_);
    return collided_r_;
  }

  CollisionGraph graph() const { return {records()}; }

  std::vector<ComponentReport> components(bool include_benign = false) const {
    return extract_components(records(), include_benign);
  }

  /// Groups same-signer records in block order, windowed, paired with the
  /// hypothesis coefficients. Affine-related nonces give unrelated r values, so
  /// this is the only route to C2 candidates.
  std::vector<AffineGroup> hypothesize_affine_sets(const AffineHypothesis& hypothesis) const {
    auto snapshot = records();
    std::map<Address, std::vector<SignatureRecord>> by_signer;
    for (const auto& rec : snapshot) by_signer[rec.signer].push_back(rec);

    std::vector<AffineGroup> groups;
    for (auto& [signer, recs] : by_signer) {
      if (recs.size() < 2) continue;
      std::stable_sort(recs.begin(), recs.end(),
                       [](const SignatureRecord& a, const SignatureRecord& b) { return a.source.block < b.source.block; });
      std::size_t window = hypothesis.window == 0 ? recs.size() : hypothesis.window;
      for (std::size_t start = 0; start < recs.size(); start += window) {
        std::size_t end = std::min(recs.size(), start + window);
        if (end - start < 2) break;
        AffineGroup group;
        group.signer = signer;
        for (std::size_t i = start; i < end; ++i) {
          group.records.push_back(recs[i]);
          group.relations.push_back(hypothesis.relation(i - start));
        }
        groups.push_back(std::move(group));
      }
    }
    return groups;
  }

  void save_jsonl(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw Error(ErrorCode::MissingInput, "cannot write ledger " + path.string());
    for (const auto& rec : records()) out << record_to_json(rec).dump() << '\n';
  }

  /// Ingests every row of a JSONL ledger; returns how many were new.
  std::size_t load_jsonl(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::MissingInput, "cannot read ledger " + path.string());
    std::size_t added = 0;
    std::string line;
    while (std::getline(in, line)) {
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      nlohmann::json row;
      try {
        row = nlohmann::json::parse(line);
      } catch (const nlohmann::json::exception& ex) {
        throw Error(ErrorCode::MalformedRecord, ex.what());
      }
      if (ingest(record_from_json(row, curve_->order()))) ++added;
    }
    return added;
  }

  static std::vector<ComponentReport> extract_components(const std::vector<SignatureRecord>& records,
                                                         bool include_benign = false);

 private:
  void validate(const SignatureRecord& rec) const {
    if (rec.r.is_zero() || rec.s.is_zero()) throw Error(ErrorCode::MalformedRecord, "r and s must be nonzero");
    if (rec.parity > 1) throw Error(ErrorCode::MalformedRecord, "parity must be 0 or 1");
    if (!verify_signers_) return;
    try {
      CurvePoint pub = recover_public_key(rec.e, Signature{rec.r, rec.s, rec.parity, false}, *curve_);
      if (address_of(pub, *curve_) == rec.signer) return;
    } catch (const Error&) {
    }
    throw Error(ErrorCode::MalformedRecord, "signer does not match the recovered address for " + to_hex(rec.source.tx_hash));
  }

  const Curve* curve_;
  bool verify_signers_;
  mutable std::mutex mu_;
  std::vector<SignatureRecord> records_;
  std::map<Hash32, std::size_t> by_tx_;
  std::map<U256, std::vector<std::size_t>> by_r_;
  std::size_t collided_r_ = 0;
};

inline std::vector<ComponentReport> Ledger::extract_components(const std::vector<SignatureRecord>& records,
                                                               bool include_benign) {
  std::map<U256, std::vector<std::size_t>> by_r;
  std::map<Address, std::size_t> signer_index;
  std::vector<Address> signers;
  for (std::size_t i = 0; i < records.size(); ++i) {
    by_r[records[i].r.value()].push_back(i);
    if (signer_index.emplace(records[i].signer, signers.size()).second) signers.push_back(records[i].signer);
  }

  // union-find over signer nodes; shared r values glue their signers together
  std::vector<std::size_t> parent(signers.size());
  std::iota(parent.begin(), parent.end(), 0);
  std::function<std::size_t(std::size_t)> find = [&](std::size_t v) {
    while (parent[v] != v) v = parent[v] = parent[parent[v]];
    return v;
  };
  std::vector<bool> touched(signers.size(), false);
  for (const auto& [r, idxs] : by_r) {
    if (idxs.size() < 2) continue;
    std::size_t first = signer_index[records[idxs[0]].signer];
    touched[first] = true;
    for (std::size_t i : idxs) {
      std::size_t s = signer_index[records[i].signer];
      touched[s] = true;
      parent[find(s)] = find(first);
    }
  }

  std::map<std::size_t, ComponentReport> by_root;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& rec = records[i];
    std::size_t s = signer_index[rec.signer];
    bool shared = by_r[rec.r.value()].size() >= 2;
    if (!touched[s]) {
      if (!include_benign) continue;
    } else if (!shared) {
      continue;
    }
    ComponentReport& comp = by_root[touched[s] ? find(s) : s + signers.size()];
    if (std::find(comp.signers.begin(), comp.signers.end(), rec.signer) == comp.signers.end()) {
      comp.signers.push_back(rec.signer);
    }
    if (std::find(comp.r_values.begin(), comp.r_values.end(), rec.r.value()) == comp.r_values.end()) {
      comp.r_values.push_back(rec.r.value());
    }
    comp.records.push_back(rec);
  }

  std::vector<ComponentReport> out;
  for (auto& [root, comp] : by_root) {
    comp.unknowns = comp.signers.size() + comp.r_values.size();
    comp.equations = comp.records.size();
    comp.solvable = comp.equations >= comp.unknowns;

    bool cross = false, self = false;
    std::map<U256, std::set<Address>> signers_on_r;
    std::map<std::pair<Address, U256>, int> uses;
    for (const auto& rec : comp.records) {
      signers_on_r[rec.r.value()].insert(rec.signer);
      if (++uses[{rec.signer, rec.r.value()}] >= 2) self = true;
    }
    for (const auto& [r, who] : signers_on_r) cross = cross || who.size() >= 2;
    if (!touched[signer_index[comp.signers.front()]]) {
      comp.cls = CollisionClass::Benign;
    } else if (cross && self) {
      comp.cls = CollisionClass::Mixed;
    } else if (cross) {
      comp.cls = CollisionClass::C3;
    } else {
      comp.cls = CollisionClass::C1;
    }
    out.push_back(std::move(comp));
  }

  // deterministic order independent of ingestion: colliding components first, by smallest r
  auto key = [](const ComponentReport& c) {
    return std::make_pair(c.cls == CollisionClass::Benign, *std::min_element(c.r_values.begin(), c.r_values.end()));
  };
  std::sort(out.begin(), out.end(), [&](const ComponentReport& a, const ComponentReport& b) { return key(a) < key(b); });
  for (std::size_t i = 0; i < out.size(); ++i) out[i].id = i;
  return out;
}

}  // namespace noncehunt
