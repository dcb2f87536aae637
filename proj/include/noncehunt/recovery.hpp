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
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "noncehunt/detector.hpp"

namespace noncehunt {

enum class SecretKind { PrivateKey, Nonce };
enum class RecoveryMethod { C1, C2, C3, GeneralComponent, Cascade };

constexpr std::string_view to_string(SecretKind k) { return k == SecretKind::PrivateKey ? "private_key" : "nonce"; }

constexpr std::string_view to_string(RecoveryMethod m) {
  switch (m) {
    case RecoveryMethod::C1: return "C1";
    case RecoveryMethod::C2: return "C2";
    case RecoveryMethod::C3: return "C3";
    case RecoveryMethod::GeneralComponent: return "GeneralComponent";
    case RecoveryMethod::Cascade: return "Cascade";
  }
  return "?";
}

/// A recovered private key (identified by signer) or nonce (identified by r).
struct RecoveredSecret {
  SecretKind kind = SecretKind::PrivateKey;
  Address signer{};
  U256 r;
  Scalar value;
  std::vector<Hash32> evidence;
  RecoveryMethod method = RecoveryMethod::GeneralComponent;
  bool validated = false;
  std::optional<std::size_t> rank;  // set for GeneralComponent output
};

inline bool key_matches(const Scalar& x, const Address& signer, const Curve& curve = secp256k1()) {
  return !x.is_zero() && address_of(curve.multiply_base(x), curve) == signer;
}

inline bool nonce_matches(const Scalar& k, const U256& r, const Curve& curve = secp256k1()) {
  if (k.is_zero()) return false;
  CurvePoint point = curve.multiply_base(k);
  return !point.is_identity() && curve.x_mod_n(point).value() == r;
}

struct C1Solution {
  Scalar nonce;  // relative to a's observed s
  Scalar key;
};

/// Two signatures by one signer over the same r.
inline C1Solution recover_c1(const SignatureRecord& a, const SignatureRecord& b, const Curve& curve = secp256k1()) {
  if (a.signer != b.signer || a.r != b.r || a.e == b.e) {
    throw Error(ErrorCode::PreconditionViolated, "C1 needs one signer, one r and two distinct hashes");
  }
  if (a.s == b.s || a.s == -b.s) throw Error(ErrorCode::DegenerateDifference, "s values coincide up to sign");

  const Scalar r_inv = a.r.inv();
  for (int combo = 0; combo < 4; ++combo) {
    Scalar sa = (combo & 2) ? -a.s : a.s;
    Scalar sb = (combo & 1) ? -b.s : b.s;
    Scalar k = (a.e - b.e) * (sa - sb).inv();
    Scalar x = (sa * k - a.e) * r_inv;
    if (key_matches(x, a.signer, curve)) return {a.s.inv() * (a.e + x * a.r), x};
  }
  throw Error(ErrorCode::NotCollinear, "no sign combination yields the signer's key");
}

namespace detail {

/// Iterates sign assignments for the records flagged in `ambiguous`. Later
/// records flip first, so earlier records keep their observed sign the longest.
class SignSearch {
 public:
  explicit SignSearch(std::vector<std::size_t> ambiguous) : ambiguous_(std::move(ambiguous)) {
    if (ambiguous_.size() > 10) throw Error(ErrorCode::SignCombinationCap, "more than 2^10 sign combinations");
  }

  std::size_t count() const { return std::size_t{1} << ambiguous_.size(); }

  std::vector<bool> flips(std::size_t mask, std::size_t records) const {
    std::vector<bool> out(records, false);
    for (std::size_t bit = 0; bit < ambiguous_.size(); ++bit) {
      if (mask >> bit & 1) out[ambiguous_[ambiguous_.size() - 1 - bit]] = true;
    }
    return out;
  }

 private:
  std::vector<std::size_t> ambiguous_;
};

inline std::vector<Hash32> evidence_of(const std::vector<SignatureRecord>& records) {
  std::vector<Hash32> out;
  for (const auto& rec : records) out.push_back(rec.source.tx_hash);
  return out;
}

}  // namespace detail

struct C2Solution {
  Scalar key;
  Scalar base_nonce;
};

/// k_i = alpha_i * k0 + beta_i across one signer's records.
inline C2Solution recover_c2(const std::vector<SignatureRecord>& records, const std::vector<AffineRelation>& relations,
                             const Curve& curve = secp256k1()) {
  if (records.size() < 2 || records.size() != relations.size()) {
    throw Error(ErrorCode::PreconditionViolated, "need matching records and relations, at least two");
  }
  for (const auto& rec : records) {
    if (rec.signer != records.front().signer) throw Error(ErrorCode::PreconditionViolated, "records span signers");
  }
  const Modulus& n = curve.order();
  std::vector<std::size_t> ambiguous;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (records[i].s_normalized) ambiguous.push_back(i);
  }
  detail::SignSearch search(std::move(ambiguous));

  bool saw_unique = false, saw_underdetermined = false;
  for (std::size_t mask = 0; mask < search.count(); ++mask) {
    auto flip = search.flips(mask, records.size());
    ScalarMatrix a(records.size(), 2, n);
    std::vector<Scalar> b;
    for (std::size_t i = 0; i < records.size(); ++i) {
      const auto& rec = records[i];
      Scalar s = flip[i] ? -rec.s : rec.s;
      a.at(i, 0) = rec.r;
      a.at(i, 1) = -(s * relations[i].alpha);
      b.push_back(s * relations[i].beta - rec.e);
    }
    auto out = solve(a, b);
    if (out.kind == SolveOutcome::Kind::Underdetermined) saw_underdetermined = true;
    if (!out.unique()) continue;
    saw_unique = true;
    auto sol = out.solution();
    if (key_matches(sol[0], records.front().signer, curve)) return {sol[0], sol[1]};
  }
  if (saw_unique) throw Error(ErrorCode::ValidationFailed, "consistent solution does not match the signer");
  if (saw_underdetermined) throw Error(ErrorCode::Underdetermined, "affine system has rank below 2");
  throw Error(ErrorCode::Inconsistent, "records contradict the affine hypothesis");
}

struct C3Solution {
  Scalar key_a;  // signer of pair1.first
  Scalar key_b;
};

/// Two wallets A, B that both signed with nonce k1 (pair1) and with k2 (pair2).
inline C3Solution recover_c3(const std::pair<SignatureRecord, SignatureRecord>& pair1,
                             std::pair<SignatureRecord, SignatureRecord> pair2, const Curve& curve = secp256k1()) {
  const Address wallet_a = pair1.first.signer, wallet_b = pair1.second.signer;
  if (wallet_a == wallet_b || pair1.first.r != pair1.second.r || pair2.first.r != pair2.second.r) {
    throw Error(ErrorCode::PreconditionViolated, "each pair must share r across two wallets");
  }
  if (pair2.first.signer == wallet_b && pair2.second.signer == wallet_a) std::swap(pair2.first, pair2.second);
  if (pair2.first.signer != wallet_a || pair2.second.signer != wallet_b) {
    throw Error(ErrorCode::PreconditionViolated, "pairs involve different wallets");
  }
  if (pair1.first.r == pair2.first.r) throw Error(ErrorCode::SingularSystem, "both pairs share the same r");

  const Modulus& n = curve.order();
  const std::pair<SignatureRecord, SignatureRecord>* pairs[2] = {&pair1, &pair2};
  // only the relative sign inside each pair matters
  for (int combo = 0; combo < 4; ++combo) {
    ScalarMatrix m(2, 2, n);
    std::vector<Scalar> rhs;
    for (int j = 0; j < 2; ++j) {
      const auto& [ra, rb] = *pairs[j];
      Scalar sa = ra.s;
      Scalar sb = (combo >> (1 - j) & 1) ? -rb.s : rb.s;
      m.at(j, 0) = sb * ra.r;
      m.at(j, 1) = -(sa * ra.r);
      rhs.push_back(sa * rb.e - sb * ra.e);
    }
    auto out = solve(m, rhs);
    if (!out.unique()) {
      if (combo == 0) throw Error(ErrorCode::SingularSystem, "cross-wallet system has rank below 2");
      continue;
    }
    auto sol = out.solution();
    if (key_matches(sol[0], wallet_a, curve) && key_matches(sol[1], wallet_b, curve)) return {sol[0], sol[1]};
  }
  throw Error(ErrorCode::ValidationFailed, "no sign combination yields both wallets' keys");
}

/// One equation x_signer * r - s * k_r = -e per record, searched over the
/// sign of every record that is not the first on its r. Nonce values are
/// relative to that first record.
inline std::vector<RecoveredSecret> solve_component(const ComponentReport& report, const Curve& curve = secp256k1()) {
  if (report.records.empty()) return {};
  const Modulus& n = curve.order();
  const std::size_t signer_count = report.signers.size();
  const std::size_t cols = signer_count + report.r_values.size();

  std::vector<std::size_t> signer_col, r_col;
  for (const auto& rec : report.records) {
    auto sit = std::find(report.signers.begin(), report.signers.end(), rec.signer);
    auto rit = std::find(report.r_values.begin(), report.r_values.end(), rec.r.value());
    if (sit == report.signers.end() || rit == report.r_values.end()) {
      throw Error(ErrorCode::PreconditionViolated, "record outside the component");
    }
    signer_col.push_back(static_cast<std::size_t>(sit - report.signers.begin()));
    r_col.push_back(signer_count + static_cast<std::size_t>(rit - report.r_values.begin()));
  }
  auto ambiguous_in = [&](const std::vector<std::size_t>& rows) {
    std::vector<std::size_t> out;
    std::set<U256> seen_r;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const auto& rec = report.records[rows[i]];
      if (!seen_r.insert(rec.r.value()).second && rec.s_normalized) out.push_back(i);
    }
    return out;
  };

  std::vector<std::size_t> rows(report.records.size());
  std::iota(rows.begin(), rows.end(), 0);
  if (ambiguous_in(rows).size() > 10) {
    // too many signs to search: keep only rows that add rank, which is enough
    // to pin every unknown the full system pins (validation replaces the
    // dropped consistency rows)
    std::vector<std::size_t> basis;
    std::size_t rank = 0;
    for (std::size_t i : rows) {
      basis.push_back(i);
      ScalarMatrix a(basis.size(), cols, n);
      for (std::size_t j = 0; j < basis.size(); ++j) {
        a.at(j, signer_col[basis[j]]) = report.records[basis[j]].r;
        a.at(j, r_col[basis[j]]) = -report.records[basis[j]].s;
      }
      std::size_t next = solve(a, std::vector<Scalar>(basis.size(), Scalar::zero(n))).rank;
      if (next == rank) basis.pop_back();
      rank = next;
    }
    rows = std::move(basis);
  }
  std::vector<SignatureRecord> records;
  for (std::size_t i : rows) records.push_back(report.records[i]);
  {
    std::vector<std::size_t> sc, rc;
    for (std::size_t i : rows) {
      sc.push_back(signer_col[i]);
      rc.push_back(r_col[i]);
    }
    signer_col = std::move(sc);
    r_col = std::move(rc);
  }
  detail::SignSearch search(ambiguous_in(rows));

  std::map<Address, RecoveredSecret> keys;
  std::map<U256, RecoveredSecret> nonces;
  auto evidence = detail::evidence_of(report.records);
  auto emit = [&](SecretKind kind, std::size_t col, const Scalar& value, std::size_t rank) {
    RecoveredSecret out;
    out.kind = kind;
    out.value = value;
    out.evidence = evidence;
    out.method = RecoveryMethod::GeneralComponent;
    out.validated = true;
    out.rank = rank;
    if (kind == SecretKind::PrivateKey) {
      out.signer = report.signers[col];
      keys.emplace(out.signer, std::move(out));
    } else {
      out.r = report.r_values[col - signer_count];
      nonces.emplace(out.r, std::move(out));
    }
  };

  for (std::size_t mask = 0; mask < search.count() && keys.size() < signer_count; ++mask) {
    auto flip = search.flips(mask, records.size());
    ScalarMatrix a(records.size(), cols, n);
    std::vector<Scalar> b;
    for (std::size_t i = 0; i < records.size(); ++i) {
      a.at(i, signer_col[i]) = records[i].r;
      a.at(i, r_col[i]) = flip[i] ? records[i].s : -records[i].s;
      b.push_back(-records[i].e);
    }
    auto out = solve(a, b);
    if (out.kind == SolveOutcome::Kind::Inconsistent) continue;
    for (std::size_t c = 0; c < signer_count; ++c) {
      if (!out.values[c] || keys.contains(report.signers[c])) continue;
      if (key_matches(*out.values[c], report.signers[c], curve)) emit(SecretKind::PrivateKey, c, *out.values[c], out.rank);
    }
    for (std::size_t c = signer_count; c < cols; ++c) {
      if (!out.values[c] || nonces.contains(report.r_values[c - signer_count])) continue;
      if (nonce_matches(*out.values[c], report.r_values[c - signer_count], curve)) {
        emit(SecretKind::Nonce, c, *out.values[c], out.rank);
      }
    }
  }

  std::vector<RecoveredSecret> result;
  for (const auto& signer : report.signers) {
    if (auto it = keys.find(signer); it != keys.end()) result.push_back(it->second);
  }
  for (const auto& r : report.r_values) {
    if (auto it = nonces.find(r); it != nonces.end()) result.push_back(it->second);
  }
  return result;
}

struct CascadeResult {
  std::vector<RecoveredSecret> secrets;  // newly recovered only
  std::size_t rounds = 0;                // rounds that produced something new
};

/// Fixed point over the collision graph: known keys pin the nonces of their
/// signatures, known nonces pin the keys of every signer that used them.
inline CascadeResult cascade(const std::vector<RecoveredSecret>& known, const CollisionGraph& graph,
                             const Curve& curve = secp256k1()) {
  std::map<Address, Scalar> keys;
  std::map<U256, Scalar> nonces;
  for (const auto& s : known) {
    if (!s.validated) continue;
    if (s.kind == SecretKind::PrivateKey) keys.emplace(s.signer, s.value);
    else nonces.emplace(s.r, s.value);
  }
  CascadeResult result;
  if (keys.empty() && nonces.empty()) return result;

  for (;;) {
    bool progress = false;
    const auto known_keys = keys;
    for (const auto& rec : graph.edges) {
      auto kit = known_keys.find(rec.signer);
      if (kit == known_keys.end() || nonces.contains(rec.r.value())) continue;
      Scalar k = rec.s.inv() * (rec.e + kit->second * rec.r);
      if (!nonce_matches(k, rec.r.value(), curve)) continue;
      nonces.emplace(rec.r.value(), k);
      result.secrets.push_back({SecretKind::Nonce, rec.signer, rec.r.value(), k, {rec.source.tx_hash},
                                RecoveryMethod::Cascade, true, std::nullopt});
      progress = true;
    }
    for (const auto& rec : graph.edges) {
      auto nit = nonces.find(rec.r.value());
      if (nit == nonces.end() || keys.contains(rec.signer)) continue;
      const Scalar r_inv = rec.r.inv();
      for (const Scalar& s : {rec.s, -rec.s}) {
        Scalar x = (s * nit->second - rec.e) * r_inv;
        if (!key_matches(x, rec.signer, curve)) continue;
        keys.emplace(rec.signer, x);
        result.secrets.push_back({SecretKind::PrivateKey, rec.signer, {}, x, {rec.source.tx_hash},
                                  RecoveryMethod::Cascade, true, std::nullopt});
        progress = true;
        break;
      }
    }
    if (!progress) break;
    ++result.rounds;
  }
  return result;
}

struct RecoveryRun {
  std::vector<RecoveredSecret> secrets;
  std::vector<std::string> notes;  // components or groups that could not be attempted
};

/// Solves every collision component, then the affine hypothesis groups if a
/// hypothesis is given, then cascades the result over the collision edges.
inline RecoveryRun recover_all(const Ledger& ledger, const std::optional<AffineHypothesis>& hypothesis = std::nullopt,
                               const Curve& curve = secp256k1()) {
  RecoveryRun run;
  std::set<Address> known;
  CollisionGraph collisions;
  for (const auto& comp : ledger.components()) {
    collisions.edges.insert(collisions.edges.end(), comp.records.begin(), comp.records.end());
    try {
      for (auto& secret : solve_component(comp, curve)) {
        if (secret.kind == SecretKind::PrivateKey) known.insert(secret.signer);
        run.secrets.push_back(std::move(secret));
      }
    } catch (const Error& err) {
      run.notes.push_back("component " + std::to_string(comp.id) + ": " + err.what());
    }
  }
  if (hypothesis) {
    for (const auto& group : ledger.hypothesize_affine_sets(*hypothesis)) {
      if (known.contains(group.signer)) continue;
      try {
        auto sol = recover_c2(group.records, group.relations, curve);
        known.insert(group.signer);
        run.secrets.push_back({SecretKind::PrivateKey, group.signer, {}, sol.key, detail::evidence_of(group.records),
                               RecoveryMethod::C2, true, std::nullopt});
      } catch (const Error& err) {
        if (err.code() != ErrorCode::Inconsistent) run.notes.push_back(to_hex(group.signer) + ": " + err.what());
      }
    }
  }
  auto more = cascade(run.secrets, collisions, curve);
  for (auto& secret : more.secrets) run.secrets.push_back(std::move(secret));
  return run;
}

}  // namespace noncehunt
