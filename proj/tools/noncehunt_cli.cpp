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

// noncehunt: audit transaction streams for ECDSA nonce reuse.
//
//   noncehunt simulate --seed 7 --scenario c3-pair --out data/
//   noncehunt scan --source fixture:data/fixture.jsonl --ledger data/ledger.jsonl
//   noncehunt detect --ledger data/ledger.jsonl --out data/components.json
//   noncehunt recover --ledger data/ledger.jsonl --out data/recovery.json
//   noncehunt report --ledger data/ledger.jsonl --recovery data/recovery.json
//
// Exit codes: 0 clean, 1 error, 2 vulnerabilities found.

#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "noncehunt.hpp"

namespace fs = std::filesystem;
using namespace noncehunt;

namespace {

constexpr int kClean = 0;
constexpr int kFailure = 1;
constexpr int kVulnerable = 2;

void write_output(const std::string& path, const std::string& content) {
  if (path.empty() || path == "-") {
    std::cout << content;
    return;
  }
  std::ofstream out(path, std::ios::trunc | std::ios::binary);
  if (!out) throw Error(ErrorCode::MissingInput, "cannot write " + path);
  out << content;
}

nlohmann::json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::MissingInput, "cannot read " + path);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& ex) {
    throw Error(ErrorCode::MissingInput, path + ": " + ex.what());
  }
}

void load_ledger(Ledger& ledger, const std::string& path) {
  if (path.empty()) throw Error(ErrorCode::MissingInput, "--ledger is required");
  if (!fs::exists(path)) throw Error(ErrorCode::MissingInput, "ledger not found: " + path + " (run scan first)");
  ledger.load_jsonl(path);
}

std::optional<AffineHypothesis> parse_hypothesis(const std::string& spec) {
  if (spec.empty()) return std::nullopt;
  auto colon = spec.find(':');
  std::string name = spec.substr(0, colon);
  std::size_t window = 0;
  if (colon != std::string::npos) window = std::stoul(spec.substr(colon + 1));
  if (name == "counter") return AffineHypothesis::counter(window);
  if (name == "constant") return AffineHypothesis::constant(window);
  throw Error(ErrorCode::PreconditionViolated, "unknown hypothesis '" + name + "' (expected counter[:window] or constant[:window])");
}

std::size_t vulnerable_components(const std::vector<ComponentReport>& comps) {
  std::size_t n = 0;
  for (const auto& c : comps) n += c.cls != CollisionClass::Benign;
  return n;
}

struct Options {
  std::string source;
  std::optional<std::uint64_t> from_block;
  std::optional<std::uint64_t> to_block;
  std::string ledger;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::string scenario;
  bool reveal_secrets = false;
  bool verbose = false;
  // scan tuning
  std::string checkpoint;
  std::size_t width = 4;
  double rate = 10.0;
  unsigned retries = 4;
  unsigned timeout_ms = 10000;
  std::optional<std::uint64_t> max_blocks;
  // recover / report
  std::string hypothesis;
  std::string recovery;
};

int cmd_simulate(const Options& o) {
  if (!o.seed) throw Error(ErrorCode::InvalidScenario, "--seed is required for reproducible fixtures");
  if (o.out.empty()) throw Error(ErrorCode::MissingInput, "--out directory is required");
  Scenario scenario;
  if (auto builtin = builtin_scenario(o.scenario)) {
    scenario = *builtin;
  } else if (fs::exists(o.scenario)) {
    scenario = scenario_from_file(o.scenario);
  } else {
    std::string names;
    for (const auto& n : builtin_scenario_names()) names += " " + n;
    throw Error(ErrorCode::InvalidScenario, "unknown scenario '" + o.scenario + "'; built-ins:" + names);
  }
  auto sim = simulate(scenario, *o.seed);
  sim.write(o.out);
  std::cerr << "simulate: " << sim.txs.size() << " transactions, " << sim.wallets.size() << " wallets -> " << o.out << "\n";
  return kClean;
}

int cmd_scan(const Options& o) {
  if (o.ledger.empty()) throw Error(ErrorCode::MissingInput, "--ledger is required");
  std::unique_ptr<BlockSource> source;
  std::uint64_t from = 0, to = 0;
  if (o.source.rfind("fixture:", 0) == 0) {
    auto fixture = std::make_unique<FixtureSource>(o.source.substr(8));
    auto range = fixture->range();
    if (!range && (!o.from_block || !o.to_block)) throw Error(ErrorCode::FixtureMissing, "fixture is empty");
    from = o.from_block.value_or(range ? range->first : 0);
    to = o.to_block.value_or(range ? range->second : 0);
    source = std::move(fixture);
  } else if (o.source.rfind("rpc:", 0) == 0) {
    if (!o.from_block || !o.to_block) throw Error(ErrorCode::MissingInput, "--from-block and --to-block are required for rpc sources");
    RpcConfig config;
    config.url = o.source.substr(4);
    config.rate_limit = o.rate;
    config.max_retries = o.retries;
    config.timeout = std::chrono::milliseconds(o.timeout_ms);
    source = std::make_unique<RpcSource>(config);
    from = *o.from_block;
    to = *o.to_block;
  } else {
    throw Error(ErrorCode::MissingInput, "--source must be fixture:PATH or rpc:URL");
  }

  Ledger ledger;
  ScanOptions options;
  options.ledger_path = o.ledger;
  if (!o.checkpoint.empty()) options.checkpoint_path = o.checkpoint;
  options.width = o.width;
  options.max_blocks = o.max_blocks;
  auto progress = scan_range(*source, from, to, ledger, options);
  write_output(o.out, to_json(progress).dump(2) + "\n");
  if (o.verbose) std::cerr << "scan: blocks " << from << ".." << to << ", " << ledger.size() << " records in ledger\n";
  return kClean;
}

int cmd_detect(const Options& o) {
  Ledger ledger;
  load_ledger(ledger, o.ledger);
  auto comps = ledger.components(o.verbose);
  write_output(o.out, components_to_json(comps).dump(2) + "\n");
  std::size_t flagged = vulnerable_components(comps);
  std::cerr << "detect: " << ledger.size() << " records, " << flagged << " collision components\n";
  return flagged > 0 ? kVulnerable : kClean;
}

int cmd_recover(const Options& o) {
  Ledger ledger;
  load_ledger(ledger, o.ledger);
  auto run = recover_all(ledger, parse_hypothesis(o.hypothesis));
  write_output(o.out, recovery_to_json(run.secrets, o.reveal_secrets).dump(2) + "\n");
  std::size_t keys = 0;
  for (const auto& s : run.secrets) keys += s.kind == SecretKind::PrivateKey;
  for (const auto& note : run.notes) std::cerr << "recover: skipped " << note << "\n";
  std::cerr << "recover: " << keys << " private keys, " << run.secrets.size() - keys << " nonces"
            << (o.reveal_secrets ? "" : " (values redacted)") << "\n";
  return keys > 0 ? kVulnerable : kClean;
}

int cmd_report(const Options& o) {
  Ledger ledger;
  load_ledger(ledger, o.ledger);
  auto comps = ledger.components(o.verbose);
  nlohmann::json recovery = nlohmann::json::array();
  if (!o.recovery.empty()) recovery = read_json(o.recovery);
  write_output(o.out, summary(ledger.size(), components_to_json(comps), recovery));
  return vulnerable_components(comps) > 0 || !recovery.empty() ? kVulnerable : kClean;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Audit ECDSA signatures in transaction streams for nonce reuse and recover exposed keys"};
  app.require_subcommand(1);
  Options o;

  auto add_ledger = [&](CLI::App* cmd, bool required) {
    auto* opt = cmd->add_option("--ledger", o.ledger, "JSONL signature ledger");
    if (required) opt->required();
  };
  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--out", o.out, "output path (default: stdout)");
    cmd->add_flag("--verbose", o.verbose, "include benign signers and extra diagnostics");
  };

  auto* simulate_cmd = app.add_subcommand("simulate", "write a synthetic fixture with planted nonce failures");
  simulate_cmd->add_option("--seed", o.seed, "RNG seed")->required();
  simulate_cmd->add_option("--scenario", o.scenario, "built-in scenario name or scenario JSON file")->required();
  add_common(simulate_cmd);

  auto* scan_cmd = app.add_subcommand("scan", "read blocks from a fixture or JSON-RPC endpoint into a ledger");
  scan_cmd->add_option("--source", o.source, "fixture:PATH or rpc:URL")->required();
  scan_cmd->add_option("--from-block", o.from_block, "first block (inclusive)");
  scan_cmd->add_option("--to-block", o.to_block, "last block (inclusive)");
  add_ledger(scan_cmd, true);
  scan_cmd->add_option("--checkpoint", o.checkpoint, "checkpoint file for resumable scans");
  scan_cmd->add_option("--width", o.width, "blocks fetched ahead")->check(CLI::PositiveNumber);
  scan_cmd->add_option("--rate", o.rate, "RPC requests per second")->check(CLI::PositiveNumber);
  scan_cmd->add_option("--retries", o.retries, "RPC retries per request");
  scan_cmd->add_option("--timeout-ms", o.timeout_ms, "RPC request timeout");
  scan_cmd->add_option("--max-blocks", o.max_blocks, "stop after this many blocks");
  add_common(scan_cmd);

  auto* detect_cmd = app.add_subcommand("detect", "report collision components as JSON");
  add_ledger(detect_cmd, true);
  add_common(detect_cmd);

  auto* recover_cmd = app.add_subcommand("recover", "solve collision components for keys and nonces");
  add_ledger(recover_cmd, true);
  recover_cmd->add_option("--hypothesis", o.hypothesis, "affine nonce hypothesis: counter[:window] or constant[:window]");
  recover_cmd->add_flag("--reveal-secrets", o.reveal_secrets, "write full key and nonce values");
  add_common(recover_cmd);

  auto* report_cmd = app.add_subcommand("report", "human-readable audit summary");
  add_ledger(report_cmd, true);
  report_cmd->add_option("--recovery", o.recovery, "recovery JSON from the recover command");
  add_common(report_cmd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kClean : kFailure;
  }

  try {
    if (simulate_cmd->parsed()) return cmd_simulate(o);
    if (scan_cmd->parsed()) return cmd_scan(o);
    if (detect_cmd->parsed()) return cmd_detect(o);
    if (recover_cmd->parsed()) return cmd_recover(o);
    if (report_cmd->parsed()) return cmd_report(o);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFailure;
  }
  return kFailure;
}
