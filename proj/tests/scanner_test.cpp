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

#include <gtest/gtest.h>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>
#include <vector>

#include "noncehunt/scanner.hpp"
#include "noncehunt/simulate.hpp"
#include "test_support.hpp"

namespace noncehunt {
namespace {

namespace fs = std::filesystem;

fs::path temp_path(const std::string& name) { return fs::temp_directory_path() / ("noncehunt_scan_" + name); }

fs::path write_fixture(const std::string& name, const std::string& content) {
  auto path = temp_path(name);
  std::ofstream(path, std::ios::trunc) << content;
  return path;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

template <typename F>
void expect_error(ErrorCode code, F&& f) {
  try {
    f();
    ADD_FAILURE() << "expected " << to_string(code);
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), code) << e.what();
  }
}

/// JSON-RPC transaction object for a signed transaction, as a node reports it.
nlohmann::json rpc_object(const RawTransaction& tx) {
  nlohmann::json j = {{"hash", to_hex(tx_hash(tx))},
                      {"type", U256(static_cast<std::uint64_t>(tx.type)).to_quantity_hex()},
                      {"nonce", U256(tx.nonce).to_quantity_hex()},
                      {"gas", U256(tx.gas_limit).to_quantity_hex()},
                      {"to", tx.to ? nlohmann::json(to_hex(*tx.to)) : nlohmann::json(nullptr)},
                      {"value", tx.value.to_quantity_hex()},
                      {"input", hex::encode(tx.data)},
                      {"v", tx.v.to_quantity_hex()},
                      {"r", tx.r.to_quantity_hex()},
                      {"s", tx.s.to_quantity_hex()}};
  if (tx.type == TxType::DynamicFee) {
    j["maxPriorityFeePerGas"] = tx.max_priority_fee_per_gas.to_quantity_hex();
    j["maxFeePerGas"] = tx.max_fee_per_gas.to_quantity_hex();
    j["gasPrice"] = tx.max_fee_per_gas.to_quantity_hex();
  } else {
    j["gasPrice"] = tx.gas_price.to_quantity_hex();
  }
  if (tx.type != TxType::Legacy) {
    j["chainId"] = U256(*tx.chain_id).to_quantity_hex();
    j["yParity"] = tx.v.to_quantity_hex();
    nlohmann::json list = nlohmann::json::array();
    for (const auto& e : tx.access_list) {
      nlohmann::json keys = nlohmann::json::array();
      for (const auto& k : e.storage_keys) keys.push_back(to_hex(k));
      list.push_back({{"address", to_hex(e.address)}, {"storageKeys", keys}});
    }
    j["accessList"] = list;
  }
  return j;
}

/// Serves eth_getBlockByNumber from a simulation.
struct FakeNode {
  std::map<std::uint64_t, std::vector<RawTransaction>> blocks;

  explicit FakeNode(const Simulation& sim) {
    for (const auto& ftx : sim.txs) blocks[ftx.block].push_back(parse_transaction(ftx.raw));
    for (std::uint64_t b = sim.scenario.start_block; b < sim.scenario.start_block + sim.scenario.blocks; ++b) blocks[b];
  }

  std::string handle(const std::string& body) const {
    auto req = nlohmann::json::parse(body);
    nlohmann::json resp = {{"jsonrpc", "2.0"}, {"id", req.at("id")}};
    auto number = U256::from_hex(req.at("params")[0].get<std::string>())->low64();
    auto it = blocks.find(number);
    if (it == blocks.end()) {
      resp["result"] = nullptr;
    } else {
      nlohmann::json txs = nlohmann::json::array();
      for (const auto& tx : it->second) txs.push_back(rpc_object(tx));
      resp["result"] = {{"number", U256(number).to_quantity_hex()}, {"transactions", txs}};
    }
    return resp.dump();
  }
};

Scenario three_reuses() {
  Scenario s;
  s.name = "three-reuses";
  s.blocks = 10;
  s.start_block = 100;
  s.wallets = {{"a", WalletPolicy::Constant, 2}, {"b", WalletPolicy::Constant, 2}, {"c", WalletPolicy::Constant, 2}};
  s.benign_wallets = 10;
  return s;
}

TEST(FixtureSource, ServesBlocksInRange) {
  std::mt19937_64 rng(1);
  auto key = testing::random_key(rng);
  std::string content;
  std::vector<Bytes> raws;
  for (int i = 0; i < 2; ++i) {
    auto tx = synth::random_transaction(rng, TxType::DynamicFee);
    sign_transaction(tx, key, random_nonzero(rng));
    raws.push_back(serialize(tx));
    content += nlohmann::json{{"raw_tx_hex", hex::encode(raws.back())}, {"block", 7}, {"chain_id", 137}}.dump() + "\n";
  }
  content += R"({"block": 9, "chain_id": 137})" "\n";
  FixtureSource source(write_fixture("one_block.jsonl", content));
  auto block = source.fetch_block(7);
  ASSERT_EQ(block.txs.size(), 2u);
  EXPECT_EQ(block.txs[0].raw, raws[0]);
  EXPECT_EQ(block.txs[1].raw, raws[1]);
  EXPECT_EQ(block.meta.chain_id, 137u);
  EXPECT_TRUE(source.fetch_block(8).txs.empty());
  EXPECT_TRUE(source.fetch_block(9).txs.empty());
  expect_error(ErrorCode::BlockUnavailable, [&] { source.fetch_block(10); });
  expect_error(ErrorCode::BlockUnavailable, [&] { source.fetch_block(6); });
  expect_error(ErrorCode::FixtureMissing, [&] { FixtureSource(temp_path("does_not_exist.jsonl")); });
}

TEST(ScanRange, CountsPlantedReuses) {
  auto sim = simulate(three_reuses(), 1);
  FixtureSource source(write_fixture("three.jsonl", sim.fixture_jsonl()));
  Ledger ledger;
  auto progress = scan_range(source, 100, 109, ledger);
  EXPECT_EQ(progress.r_collisions, 3u);
  EXPECT_EQ(progress.blocks_scanned, 10u);
  EXPECT_EQ(progress.txs_parsed, sim.txs.size());
  EXPECT_EQ(progress.records_emitted, sim.txs.size());
  EXPECT_EQ(progress.skipped_total(), 0u);
  EXPECT_TRUE(progress.complete);
  EXPECT_EQ(ledger.components().size(), 3u);

  // a second pass over the same data adds nothing
  auto again = scan_range(source, 100, 109, ledger);
  EXPECT_EQ(again.records_emitted, 0u);
  EXPECT_EQ(ledger.size(), sim.txs.size());
}

TEST(ScanRange, EmptyBlockGivesNoRecords) {
  FixtureSource source(write_fixture("empty.jsonl", R"({"block": 5, "chain_id": 137})" "\n"));
  Ledger ledger;
  auto progress = scan_range(source, 5, 5, ledger);
  EXPECT_EQ(progress.blocks_scanned, 1u);
  EXPECT_EQ(progress.records_emitted, 0u);
  EXPECT_EQ(ledger.size(), 0u);
  expect_error(ErrorCode::PreconditionViolated, [&] { scan_range(source, 6, 5, ledger); });
}

TEST(ScanRange, UnparseableTransactionsAreSkipped) {
  auto sim = simulate(builtin_scenario("c3-pair").value(), 2);
  std::string content = sim.fixture_jsonl();
  auto first_block = sim.txs.front().block;
  content += nlohmann::json{{"raw_tx_hex", "0x03c0"}, {"block", first_block}}.dump() + "\n";
  content += nlohmann::json{{"raw_tx_hex", "0xf8"}, {"block", first_block}}.dump() + "\n";
  FixtureSource source(write_fixture("garbage.jsonl", content));
  Ledger ledger;
  auto progress = scan_range(source, 1, 10, ledger);
  EXPECT_EQ(progress.txs_parsed, 4u);
  EXPECT_EQ(progress.skipped_total(), 2u);
  EXPECT_EQ(progress.skipped["UnknownTxType"], 1u);
  EXPECT_EQ(progress.skipped["Truncated"], 1u);
  EXPECT_EQ(progress.txs_seen(), 6u);
  EXPECT_EQ(ledger.size(), 4u);
}

TEST(ScanRange, ResumeMatchesUninterruptedRun) {
  auto sim = simulate(builtin_scenario("polygon-mix").value(), 3);
  FixtureSource source(write_fixture("mix.jsonl", sim.fixture_jsonl()));
  const std::uint64_t from = 1, to = 100;

  auto full_ledger = temp_path("full.jsonl");
  {
    Ledger ledger;
    scan_range(source, from, to, ledger, {full_ledger, std::nullopt, 4, std::nullopt});
  }

  auto part_ledger = temp_path("part.jsonl"), checkpoint = temp_path("part.ckpt");
  fs::remove(checkpoint);
  {
    Ledger ledger;
    auto first = scan_range(source, from, to, ledger, {part_ledger, checkpoint, 4, 5});
    EXPECT_FALSE(first.complete);
    EXPECT_EQ(first.blocks_scanned, 5u);
    auto cp = read_checkpoint(checkpoint);
    ASSERT_TRUE(cp.has_value());
    EXPECT_EQ(cp->last_block, 5u);
  }
  {
    Ledger ledger;  // fresh process: state comes back from the files
    auto second = scan_range(source, from, to, ledger, {part_ledger, checkpoint, 4, std::nullopt});
    EXPECT_TRUE(second.complete);
    EXPECT_EQ(second.resumed_from, std::optional<std::uint64_t>(6));
    EXPECT_EQ(second.blocks_scanned, 95u);
    EXPECT_EQ(ledger.size(), sim.txs.size());
  }
  EXPECT_EQ(read_file(part_ledger), read_file(full_ledger));
}

TEST(RpcSource, RetriesThenSucceeds) {
  auto sim = simulate(builtin_scenario("c3-pair").value(), 4);
  FakeNode node(sim);
  int failures_left = 2;
  std::mutex mu;
  RpcConfig config{"http://mock", std::chrono::milliseconds(100), 3, 1000.0, std::chrono::milliseconds(1)};
  RpcSource source(config, [&](const std::string& body) -> std::string {
    std::lock_guard lock(mu);
    if (failures_left-- > 0) throw Error(ErrorCode::RpcError, "connection reset");
    return node.handle(body);
  });
  Ledger ledger;
  auto progress = scan_range(source, 1, 10, ledger, {std::nullopt, std::nullopt, 1, std::nullopt});
  EXPECT_EQ(progress.retries, 2u);
  EXPECT_EQ(progress.records_emitted, 4u);
  EXPECT_EQ(progress.txs_parsed, 4u);
  EXPECT_EQ(progress.r_collisions, 2u);
  EXPECT_EQ(source.requests(), 12u);

  // the RPC path yields the same records as the raw fixture path
  FixtureSource fixture(write_fixture("rpc_cmp.jsonl", sim.fixture_jsonl()));
  Ledger from_fixture;
  scan_range(fixture, 1, 10, from_fixture);
  auto a = ledger.records(), b = from_fixture.records();
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i].source.tx_hash, b[i].source.tx_hash);
}

TEST(RpcSource, GivesUpAfterMaxRetries) {
  RpcConfig config{"http://mock", std::chrono::milliseconds(100), 2, 1000.0, std::chrono::milliseconds(1)};
  int calls = 0;
  RpcSource source(config, [&](const std::string&) -> std::string {
    ++calls;
    return R"({"jsonrpc":"2.0","id":1,"error":{"code":-32005,"message":"limit exceeded"}})";
  });
  expect_error(ErrorCode::RpcError, [&] { source.fetch_block(1); });
  EXPECT_EQ(calls, 3);
  EXPECT_EQ(source.retries(), 2u);

  RpcSource missing(config, [](const std::string&) { return std::string(R"({"jsonrpc":"2.0","id":1,"result":null})"); });
  expect_error(ErrorCode::BlockUnavailable, [&] { missing.fetch_block(1); });
}

TEST(RpcSource, UnsupportedAndTamperedTransactionsAreSkipped) {
  auto sim = simulate(builtin_scenario("c3-pair").value(), 5);
  FakeNode node(sim);
  RpcConfig config{"http://mock", std::chrono::milliseconds(100), 0, 1000.0, std::chrono::milliseconds(1)};
  RpcSource source(config, [&](const std::string& body) {
    auto resp = nlohmann::json::parse(node.handle(body));
    if (!resp["result"].is_null() && !resp["result"]["transactions"].empty()) {
      auto& txs = resp["result"]["transactions"];
      auto blob = txs[0];
      blob["type"] = "0x3";
      txs.push_back(blob);
      auto tampered = txs[0];
      tampered["value"] = "0x1";
      txs.push_back(tampered);
    }
    return resp.dump();
  });
  Ledger ledger;
  auto progress = scan_range(source, 1, 10, ledger);
  EXPECT_EQ(progress.txs_parsed, 4u);
  EXPECT_GE(progress.skipped["UnknownTxType"], 1u);
  EXPECT_GE(progress.skipped["HashMismatch"], 1u);
  EXPECT_EQ(progress.txs_seen(), progress.txs_parsed + progress.skipped_total());
}

TEST(RateLimiter, NeverExceedsConfiguredRate) {
  const double rate = 40.0;
  RpcConfig config{"http://mock", std::chrono::milliseconds(100), 0, rate, std::chrono::milliseconds(1)};
  std::mutex mu;
  std::vector<std::chrono::steady_clock::time_point> stamps;
  RpcSource source(config, [&](const std::string&) {
    std::lock_guard lock(mu);
    stamps.push_back(std::chrono::steady_clock::now());
    return std::string(R"({"jsonrpc":"2.0","id":1,"result":{"transactions":[]}})");
  });
  std::vector<std::thread> workers;
  for (int t = 0; t < 4; ++t) {
    workers.emplace_back([&, t] {
      for (int i = 0; i < 20; ++i) source.fetch_block(static_cast<std::uint64_t>(t * 100 + i));
    });
  }
  for (auto& w : workers) w.join();
  ASSERT_EQ(stamps.size(), 80u);
  std::sort(stamps.begin(), stamps.end());
  for (std::size_t i = 0; i < stamps.size(); ++i) {
    auto window_end = stamps[i] + std::chrono::seconds(1);
    auto in_window = std::lower_bound(stamps.begin(), stamps.end(), window_end) - (stamps.begin() + static_cast<long>(i));
    EXPECT_LE(in_window, static_cast<long>(rate) + 1);
  }
  EXPECT_THROW(RateLimiter(0.0), std::invalid_argument);
}

TEST(RpcSource, TalksToHttpEndpoint) {
  auto sim = simulate(builtin_scenario("c1-constant").value(), 6);
  FakeNode node(sim);
  httplib::Server server;
  std::atomic<int> hits{0};
  server.Post("/rpc", [&](const httplib::Request& req, httplib::Response& res) {
    ++hits;
    res.set_content(node.handle(req.body), "application/json");
  });
  int port = server.bind_to_any_port("127.0.0.1");
  ASSERT_GT(port, 0);
  std::thread serving([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  RpcConfig config{"http://127.0.0.1:" + std::to_string(port) + "/rpc", std::chrono::milliseconds(2000), 2, 500.0,
                   std::chrono::milliseconds(5)};
  RpcSource source(config);
  Ledger ledger;
  auto progress = scan_range(source, 1, 10, ledger);
  server.stop();
  serving.join();
  EXPECT_EQ(progress.records_emitted, sim.txs.size());
  EXPECT_EQ(progress.r_collisions, 1u);
  EXPECT_EQ(hits.load(), 10);
}

}  // namespace
}  // namespace noncehunt
