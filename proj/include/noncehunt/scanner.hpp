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

#include <atomic>
#include <chrono>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <fstream>
#include <functional>
#include <future>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "noncehunt/detector.hpp"
#include "noncehunt/transaction.hpp"

namespace noncehunt {

/// A transaction as delivered by a source: raw bytes, or the reason the source
/// could not produce them.
struct SourceTx {
  Bytes raw;
  std::string skip_reason;
};

struct BlockData {
  BlockMeta meta;
  std::vector<SourceTx> txs;
};

class BlockSource {
 public:
  virtual ~BlockSource() = default;
  virtual BlockData fetch_block(std::uint64_t number) = 0;
  /// Identifies the data behind this source; stored in checkpoints.
  virtual std::string fingerprint() const = 0;
  virtual std::uint64_t retries() const { return 0; }
};

/// JSONL lines of {raw_tx_hex, block, chain_id}; a line without raw_tx_hex
/// declares an empty block. Blocks between the lowest and highest listed
/// number are served (possibly empty); anything else is unavailable.
class FixtureSource final : public BlockSource {
 public:
  explicit FixtureSource(const std::filesystem::path& path) : path_(path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::FixtureMissing, "fixture not found: " + path.string());
    std::string line;
    std::size_t line_no = 0;
    std::string content;
    while (std::getline(in, line)) {
      ++line_no;
      content += line;
      content += '\n';
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      try {
        auto row = nlohmann::json::parse(line);
        std::uint64_t block = detail::read_quantity(row, "block");
        auto& data = blocks_[block];
        data.meta = {block, row.contains("chain_id") ? detail::read_quantity(row, "chain_id") : 0};
        if (row.contains("raw_tx_hex")) {
          auto raw = hex::decode(row.at("raw_tx_hex").get<std::string>());
          if (!raw) throw std::invalid_argument("raw_tx_hex is not hex");
          data.txs.push_back({std::move(*raw), {}});
        }
      } catch (const std::exception& ex) {
        throw Error(ErrorCode::FixtureMissing, path.string() + ":" + std::to_string(line_no) + ": " + ex.what());
      }
    }
    fingerprint_ = "fixture:" + hex::encode(sha256(ByteView(reinterpret_cast<const std::uint8_t*>(content.data()), content.size())), false).substr(0, 16);
  }

  BlockData fetch_block(std::uint64_t number) override {
    if (blocks_.empty() || number < blocks_.begin()->first || number > blocks_.rbegin()->first) {
      throw Error(ErrorCode::BlockUnavailable, "block " + std::to_string(number) + " outside fixture range");
    }
    auto it = blocks_.find(number);
    if (it != blocks_.end()) return it->second;
    return {{number, blocks_.begin()->second.meta.chain_id}, {}};
  }

  std::string fingerprint() const override { return fingerprint_; }

  std::optional<std::pair<std::uint64_t, std::uint64_t>> range() const {
    if (blocks_.empty()) return std::nullopt;
    return std::make_pair(blocks_.begin()->first, blocks_.rbegin()->first);
  }

 private:
  std::filesystem::path path_;
  std::map<std::uint64_t, BlockData> blocks_;
  std::string fingerprint_;
};

/// Spaces calls at least 1/rate apart.
class RateLimiter {
 public:
  explicit RateLimiter(double per_second) {
    if (!(per_second > 0)) throw std::invalid_argument("rate limit must be positive");
    interval_ = std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(1.0 / per_second));
  }

  void acquire() {
    Clock::time_point slot;
    {
      std::lock_guard lock(mu_);
      auto now = Clock::now();
      slot = std::max(now, next_);
      next_ = slot + interval_;
    }
    std::this_thread::sleep_until(slot);
  }

 private:
  using Clock = std::chrono::steady_clock;
  std::mutex mu_;
  Clock::duration interval_{};
  Clock::time_point next_{};
};

struct RpcConfig {
  std::string url;
  std::chrono::milliseconds timeout{10000};
  unsigned max_retries = 4;
  double rate_limit = 10.0;  // requests per second
  std::chrono::milliseconds backoff{250};  // doubled after each failure
};

/// Sends one JSON-RPC request body and returns the response body; throws on
/// transport failure.
using RpcTransport = std::function<std::string(const std::string& body)>;

inline RpcTransport http_transport(const RpcConfig& config) {
  // split "scheme://host[:port]/path" for httplib
  std::string url = config.url;
  auto scheme_end = url.find("://");
  auto path_start = url.find('/', scheme_end == std::string::npos ? 0 : scheme_end + 3);
  std::string base = path_start == std::string::npos ? url : url.substr(0, path_start);
  std::string path = path_start == std::string::npos ? "/" : url.substr(path_start);
  auto timeout = config.timeout;
  return [base, path, timeout](const std::string& body) {
    httplib::Client client(base);
    client.set_connection_timeout(timeout);
    client.set_read_timeout(timeout);
    client.set_write_timeout(timeout);
    auto res = client.Post(path, body, "application/json");
    if (!res) throw Error(ErrorCode::RpcError, "transport: " + httplib::to_string(res.error()));
    if (res->status != 200) throw Error(ErrorCode::RpcError, "HTTP " + std::to_string(res->status));
    return res->body;
  };
}

namespace detail {

inline U256 rpc_uint(const nlohmann::json& tx, const char* field) {
  if (!tx.contains(field) || tx.at(field).is_null()) return U256(0);
  auto v = U256::from_hex(tx.at(field).get<std::string>());
  if (!v) throw Error(ErrorCode::RpcError, std::string("bad quantity in ") + field);
  return *v;
}

inline Bytes rpc_bytes(const nlohmann::json& tx, const char* field) {
  if (!tx.contains(field) || tx.at(field).is_null()) return {};
  auto v = hex::decode(tx.at(field).get<std::string>());
  if (!v) throw Error(ErrorCode::RpcError, std::string("bad hex in ") + field);
  return *v;
}

}  // namespace detail

/// Rebuilds a signed transaction from a JSON-RPC transaction object.
inline RawTransaction transaction_from_rpc(const nlohmann::json& obj) {
  RawTransaction tx;
  U256 type = detail::rpc_uint(obj, "type");
  if (type > U256(2)) throw Error(ErrorCode::UnknownTxType, "type " + type.to_quantity_hex());
  tx.type = static_cast<TxType>(type.low64());
  tx.nonce = detail::rpc_uint(obj, "nonce").low64();
  tx.gas_limit = detail::rpc_uint(obj, "gas").low64();
  tx.gas_price = detail::rpc_uint(obj, "gasPrice");
  if (tx.type == TxType::DynamicFee) {
    tx.gas_price = U256(0);
    tx.max_priority_fee_per_gas = detail::rpc_uint(obj, "maxPriorityFeePerGas");
    tx.max_fee_per_gas = detail::rpc_uint(obj, "maxFeePerGas");
  }
  if (obj.contains("to") && !obj.at("to").is_null()) {
    auto to = hex::decode_fixed<20>(obj.at("to").get<std::string>());
    if (!to) throw Error(ErrorCode::RpcError, "bad to address");
    tx.to = *to;
  }
  tx.value = detail::rpc_uint(obj, "value");
  tx.data = detail::rpc_bytes(obj, "input");
  if (obj.contains("accessList")) {
    for (const auto& entry : obj.at("accessList")) {
      AccessListEntry e;
      auto addr = hex::decode_fixed<20>(entry.at("address").get<std::string>());
      if (!addr) throw Error(ErrorCode::RpcError, "bad access list address");
      e.address = *addr;
      for (const auto& key : entry.at("storageKeys")) {
        auto k = hex::decode_fixed<32>(key.get<std::string>());
        if (!k) throw Error(ErrorCode::RpcError, "bad storage key");
        e.storage_keys.push_back(*k);
      }
      tx.access_list.push_back(std::move(e));
    }
  }
  tx.v = detail::rpc_uint(obj, "v");
  tx.r = detail::rpc_uint(obj, "r");
  tx.s = detail::rpc_uint(obj, "s");
  if (tx.type == TxType::Legacy) {
    std::uint64_t v = tx.v.low64();
    if (v >= 35) tx.chain_id = (v - 35) / 2;
  } else {
    tx.chain_id = detail::rpc_uint(obj, "chainId").low64();
    if (obj.contains("yParity")) tx.v = detail::rpc_uint(obj, "yParity");
  }
  return tx;
}

/// eth_getBlockByNumber with full transaction objects. Each transaction is
/// re-serialized from its fields and checked against the reported hash.
class RpcSource final : public BlockSource {
 public:
  explicit RpcSource(RpcConfig config, RpcTransport transport = {})
      : config_(std::move(config)), limiter_(config_.rate_limit),
        transport_(transport ? std::move(transport) : http_transport(config_)) {}

  BlockData fetch_block(std::uint64_t number) override {
    nlohmann::json result = call("eth_getBlockByNumber", {U256(number).to_quantity_hex(), true});
    if (result.is_null()) throw Error(ErrorCode::BlockUnavailable, "block " + std::to_string(number) + " not found");
    BlockData data;
    data.meta.number = number;
    for (const auto& obj : result.value("transactions", nlohmann::json::array())) {
      if (!obj.is_object()) {
        data.txs.push_back({{}, "NoTransactionObject"});
        continue;
      }
      try {
        RawTransaction tx = transaction_from_rpc(obj);
        if (data.meta.chain_id == 0 && tx.chain_id) data.meta.chain_id = *tx.chain_id;
        Bytes raw = serialize(tx);
        auto reported = hex::decode_fixed<32>(obj.value("hash", std::string()));
        if (reported && *reported != keccak256(raw)) {
          data.txs.push_back({{}, "HashMismatch"});
          continue;
        }
        data.txs.push_back({std::move(raw), {}});
      } catch (const Error& err) {
        data.txs.push_back({{}, std::string(to_string(err.code()))});
      }
    }
    return data;
  }

  std::string fingerprint() const override { return "rpc:" + config_.url; }
  std::uint64_t retries() const override { return retries_.load(); }
  std::uint64_t requests() const { return requests_.load(); }

 private:
  nlohmann::json call(const std::string& method, nlohmann::json params) {
    nlohmann::json request = {{"jsonrpc", "2.0"}, {"id", next_id_++}, {"method", method}, {"params", std::move(params)}};
    std::string body = request.dump();
    int last_code = 0;
    std::string last_error;
    for (unsigned attempt = 0;; ++attempt) {
      limiter_.acquire();
      ++requests_;
      try {
        auto response = nlohmann::json::parse(transport_(body));
        if (!response.contains("error")) return response.value("result", nlohmann::json());
        last_code = response["error"].value("code", 0);
        last_error = response["error"].value("message", std::string("unknown"));
      } catch (const std::exception& ex) {
        last_error = ex.what();
      }
      if (attempt >= config_.max_retries) break;
      ++retries_;
      std::this_thread::sleep_for(config_.backoff * (1u << std::min(attempt, 10u)));
    }
    throw Error(ErrorCode::RpcError,
                method + " failed after " + std::to_string(config_.max_retries + 1) + " attempts (code " +
                    std::to_string(last_code) + "): " + last_error);
  }

  RpcConfig config_;
  RateLimiter limiter_;
  RpcTransport transport_;
  std::atomic<std::uint64_t> next_id_{1};
  std::atomic<std::uint64_t> retries_{0};
  std::atomic<std::uint64_t> requests_{0};
};

struct ScanOptions {
  std::optional<std::filesystem::path> ledger_path;      // appended per block
  std::optional<std::filesystem::path> checkpoint_path;  // resume point
  std::size_t width = 4;                                 // blocks fetched ahead
  std::optional<std::uint64_t> max_blocks;               // stop early, as if interrupted
};

struct ScanProgress {
  std::uint64_t blocks_scanned = 0;
  std::uint64_t txs_parsed = 0;
  std::map<std::string, std::uint64_t> skipped;  // by reason
  std::uint64_t records_emitted = 0;
  std::uint64_t r_collisions = 0;
  std::uint64_t retries = 0;
  std::optional<std::uint64_t> resumed_from;
  bool complete = false;

  std::uint64_t skipped_total() const {
    std::uint64_t n = 0;
    for (const auto& [reason, count] : skipped) n += count;
    return n;
  }
  std::uint64_t txs_seen() const { return txs_parsed + skipped_total(); }
};

inline nlohmann::json to_json(const ScanProgress& p) {
  nlohmann::json j = {{"blocks_scanned", p.blocks_scanned},   {"txs_parsed", p.txs_parsed},
                      {"txs_skipped", p.skipped},             {"records_emitted", p.records_emitted},
                      {"r_collisions", p.r_collisions},       {"retries", p.retries},
                      {"complete", p.complete}};
  if (p.resumed_from) j["resumed_from"] = *p.resumed_from;
  return j;
}

struct Checkpoint {
  std::uint64_t last_block = 0;
  std::string ledger_path;
  std::string source_fingerprint;
};

inline std::optional<Checkpoint> read_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) return std::nullopt;
  try {
    auto j = nlohmann::json::parse(in);
    return Checkpoint{j.at("last_block").get<std::uint64_t>(), j.at("ledger_path").get<std::string>(),
                      j.at("source_fingerprint").get<std::string>()};
  } catch (const nlohmann::json::exception&) {
    return std::nullopt;
  }
}

inline void write_checkpoint(const std::filesystem::path& path, const Checkpoint& cp) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    out << nlohmann::json{{"last_block", cp.last_block}, {"ledger_path", cp.ledger_path},
                          {"source_fingerprint", cp.source_fingerprint}}
               .dump()
        << '\n';
  }
  std::filesystem::rename(tmp, path);
}

/// Converts every parseable transaction in [from, to] into a record and
/// ingests it, block by block in order. Fetches run ahead up to options.width.
/// With a checkpoint whose source and ledger match, the scan resumes after the
/// last completed block, reloading the ledger file first.
inline ScanProgress scan_range(BlockSource& source, std::uint64_t from, std::uint64_t to, Ledger& ledger,
                               const ScanOptions& options = {}) {
  if (from > to) throw Error(ErrorCode::PreconditionViolated, "from_block > to_block");
  ScanProgress progress;
  const std::string ledger_name = options.ledger_path ? options.ledger_path->string() : std::string();
  const std::uint64_t retries_before = source.retries();

  std::uint64_t start = from;
  bool resumed = false;
  if (options.checkpoint_path) {
    auto cp = read_checkpoint(*options.checkpoint_path);
    if (cp && cp->source_fingerprint == source.fingerprint() && cp->ledger_path == ledger_name &&
        cp->last_block >= from && cp->last_block <= to) {
      start = cp->last_block + 1;
      progress.resumed_from = start;
      resumed = true;
      if (options.ledger_path && std::filesystem::exists(*options.ledger_path)) ledger.load_jsonl(*options.ledger_path);
    }
  }

  std::ofstream ledger_out;
  if (options.ledger_path) {
    ledger_out.open(*options.ledger_path, resumed ? std::ios::app : std::ios::trunc);
    if (!ledger_out) throw Error(ErrorCode::MissingInput, "cannot write ledger " + ledger_name);
  }

  std::uint64_t count = start > to ? 0 : to - start + 1;
  if (options.max_blocks) count = std::min(count, *options.max_blocks);
  const std::uint64_t stop = start + count;

  std::deque<std::future<BlockData>> inflight;
  std::uint64_t next_fetch = start;
  const std::size_t width = std::max<std::size_t>(1, options.width);
  auto refill = [&] {
    while (inflight.size() < width && next_fetch < stop) {
      std::uint64_t n = next_fetch++;
      inflight.push_back(std::async(std::launch::async, [&source, n] { return source.fetch_block(n); }));
    }
  };

  for (std::uint64_t block = start; block < stop; ++block) {
    refill();
    BlockData data = inflight.front().get();
    inflight.pop_front();
    for (const auto& entry : data.txs) {
      if (!entry.skip_reason.empty()) {
        ++progress.skipped[entry.skip_reason];
        continue;
      }
      try {
        RawTransaction tx = parse_transaction(entry.raw);
        SignatureRecord rec = to_record(tx, data.meta);
        ++progress.txs_parsed;
        if (ledger.ingest(rec)) {
          ++progress.records_emitted;
          if (ledger_out.is_open()) ledger_out << record_to_json(rec).dump() << '\n';
        }
      } catch (const Error& err) {
        ++progress.skipped[std::string(to_string(err.code()))];
      }
    }
    ++progress.blocks_scanned;
    if (ledger_out.is_open()) ledger_out.flush();
    if (options.checkpoint_path) write_checkpoint(*options.checkpoint_path, {block, ledger_name, source.fingerprint()});
  }

  progress.complete = stop > to;
  progress.r_collisions = ledger.collided_r_count();
  progress.retries = source.retries() - retries_before;
  return progress;
}

}  // namespace noncehunt
