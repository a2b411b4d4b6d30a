// Copyright 2026 The DFP Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// dfpctl: run a system config, benchmark the bus, query an env store.
//
// Exit codes: 0 success, 1 runtime fault, 2 invalid input.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "CLI11.hpp"

#include "dfp/ctl/bench.hpp"
#include "dfp/ctl/config.hpp"
#include "dfp/ctl/runner.hpp"
#include "dfp/envmodel/store.hpp"

namespace fs = std::filesystem;

namespace
{

constexpr int kOk = 0;
constexpr int kFault = 1;
constexpr int kInvalid = 2;

void setup_logging()
{
  auto logger = spdlog::stderr_color_st("dfpctl");
  logger->set_pattern("[%l] %v");
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::info);
  if (const char * lvl = std::getenv("DFP_LOG")) {
    const std::string v = lvl;
    if (v == "error") {
      spdlog::set_level(spdlog::level::err);
    } else if (v == "debug") {
      spdlog::set_level(spdlog::level::debug);
    } else if (v != "info") {
      spdlog::warn("DFP_LOG='{}' not one of error, info, debug; using info", v);
    }
  }
}

bool write_file(const fs::path & path, const std::string & text)
{
  std::ofstream out(path, std::ios::binary);
  out << text;
  return static_cast<bool>(out);
}

// report.json -> report.<what>.jsonl
fs::path sibling(const fs::path & out, const std::string & what)
{
  fs::path p = out;
  p.replace_extension();
  p += "." + what + ".jsonl";
  return p;
}

int cmd_run(const std::string & config_path, std::optional<double> duration, std::optional<std::uint64_t> seed,
  const std::string & out_path)
{
  dfp::ctl::SystemConfig cfg;
  try {
    cfg = dfp::ctl::load_config(config_path);
  } catch (const dfp::ctl::ConfigError & e) {
    spdlog::error("{} [{}]", e.what(), e.kind());
    return kInvalid;
  }
  if (duration && !(*duration >= 0.0)) {
    spdlog::error("--duration must be non-negative");
    return kInvalid;
  }
  spdlog::info("config {} valid: {} devices, {} nodes, {} FSMs", config_path, cfg.devices.size(),
    cfg.pipeline.nodes.size(), cfg.fsms.size());

  const auto outcome = dfp::ctl::run_system(cfg, {duration, seed});
  const std::string report = dfp::ctl::report_text(outcome.report);
  if (!out_path.empty()) {
    const fs::path out(out_path);
    bool ok = write_file(out, report);
    ok = write_file(sibling(out, "rounds"), outcome.firing_reports) && ok;
    ok = write_file(sibling(out, "fsm"), outcome.fsm_trace) && ok;
    ok = write_file(sibling(out, "env"), outcome.env_records) && ok;
    if (!outcome.trajectory.empty()) {
      ok = write_file(sibling(out, "trajectory"), outcome.trajectory) && ok;
    }
    if (!ok) {
      spdlog::error("cannot write report to {}", out_path);
      return kFault;
    }
    spdlog::debug("report written to {}", out_path);
  }

  const auto & r = outcome.report;
  std::cout << "status " << outcome.status << ", " << r.at("rounds").get<std::uint64_t>() << " rounds, seed "
            << r.at("seed").get<std::uint64_t>() << "\n";
  if (!r.at("acc").is_null()) {
    std::cout << "acc: min gap " << r.at("acc").at("min_gap_m").get<double>() << " m, final gap error "
              << r.at("acc").at("final_gap_error_m").get<double>() << " m\n";
  }
  std::cout << "fsm trace entries: " << r.at("fsm").at("trace_length").get<std::uint64_t>() << ", env records: "
            << r.at("env").at("records").get<std::uint64_t>() << "\n";
  if (outcome.exit_code() != 0) {
    spdlog::error("run stopped: {}", outcome.message);
  }
  return outcome.exit_code();
}

int cmd_bench(const std::vector<std::string> & size_args, std::size_t samples)
{
  std::vector<std::size_t> sizes;
  try {
    for (const auto & s : size_args) {
      sizes.push_back(dfp::ctl::parse_size(s));
    }
    const auto rows = dfp::ctl::run_bench(sizes, samples);
    std::cout << dfp::ctl::format_table(rows);
    spdlog::debug("{}", dfp::ctl::to_json(rows).dump());
  } catch (const std::invalid_argument & e) {
    spdlog::error("{}", e.what());
    return kInvalid;
  } catch (const dfp::middleware::MwError & e) {
    spdlog::error("{}", e.what());
    return e.code() == dfp::middleware::MwErrc::PayloadTooLarge ? kInvalid : kFault;
  }
  return kOk;
}

int cmd_query(const std::string & store_path, const std::vector<std::string> & token_args, const std::string & cls)
{
  std::error_code ec;
  if (!fs::is_regular_file(store_path, ec) || !std::ifstream(store_path)) {
    spdlog::error("store not readable: {}", store_path);
    return kInvalid;
  }
  dfp::envmodel::OddQuery q;
  for (const auto & arg : token_args) {
    std::istringstream words(arg);
    std::string w;
    while (words >> w) {
      q.tokens.push_back(w);
    }
  }
  try {
    if (!cls.empty()) {
      q.class_filter = dfp::envmodel::parse_record_class(cls);
    }
    const dfp::envmodel::EnvStore store{fs::path(store_path)};
    for (const auto & r : store.query(q)) {
      std::cout << dfp::envmodel::to_json(r).dump() << "\n";
    }
  } catch (const dfp::envmodel::EnvError & e) {
    spdlog::error("{}", e.what());
    switch (e.code()) {
      case dfp::envmodel::EnvErrc::EmptyQuery:
      case dfp::envmodel::EnvErrc::InvalidQuery:
        return kFault;
      default:
        return kInvalid;
    }
  }
  return kOk;
}

}  // namespace

int main(int argc, char ** argv)
{
  setup_logging();
  CLI::App app{"dfpctl: run, benchmark and inspect the platform"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<double> duration;
  std::optional<std::uint64_t> seed;
  std::string out_path;
  auto * run = app.add_subcommand("run", "Validate a system config and run it");
  run->add_option("--config", config_path, "System config JSON")->required();
  run->add_option("--duration", duration, "Simulated seconds");
  run->add_option("--seed", seed, "Run seed, overrides the config");
  run->add_option("--out", out_path, "MetricsReport path; JSON-lines traces are written next to it");

  std::vector<std::string> sizes{"1KiB", "64KiB", "1MiB", "4MiB"};
  std::size_t samples = 10000;
  auto * bench = app.add_subcommand("bench", "Publish-to-take latency, zero-copy vs copying");
  bench->add_option("--sizes", sizes, "Payload sizes, e.g. 1KiB,4MiB")->delimiter(',');
  bench->add_option("--samples", samples, "Samples per size and path");

  std::string store_path;
  std::vector<std::string> tokens;
  std::string cls;
  auto * query = app.add_subcommand("query-env", "Fuzzy query over an env record log");
  query->add_option("--store", store_path, "Record log (JSON lines)")->required();
  query->add_option("--tokens", tokens, "Query tokens")->required();
  query->add_option("--class", cls, "Record class filter");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError & e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kInvalid;
  }

  try {
    if (*run) {
      return cmd_run(config_path, duration, seed, out_path);
    }
    if (*bench) {
      return cmd_bench(sizes, samples);
    }
    return cmd_query(store_path, tokens, cls);
  } catch (const std::exception & e) {
    spdlog::error("{}", e.what());
    return kFault;
  }
}
