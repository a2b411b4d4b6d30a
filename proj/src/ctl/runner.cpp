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

#include "dfp/ctl/runner.hpp"

#include <cmath>
#include <cstdio>
#include <memory>

#include "dfp/platform/platform.hpp"

namespace dfp::ctl
{

using nlohmann::json;

namespace
{

std::string hex64(std::uint64_t v)
{
  char buf[19];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

json metrics(const platform::Platform & p)
{
  json topics = json::object();
  for (const auto & [name, m] : p.topic_metrics()) {
    topics[name] = {{"published", m.published}, {"received", m.received}, {"dropped", m.dropped}};
  }
  json nodes = json::object();
  for (const auto & [id, m] : p.node_metrics()) {
    nodes[id] = {{"firings", m.firings}, {"faults", m.faults}, {"restarts", m.restarts},
      {"max_latency_us", m.max_latency_us}, {"state", funcsw::to_string(m.state)}};
  }
  return {{"topics", topics}, {"nodes", nodes}};
}

}  // namespace

std::string report_text(const nlohmann::json & report)
{
  return report.dump(2) + "\n";
}

RunOutcome run_system(const SystemConfig & cfg, const RunOptions & options)
{
  RunOutcome out;
  const std::uint64_t seed = options.seed.value_or(cfg.seed);
  const auto step_ns = std::llround(cfg.step_s * 1e9);

  platform::Platform p({seed, step_ns});
  for (auto d : cfg.devices) {
    // Per-device seeds are offsets from the run seed.
    d.seed = d.seed ^ seed;
    p.add_device(d);
  }
  for (const auto & t : cfg.topics) {
    p.declare_topic(t);
  }
  acc::register_algorithms(p.algorithms(), p.env(), cfg.acc ? cfg.acc->config : acc::AccConfig{});
  p.build(cfg.pipeline);
  if (!cfg.fsms.empty()) {
    p.load_fsms(cfg.fsms);
  }
  for (const auto & o : cfg.odds) {
    p.env().save_odd(o.name, o.query);
  }
  p.set_round_observer([&out](const funcsw::FiringReport & r) {
      out.firing_reports += r.to_json_line();
      out.firing_reports += '\n';
    });

  std::unique_ptr<acc::AccSession> session;
  double duration = options.duration_s.value_or(cfg.acc ? cfg.acc->scenario.duration : 10.0);
  try {
    if (cfg.acc) {
      acc::Scenario s = cfg.acc->scenario;
      s.duration = duration;
      session = std::make_unique<acc::AccSession>(p, s, cfg.acc->config, cfg.acc->radar);
      session->run();
      if (session->result().collision) {
        out.status = "collision";
        out.message = "collision at t=" + std::to_string(session->result().trajectory.back().t) + " s";
      }
    } else {
      const auto rounds = std::llround(duration / cfg.step_s);
      for (long long i = 0; i < rounds; ++i) {
        p.step();
      }
    }
  } catch (const modemgr::CascadeOverflowError & e) {
    out.status = "cascade_overflow";
    out.message = e.what();
  } catch (const std::exception & e) {
    out.status = "runtime_error";
    out.message = e.what();
  }

  json report{{"seed", seed}, {"config_hash", hex64(cfg.content_hash)}, {"status", out.status},
    {"rounds", p.rounds()}, {"simulated_s", static_cast<double>(p.now_ns()) * 1e-9}};
  const json m = metrics(p);
  report["topics"] = m.at("topics");
  report["nodes"] = m.at("nodes");

  json fsm{{"trace_length", 0}, {"mode", json::object()}};
  if (!cfg.fsms.empty()) {
    fsm["trace_length"] = p.modes().trace_length();
    for (const auto & [id, st] : p.modes().snapshot()) {
      fsm["mode"][id] = st;
    }
    for (const auto & e : p.modes().trace()) {
      out.fsm_trace += e.to_json().dump();
      out.fsm_trace += '\n';
    }
  }
  report["fsm"] = fsm;

  json odds = json::object();
  for (const auto & o : cfg.odds) {
    odds[o.name] = p.env().run_odd(o.name).size();
  }
  report["env"] = {{"records", p.env().size()}, {"odds", odds}};
  for (const auto & r : p.env().records()) {
    out.env_records += envmodel::to_json(r).dump();
    out.env_records += '\n';
  }

  if (session) {
    const auto & r = session->result();
    out.trajectory = r.trajectory_json_lines();
    report["acc"] = {{"steps", r.trajectory.size()}, {"collision", r.collision},
      {"commands", r.commands_received}, {"min_gap_m", r.trajectory.empty() ? 0.0 : r.min_gap()},
      {"final_gap_error_m", r.final_gap_error(cfg.acc->config)}};
  } else {
    report["acc"] = nullptr;
  }
  if (!out.message.empty()) {
    report["message"] = out.message;
  }
  out.report = report;
  return out;
}

}  // namespace dfp::ctl
