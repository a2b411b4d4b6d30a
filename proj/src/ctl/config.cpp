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

#include "dfp/ctl/config.hpp"

#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "dfp/common/hash.hpp"
#include "dfp/funcsw/config.hpp"
#include "dfp/funcsw/graph.hpp"
#include "dfp/modemgr/coordinator.hpp"
#include "dfp/platform/platform.hpp"

namespace dfp::ctl
{

namespace mw = middleware;
using nlohmann::json;

namespace
{

void check_keys(const json & j, std::initializer_list<const char *> allowed, const std::string & where)
{
  if (!j.is_object()) {
    throw ConfigError("schema", where + ": expected an object");
  }
  for (const auto & [k, v] : j.items()) {
    (void)v;
    bool ok = false;
    for (const char * a : allowed) {
      ok = ok || k == a;
    }
    if (!ok) {
      throw ConfigError("schema", where + ": unknown key '" + k + "'");
    }
  }
}

template<typename T>
T field(const json & j, const char * key, const std::string & where)
{
  if (!j.contains(key)) {
    throw ConfigError("schema", where + ": missing '" + key + "'");
  }
  try {
    return j.at(key).get<T>();
  } catch (const json::exception &) {
    throw ConfigError("schema", where + ": '" + key + "' has the wrong type");
  }
}

template<typename T>
T field_or(const json & j, const char * key, T fallback, const std::string & where)
{
  return j.contains(key) ? field<T>(j, key, where) : fallback;
}

const json & array_at(const json & doc, const char * key)
{
  static const json empty = json::array();
  if (!doc.contains(key)) {
    return empty;
  }
  if (!doc.at(key).is_array()) {
    throw ConfigError("schema", std::string("'") + key + "' must be an array");
  }
  return doc.at(key);
}

hal::DeviceDescriptor device_from_json(const json & j, const std::string & where)
{
  check_keys(j, {"id", "kind", "rate_hz", "seed", "binding"}, where);
  hal::DeviceDescriptor d;
  d.device_id = field<std::string>(j, "id", where);
  const auto kind = hal::parse_device_kind(field<std::string>(j, "kind", where));
  if (!kind) {
    throw ConfigError("schema", where + ": unknown device kind '" + j.at("kind").get<std::string>() + "'");
  }
  d.kind = *kind;
  d.rate_hz = field<double>(j, "rate_hz", where);
  d.seed = field_or<std::uint64_t>(j, "seed", 0, where);
  d.binding_label = field_or<std::string>(j, "binding", "", where);
  return d;
}

acc::VehicleState vehicle_from_json(const json & j, const std::string & where)
{
  check_keys(j, {"position", "speed"}, where);
  return {field<double>(j, "position", where), field<double>(j, "speed", where), 0.0};
}

AccSection acc_from_json(const json & j)
{
  const std::string w = "acc";
  check_keys(j, {"radar", "dt", "duration", "ego", "lead", "lead_profile", "mode_events", "config"}, w);
  AccSection a;
  a.radar = field_or<std::string>(j, "radar", acc::kRadarId, w);
  a.scenario.dt = field_or<double>(j, "dt", 0.05, w);
  a.scenario.duration = field_or<double>(j, "duration", 120.0, w);
  a.scenario.ego = vehicle_from_json(field<json>(j, "ego", w), w + ".ego");
  a.scenario.lead = vehicle_from_json(field<json>(j, "lead", w), w + ".lead");
  for (const auto & st : array_at(j, "lead_profile")) {
    check_keys(st, {"t", "speed"}, w + ".lead_profile");
    a.scenario.lead_profile.push_back({field<double>(st, "t", w), field<double>(st, "speed", w)});
  }
  if (j.contains("mode_events")) {
    a.scenario.mode_events.clear();
    for (const auto & ev : array_at(j, "mode_events")) {
      check_keys(ev, {"t", "fsm", "event"}, w + ".mode_events");
      a.scenario.mode_events.push_back(
        {field<double>(ev, "t", w), field<std::string>(ev, "fsm", w), field<std::string>(ev, "event", w)});
    }
  }
  if (j.contains("config")) {
    const json & c = j.at("config");
    const std::string wc = w + ".config";
    check_keys(c, {"standstill_gap", "time_headway", "kp", "kv", "accel_min", "accel_max"}, wc);
    acc::AccConfig & k = a.config;
    k.standstill_gap = field_or<double>(c, "standstill_gap", k.standstill_gap, wc);
    k.time_headway = field_or<double>(c, "time_headway", k.time_headway, wc);
    k.kp = field_or<double>(c, "kp", k.kp, wc);
    k.kv = field_or<double>(c, "kv", k.kv, wc);
    k.accel_min = field_or<double>(c, "accel_min", k.accel_min, wc);
    k.accel_max = field_or<double>(c, "accel_max", k.accel_max, wc);
  }
  try {
    acc::validate(a.scenario);
    acc::validate(a.config);
  } catch (const std::invalid_argument & e) {
    throw ConfigError("invalid", std::string("acc: ") + e.what());
  }
  return a;
}

void dangling(const std::string & kind, const std::string & msg)
{
  throw ConfigError(kind, msg);
}

}  // namespace

nlohmann::json topic_to_json(const middleware::TopicDescriptor & t)
{
  json j{{"name", t.name},
    {"reliability", t.qos.reliability == mw::Reliability::Reliable ? "reliable" : "best_effort"},
    {"durability", t.qos.durability == mw::Durability::TransientLocal ? "transient_local" : "volatile"}};
  if (t.qos.history.kind == mw::HistoryKind::KeepAll) {
    j["history"] = "keep_all";
  } else {
    j["history"] = {{"keep_last", t.qos.history.depth}};
  }
  if (t.qos.deadline_ms) {
    j["deadline_ms"] = *t.qos.deadline_ms;
  }
  return j;
}

middleware::TopicDescriptor topic_from_json(const nlohmann::json & j)
{
  const std::string w = "topic";
  check_keys(j, {"name", "reliability", "history", "durability", "deadline_ms"}, w);
  mw::QoSProfile q;
  q.reliability = mw::Reliability::Reliable;
  const auto rel = field_or<std::string>(j, "reliability", "reliable", w);
  if (rel == "best_effort") {
    q.reliability = mw::Reliability::BestEffort;
  } else if (rel != "reliable") {
    throw ConfigError("schema", w + ": reliability must be reliable or best_effort");
  }
  const auto dur = field_or<std::string>(j, "durability", "volatile", w);
  if (dur == "transient_local") {
    q.durability = mw::Durability::TransientLocal;
  } else if (dur != "volatile") {
    throw ConfigError("schema", w + ": durability must be volatile or transient_local");
  }
  q.history = mw::History::keep_last(4);
  if (j.contains("history")) {
    const json & h = j.at("history");
    if (h == "keep_all") {
      q.history = mw::History::keep_all();
    } else if (h.is_object() && h.size() == 1 && h.contains("keep_last") && h.at("keep_last").is_number_unsigned()) {
      q.history = mw::History::keep_last(h.at("keep_last").get<std::uint32_t>());
    } else {
      throw ConfigError("schema", w + ": history must be \"keep_all\" or {\"keep_last\": n}");
    }
  }
  if (j.contains("deadline_ms")) {
    q.deadline_ms = field<std::uint32_t>(j, "deadline_ms", w);
  }
  const auto name = field<std::string>(j, "name", w);
  if (!mw::is_valid_topic_name(name)) {
    throw ConfigError("invalid", "topic name '" + name + "' must match [a-z0-9_/]+");
  }
  if (auto bad = mw::validate(q)) {
    throw ConfigError("invalid", "topic '" + name + "': " + *bad);
  }
  return platform::attributes_topic(name, q);
}

std::vector<AlgorithmRef> algorithm_catalogue()
{
  return {{platform::kEnvIngestAlgorithm, platform::kEnvIngestVersion}, {"acc_planner", "1.0.0"},
    {"acc_control", "1.0.0"}};
}

SystemConfig parse_config(const nlohmann::json & doc)
{
  check_keys(doc, {"devices", "topics", "pipeline", "algorithms", "fsms", "odds", "acc", "seed"}, "config");
  SystemConfig cfg;
  for (const auto & d : array_at(doc, "devices")) {
    cfg.devices.push_back(device_from_json(d, "devices[" + std::to_string(cfg.devices.size()) + "]"));
  }
  for (const auto & t : array_at(doc, "topics")) {
    cfg.topics.push_back(topic_from_json(t));
  }
  if (!doc.contains("pipeline")) {
    throw ConfigError("schema", "config: missing 'pipeline'");
  }
  try {
    cfg.pipeline = funcsw::graph_spec_from_json(doc.at("pipeline"));
  } catch (const funcsw::FswError & e) {
    throw ConfigError("schema", std::string("pipeline: ") + e.what());
  }
  for (const auto & a : array_at(doc, "algorithms")) {
    check_keys(a, {"name", "version"}, "algorithms");
    cfg.algorithms.push_back({field<std::string>(a, "name", "algorithms"), field<std::string>(a, "version", "algorithms")});
  }
  for (const auto & f : array_at(doc, "fsms")) {
    try {
      cfg.fsms.push_back(modemgr::fsm_from_json(f));
    } catch (const modemgr::ModeError & e) {
      throw ConfigError("schema", std::string("fsms: ") + e.what());
    }
  }
  for (const auto & o : array_at(doc, "odds")) {
    check_keys(o, {"name", "query"}, "odds");
    try {
      cfg.odds.push_back({field<std::string>(o, "name", "odds"), envmodel::query_from_json(field<json>(o, "query", "odds"))});
    } catch (const envmodel::EnvError & e) {
      throw ConfigError("schema", std::string("odds: ") + e.what());
    }
  }
  if (doc.contains("acc") && !doc.at("acc").is_null()) {
    cfg.acc = acc_from_json(doc.at("acc"));
    cfg.step_s = cfg.acc->scenario.dt;
  }
  cfg.seed = field_or<std::uint64_t>(doc, "seed", 0, "config");
  return cfg;
}

void validate(const SystemConfig & cfg)
{
  std::map<std::string, hal::DeviceKind> devices;
  std::set<std::string> declared;
  for (const auto & d : cfg.devices) {
    if (!devices.emplace(d.device_id, d.kind).second) {
      dangling("duplicate_id", "device '" + d.device_id + "' is declared twice");
    }
    if (d.rate_hz <= 0.0 || d.rate_hz > hal::kMaxRateHz) {
      dangling("invalid", "device '" + d.device_id + "': rate_hz out of range (0, 1000]");
    }
    if (!mw::is_valid_topic_name(platform::device_topic(d.device_id))) {
      dangling("invalid", "device id '" + d.device_id + "' must match [a-z0-9_]+");
    }
    declared.insert(platform::device_topic(d.device_id));
  }
  for (const auto & t : cfg.topics) {
    if (!declared.insert(t.name).second) {
      dangling("duplicate_id", "topic '" + t.name + "' is declared twice or shadows a device topic");
    }
  }

  std::set<std::pair<std::string, std::string>> listed;
  for (const auto & a : cfg.algorithms) {
    bool known = false;
    for (const auto & c : algorithm_catalogue()) {
      known = known || (c.name == a.name && c.version == a.version);
    }
    if (!known) {
      dangling("unavailable_algorithm", "algorithm '" + a.name + "' " + a.version + " is not built in");
    }
    listed.emplace(a.name, a.version);
  }

  const funcsw::GraphSpec & g = cfg.pipeline;
  for (const auto & t : g.external_topics) {
    if (!declared.contains(t)) {
      dangling("undeclared_topic", "external topic '" + t + "' is neither a device topic nor in 'topics'");
    }
  }
  std::set<std::string> produced = g.external_topics;
  for (const auto & n : g.nodes) {
    produced.insert(n.outputs.begin(), n.outputs.end());
  }
  for (const auto & n : g.nodes) {
    if (!g.groups.contains(n.group_id)) {
      dangling("unknown_group", "node '" + n.node_id + "' is in unknown group '" + n.group_id + "'");
    }
    if (!listed.contains({n.algorithm, n.algorithm_version})) {
      dangling("unknown_algorithm",
        "node '" + n.node_id + "' uses algorithm '" + n.algorithm + "' " + n.algorithm_version +
        " which is not listed in 'algorithms'");
    }
    for (const auto & in : n.inputs) {
      if (!produced.contains(in)) {
        dangling("unresolved_input", "node '" + n.node_id + "' reads topic '" + in + "' that nothing produces");
      }
    }
  }

  std::map<std::string, const modemgr::FsmDefinition *> fsms;
  for (const auto & f : cfg.fsms) {
    if (!fsms.emplace(f.fsm_id, &f).second) {
      dangling("duplicate_id", "FSM '" + f.fsm_id + "' is declared twice");
    }
  }
  for (const auto & f : cfg.fsms) {
    auto state = [&](const std::string & s, const std::string & what) {
        if (!f.states.contains(s)) {
          dangling("fsm_unknown_state", "FSM '" + f.fsm_id + "': " + what + " '" + s + "' is not a state");
        }
      };
    state(f.initial, "initial state");
    for (const auto & t : f.transitions) {
      state(t.from, "transition source");
      state(t.to, "transition target");
      for (const auto & [gf, gs] : t.guard.value_or(modemgr::Guard{})) {
        auto it = fsms.find(gf);
        if (it == fsms.end()) {
          dangling("fsm_unknown_fsm", "FSM '" + f.fsm_id + "': guard names unknown FSM '" + gf + "'");
        }
        if (!it->second->states.contains(gs)) {
          dangling("fsm_unknown_state", "FSM '" + f.fsm_id + "': guard expects '" + gf + "' in unknown state '" + gs + "'");
        }
      }
      for (const auto & a : t.actions) {
        if (a.kind == modemgr::Action::Kind::EmitEvent) {
          if (!fsms.contains(a.target_fsm)) {
            dangling("fsm_unknown_fsm", "FSM '" + f.fsm_id + "': emit targets unknown FSM '" + a.target_fsm + "'");
          }
        } else if (!g.groups.contains(a.group_id)) {
          dangling("fsm_unknown_group", "FSM '" + f.fsm_id + "': action names undefined group '" + a.group_id + "'");
        }
      }
    }
  }

  std::set<std::string> odd_names;
  for (const auto & o : cfg.odds) {
    if (!odd_names.insert(o.name).second) {
      dangling("duplicate_id", "ODD '" + o.name + "' is declared twice");
    }
    if (envmodel::effective_tokens(o.query).empty()) {
      dangling("invalid", "ODD '" + o.name + "' has no query tokens");
    }
  }

  if (cfg.acc) {
    auto it = devices.find(cfg.acc->radar);
    if (it == devices.end() || it->second != hal::DeviceKind::Radar) {
      dangling("acc_unknown_device", "acc.radar '" + cfg.acc->radar + "' is not a declared radar device");
    }
    for (const char * t : {acc::kEgoTopic, acc::kCommandTopic}) {
      if (!declared.contains(t)) {
        dangling("acc_missing_topic", std::string("acc needs topic '") + t + "' in 'topics'");
      }
    }
    for (const auto & ev : cfg.acc->scenario.mode_events) {
      if (!fsms.contains(ev.fsm)) {
        dangling("acc_unknown_fsm", "acc mode event targets unknown FSM '" + ev.fsm + "'");
      }
    }
    if (1.0 / cfg.acc->scenario.dt > hal::kMaxRateHz) {
      dangling("invalid", "acc.dt below the fastest device period");
    }
  }

  // Structural checks of the layers themselves (cycles, stage order, ...).
  platform::Platform probe;
  acc::register_algorithms(probe.algorithms(), probe.env(), cfg.acc ? cfg.acc->config : acc::AccConfig{});
  try {
    funcsw::analyze(g, probe.algorithms());
  } catch (const funcsw::FswError & e) {
    dangling("invalid", std::string("pipeline: ") + e.what());
  }
  if (!cfg.fsms.empty()) {
    std::set<std::string> groups;
    for (const auto & [gid, gs] : g.groups) {
      (void)gs;
      groups.insert(gid);
    }
    try {
      modemgr::Coordinator(groups).load(cfg.fsms);
    } catch (const modemgr::ModeError & e) {
      dangling("invalid", std::string("fsms: ") + e.what());
    }
  }
}

SystemConfig load_config(const std::filesystem::path & path)
{
  std::ifstream in(path, std::ios::binary);
  if (!std::filesystem::is_regular_file(path) || !in) {
    throw ConfigError("not_found", "config not found: " + path.string());
  }
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  json doc = json::parse(text, nullptr, false);
  if (doc.is_discarded()) {
    throw ConfigError("parse", "config is not valid JSON: " + path.string());
  }
  SystemConfig cfg = parse_config(doc);
  cfg.content_hash = fnv1a64(text);
  validate(cfg);
  return cfg;
}

}  // namespace dfp::ctl
