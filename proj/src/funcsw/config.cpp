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

#include "dfp/funcsw/config.hpp"

#include <set>
#include <string>
#include <vector>

namespace dfp::funcsw
{

namespace
{

void only_keys(const nlohmann::json & j, const std::set<std::string> & allowed, const std::string & where)
{
  if (!j.is_object()) {
    throw FswError(FswErrc::InvalidGraph, where + " must be an object");
  }
  for (const auto & [k, v] : j.items()) {
    if (!allowed.contains(k)) {
      throw FswError(FswErrc::InvalidGraph, where + ": unknown key '" + k + "'");
    }
  }
}

std::vector<std::string> strings(const nlohmann::json & j, const std::string & where)
{
  if (!j.is_array()) {
    throw FswError(FswErrc::InvalidGraph, where + " must be an array of strings");
  }
  std::vector<std::string> out;
  for (const auto & v : j) {
    if (!v.is_string()) {
      throw FswError(FswErrc::InvalidGraph, where + " must be an array of strings");
    }
    out.push_back(v.get<std::string>());
  }
  return out;
}

std::string required_string(const nlohmann::json & j, const char * key, const std::string & where)
{
  if (!j.contains(key) || !j.at(key).is_string()) {
    throw FswError(FswErrc::InvalidGraph, where + ": '" + key + "' must be a string");
  }
  return j.at(key).get<std::string>();
}

RestartPolicy parse_restart(const nlohmann::json & j, const std::string & where)
{
  if (j.is_string() && j.get<std::string>() == "never") {
    return RestartPolicy::never();
  }
  if (j.is_object() && j.size() == 1 && j.contains("up_to") && j.at("up_to").is_number_unsigned()) {
    return RestartPolicy::up_to(j.at("up_to").get<std::uint32_t>());
  }
  throw FswError(FswErrc::InvalidGraph, where + ": restart must be \"never\" or {\"up_to\": n}");
}

}  // namespace

GraphSpec graph_spec_from_json(const nlohmann::json & j)
{
  only_keys(j, {"external_topics", "groups", "nodes"}, "pipeline");
  GraphSpec spec;
  if (j.contains("external_topics")) {
    for (auto & t : strings(j.at("external_topics"), "pipeline.external_topics")) {
      spec.external_topics.insert(std::move(t));
    }
  }
  if (j.contains("groups")) {
    if (!j.at("groups").is_object()) {
      throw FswError(FswErrc::InvalidGraph, "pipeline.groups must be an object");
    }
    for (const auto & [gid, g] : j.at("groups").items()) {
      const std::string where = "group '" + gid + "'";
      only_keys(g, {"binding", "restart"}, where);
      GroupSpec gs;
      if (g.contains("binding")) {
        gs.binding_label = required_string(g, "binding", where);
      }
      if (g.contains("restart")) {
        gs.restart_policy = parse_restart(g.at("restart"), where);
      }
      spec.groups.emplace(gid, gs);
    }
  }
  if (!j.contains("nodes") || !j.at("nodes").is_array()) {
    throw FswError(FswErrc::InvalidGraph, "pipeline.nodes must be an array");
  }
  for (const auto & n : j.at("nodes")) {
    const std::string where = "node " + (n.is_object() && n.contains("id") ? n.at("id").dump() : std::string("?"));
    only_keys(
      n, {"id", "stage", "group", "algorithm", "version", "inputs", "outputs", "config", "dynamic_keys",
        "watchdog_ms"}, where);
    TaskNode t;
    t.node_id = required_string(n, "id", where);
    t.stage = parse_stage(required_string(n, "stage", where));
    t.group_id = required_string(n, "group", where);
    t.algorithm = required_string(n, "algorithm", where);
    t.algorithm_version = required_string(n, "version", where);
    if (n.contains("inputs")) {
      t.inputs = strings(n.at("inputs"), where + ".inputs");
    }
    if (n.contains("outputs")) {
      t.outputs = strings(n.at("outputs"), where + ".outputs");
    }
    if (n.contains("config")) {
      try {
        t.config = attributes_from_json(n.at("config"));
      } catch (const std::invalid_argument & e) {
        throw FswError(FswErrc::InvalidGraph, where + ".config: " + e.what());
      }
    }
    if (n.contains("dynamic_keys")) {
      for (const auto & k : strings(n.at("dynamic_keys"), where + ".dynamic_keys")) {
        if (!t.config.contains(k)) {
          throw FswError(FswErrc::InvalidGraph, where + ": dynamic key '" + k + "' is not a config key");
        }
        t.config_mode[k] = ConfigMode::Dynamic;
      }
    }
    if (n.contains("watchdog_ms")) {
      if (!n.at("watchdog_ms").is_number_unsigned()) {
        throw FswError(FswErrc::InvalidGraph, where + ": watchdog_ms must be a positive integer");
      }
      t.watchdog_ms = n.at("watchdog_ms").get<std::uint32_t>();
    }
    spec.nodes.push_back(std::move(t));
  }
  return spec;
}

nlohmann::json to_json(const GraphSpec & spec)
{
  nlohmann::json j;
  j["external_topics"] = spec.external_topics;
  j["groups"] = nlohmann::json::object();
  for (const auto & [gid, g] : spec.groups) {
    nlohmann::json gj;
    if (!g.binding_label.empty()) {
      gj["binding"] = g.binding_label;
    }
    if (g.restart_policy.kind == RestartPolicy::Kind::Never) {
      gj["restart"] = "never";
    } else {
      gj["restart"] = {{"up_to", g.restart_policy.limit}};
    }
    j["groups"][gid] = gj;
  }
  j["nodes"] = nlohmann::json::array();
  for (const auto & n : spec.nodes) {
    nlohmann::json nj{
      {"id", n.node_id}, {"stage", to_string(n.stage)}, {"group", n.group_id}, {"algorithm", n.algorithm},
      {"version", n.algorithm_version}, {"inputs", n.inputs}, {"outputs", n.outputs},
      {"config", dfp::to_json(n.config)}, {"watchdog_ms", n.watchdog_ms}};
    std::vector<std::string> dynamic;
    for (const auto & [k, m] : n.config_mode) {
      if (m == ConfigMode::Dynamic) {
        dynamic.push_back(k);
      }
    }
    nj["dynamic_keys"] = dynamic;
    j["nodes"].push_back(nj);
  }
  return j;
}

}  // namespace dfp::funcsw
