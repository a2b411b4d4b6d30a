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

#include "dfp/modemgr/fsm.hpp"

namespace dfp::modemgr
{

CascadeOverflowError::CascadeOverflowError(std::uint32_t depth)
: ModeError(
    ModeErrc::CascadeOverflow,
    "cascade overflow: more than " + std::to_string(kMaxCascade) + " chained events (depth " +
    std::to_string(depth) + ")"),
  depth_(depth)
{
}

nlohmann::json to_json(const Action & a)
{
  switch (a.kind) {
    case Action::Kind::StartGroup:
      return {{"start_group", a.group_id}};
    case Action::Kind::StopGroup:
      return {{"stop_group", a.group_id}};
    case Action::Kind::EmitEvent:
      break;
  }
  return {{"emit", {{"fsm", a.target_fsm}, {"event", a.event}}}};
}

nlohmann::json TraceEntry::to_json() const
{
  nlohmann::json acts = nlohmann::json::array();
  for (const auto & a : actions) {
    acts.push_back(modemgr::to_json(a));
  }
  return {
    {"step", step}, {"depth", depth}, {"fsm", fsm_id}, {"event", event}, {"from", from}, {"to", to},
    {"transition", transition}, {"actions", acts}};
}

nlohmann::json to_json(const FsmDefinition & d)
{
  nlohmann::json ts = nlohmann::json::array();
  for (const auto & t : d.transitions) {
    nlohmann::json tj{{"from", t.from}, {"event", t.event}, {"to", t.to}, {"actions", nlohmann::json::array()}};
    if (t.guard) {
      tj["guard"] = *t.guard;
    }
    for (const auto & a : t.actions) {
      tj["actions"].push_back(to_json(a));
    }
    ts.push_back(tj);
  }
  return {{"id", d.fsm_id}, {"states", d.states}, {"initial", d.initial}, {"transitions", ts}};
}

namespace
{

void only_keys(const nlohmann::json & j, const std::set<std::string> & allowed, const std::string & where)
{
  if (!j.is_object()) {
    throw ModeError(ModeErrc::InvalidDefinition, where + " must be an object");
  }
  for (const auto & [k, v] : j.items()) {
    if (!allowed.contains(k)) {
      throw ModeError(ModeErrc::InvalidDefinition, where + ": unknown key '" + k + "'");
    }
  }
}

Action action_from_json(const nlohmann::json & j, const std::string & where)
{
  if (!j.is_object() || j.size() != 1) {
    throw ModeError(ModeErrc::InvalidDefinition, where + ": an action is an object with one key");
  }
  if (j.contains("start_group")) {
    return Action::start_group(j.at("start_group").get<std::string>());
  }
  if (j.contains("stop_group")) {
    return Action::stop_group(j.at("stop_group").get<std::string>());
  }
  if (j.contains("emit")) {
    only_keys(j.at("emit"), {"fsm", "event"}, where + ".emit");
    return Action::emit(j.at("emit").at("fsm").get<std::string>(), j.at("emit").at("event").get<std::string>());
  }
  throw ModeError(ModeErrc::InvalidDefinition, where + ": unknown action '" + j.begin().key() + "'");
}

}  // namespace

FsmDefinition fsm_from_json(const nlohmann::json & j)
{
  const std::string where = "fsm " + (j.is_object() && j.contains("id") ? j.at("id").dump() : std::string("?"));
  try {
    only_keys(j, {"id", "states", "initial", "transitions"}, where);
    FsmDefinition d;
    d.fsm_id = j.at("id").get<std::string>();
    d.states = j.at("states").get<std::set<std::string>>();
    d.initial = j.at("initial").get<std::string>();
    if (j.contains("transitions")) {
      std::size_t i = 0;
      for (const auto & tj : j.at("transitions")) {
        const std::string tw = where + ".transitions[" + std::to_string(i++) + "]";
        only_keys(tj, {"from", "event", "guard", "to", "actions"}, tw);
        Transition t;
        t.from = tj.at("from").get<std::string>();
        t.event = tj.at("event").get<std::string>();
        t.to = tj.at("to").get<std::string>();
        if (tj.contains("guard")) {
          t.guard = tj.at("guard").get<Guard>();
        }
        if (tj.contains("actions")) {
          for (const auto & aj : tj.at("actions")) {
            t.actions.push_back(action_from_json(aj, tw));
          }
        }
        d.transitions.push_back(std::move(t));
      }
    }
    return d;
  } catch (const nlohmann::json::exception & e) {
    throw ModeError(ModeErrc::InvalidDefinition, where + ": " + e.what());
  }
}

}  // namespace dfp::modemgr
