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

#include "dfp/funcsw/types.hpp"

#include <string>
#include <utility>

namespace dfp::funcsw
{

namespace
{

std::string describe_cycle(const std::vector<std::string> & cycle)
{
  std::string out = "cycle detected:";
  for (std::size_t i = 0; i < cycle.size(); ++i) {
    out += (i == 0 ? " " : " -> ") + cycle[i];
  }
  return out;
}

}  // namespace

std::string_view to_string(Stage s)
{
  switch (s) {
    case Stage::Acquisition:
      return "Acquisition";
    case Stage::Abstraction:
      return "Abstraction";
    case Stage::PreProcessing:
      return "PreProcessing";
    case Stage::Service:
      return "Service";
  }
  return "?";
}

Stage parse_stage(std::string_view s)
{
  for (Stage st : {Stage::Acquisition, Stage::Abstraction, Stage::PreProcessing, Stage::Service}) {
    if (to_string(st) == s) {
      return st;
    }
  }
  throw FswError(FswErrc::InvalidGraph, "unknown stage '" + std::string(s) + "'");
}

std::string_view to_string(LifecycleState s)
{
  switch (s) {
    case LifecycleState::Created:
      return "Created";
    case LifecycleState::Configured:
      return "Configured";
    case LifecycleState::Running:
      return "Running";
    case LifecycleState::Failed:
      return "Failed";
    case LifecycleState::Stopped:
      return "Stopped";
  }
  return "?";
}

CycleError::CycleError(std::vector<std::string> cycle)
: FswError(FswErrc::CycleDetected, describe_cycle(cycle)), cycle_(std::move(cycle))
{
}

nlohmann::json FiringReport::to_json() const
{
  nlohmann::json j;
  j["round"] = round;
  j["fired"] = nlohmann::json::array();
  for (const auto & f : fired) {
    j["fired"].push_back(
      {{"node", f.node_id}, {"stage", to_string(f.stage)}, {"elapsed_us", f.elapsed_us}, {"ok", f.ok}});
  }
  j["produced"] = nlohmann::json::array();
  for (const auto & p : produced) {
    j["produced"].push_back({{"node", p.node_id}, {"topic", p.topic}, {"value", dfp::to_json(p.value)}});
  }
  j["transitions"] = nlohmann::json::array();
  for (const auto & t : transitions) {
    j["transitions"].push_back(
      {{"round", t.round}, {"node", t.node_id}, {"from", to_string(t.from)}, {"to", to_string(t.to)},
        {"reason", t.reason}});
  }
  return j;
}

std::string FiringReport::to_json_line() const
{
  return to_json().dump();
}

}  // namespace dfp::funcsw
