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

#ifndef DFP__CTL__CONFIG_HPP_
#define DFP__CTL__CONFIG_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "dfp/acc/acc.hpp"
#include "dfp/envmodel/record.hpp"
#include "dfp/funcsw/types.hpp"
#include "dfp/hal/device.hpp"
#include "dfp/middleware/qos.hpp"
#include "dfp/modemgr/fsm.hpp"

namespace dfp::ctl
{

/// A config problem. `kind` is a stable token:
///
///   not_found, parse, schema                 the document itself
///   duplicate_id                             repeated device/topic/fsm/odd
///   undeclared_topic                         external topic nobody declares
///   unresolved_input                         node input with no producer
///   unknown_group                            node group not in pipeline.groups
///   unknown_algorithm                        node algorithm not in `algorithms`
///   unavailable_algorithm                    `algorithms` entry not built in
///   fsm_unknown_state                        initial/transition/guard state
///   fsm_unknown_fsm                          guard or emit names a missing FSM
///   fsm_unknown_group                        start/stop names a missing group
///   acc_unknown_device                       acc.radar is not a radar device
///   acc_missing_topic                        acc topics not declared
///   acc_unknown_fsm                          acc mode event names a missing FSM
///   invalid                                  any other invalid value
class ConfigError : public std::runtime_error
{
public:
  ConfigError(std::string kind, const std::string & what)
  : std::runtime_error(what), kind_(std::move(kind)) {}
  const std::string & kind() const noexcept {return kind_;}

private:
  std::string kind_;
};

struct AlgorithmRef
{
  std::string name;
  std::string version;
};

struct AccSection
{
  acc::Scenario scenario;
  acc::AccConfig config;
  std::string radar = acc::kRadarId;
};

struct SystemConfig
{
  std::vector<hal::DeviceDescriptor> devices;
  std::vector<middleware::TopicDescriptor> topics;
  funcsw::GraphSpec pipeline;
  std::vector<AlgorithmRef> algorithms;
  std::vector<modemgr::FsmDefinition> fsms;
  std::vector<envmodel::OddDefinition> odds;
  std::optional<AccSection> acc;
  std::uint64_t seed = 0;
  /// Simulated round length: acc.scenario.dt when present, else 50 ms.
  double step_s = 0.05;
  /// FNV-1a of the document text.
  std::uint64_t content_hash = 0;
};

/// Built-in algorithms a config may reference.
std::vector<AlgorithmRef> algorithm_catalogue();

/// Parses without cross-reference checks. Throws ConfigError{schema | invalid}.
SystemConfig parse_config(const nlohmann::json & doc);
/// Throws ConfigError naming the first dangling reference.
void validate(const SystemConfig & cfg);
/// Reads, parses and validates. Throws ConfigError{not_found | parse | ...}.
SystemConfig load_config(const std::filesystem::path & path);

nlohmann::json topic_to_json(const middleware::TopicDescriptor & t);
middleware::TopicDescriptor topic_from_json(const nlohmann::json & j);

}  // namespace dfp::ctl

#endif  // DFP__CTL__CONFIG_HPP_
