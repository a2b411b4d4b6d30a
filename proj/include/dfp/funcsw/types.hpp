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

#ifndef DFP__FUNCSW__TYPES_HPP_
#define DFP__FUNCSW__TYPES_HPP_

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "dfp/common/attributes.hpp"
#include "dfp/common/error.hpp"

namespace dfp::funcsw
{

enum class Stage
{
  Acquisition = 0,
  Abstraction = 1,
  PreProcessing = 2,
  Service = 3,
};

std::string_view to_string(Stage s);
Stage parse_stage(std::string_view s);

enum class LifecycleState
{
  Created,
  Configured,
  Running,
  Failed,
  Stopped,
};

std::string_view to_string(LifecycleState s);

enum class ConfigMode
{
  Static,
  Dynamic,
};

enum class FswErrc
{
  InvalidGraph,
  CycleDetected,
  StageOrderViolation,
  UnresolvedInput,
  DuplicateNodeId,
  DuplicateProducer,
  UnknownGroup,
  UnknownNode,
  BindingConflict,
  StaticKeyWhileRunning,
  UnknownConfigKey,
  DuplicateAlgorithm,
  AlgorithmNotFound,
  PortSchemaMismatch,
  IllegalTransition,
};

using FswError = Error<FswErrc>;

/// CycleDetected with the offending cycle, first node repeated at the end.
class CycleError : public FswError
{
public:
  explicit CycleError(std::vector<std::string> cycle);
  const std::vector<std::string> & cycle() const noexcept {return cycle_;}

private:
  std::vector<std::string> cycle_;
};

/// Data flowing on ports.
using Datum = Attributes;

struct StepContext
{
  /// Input topic -> datum, one per declared input.
  const std::map<std::string, Datum> & inputs;
  const Attributes & config;
  std::uint64_t round;
};

struct StepResult
{
  /// Output topic -> datum. Outputs left out simply produce nothing.
  std::map<std::string, Datum> outputs;
  /// Simulated execution time, checked against the node's watchdog.
  std::int64_t elapsed_us = 0;
};

/// A step function; throwing from it is a body fault.
using StepFn = std::function<StepResult(const StepContext &)>;
using StepFactory = std::function<StepFn(const Attributes & initial_config)>;

struct AlgorithmDescriptor
{
  std::string name;
  std::string version;
  /// Loader entry identifier, informational.
  std::string entry;
  std::vector<std::string> input_ports;
  std::vector<std::string> output_ports;
  std::optional<std::string> binding_requirement;
};

struct RestartPolicy
{
  enum class Kind
  {
    Never,
    UpTo,
  };

  Kind kind = Kind::Never;
  std::uint32_t limit = 0;

  static RestartPolicy never() {return {Kind::Never, 0};}
  static RestartPolicy up_to(std::uint32_t n) {return {Kind::UpTo, n};}
  std::uint32_t max_restarts() const {return kind == Kind::Never ? 0 : limit;}
};

struct GroupSpec
{
  /// Empty until bound.
  std::string binding_label;
  RestartPolicy restart_policy;
};

struct TaskNode
{
  std::string node_id;
  Stage stage = Stage::Acquisition;
  /// Topic names; each is produced by exactly one node or is external.
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
  std::string group_id;
  Attributes config;
  /// Keys absent here are Static.
  std::map<std::string, ConfigMode> config_mode;
  std::uint32_t watchdog_ms = 1000;
  std::string algorithm;
  std::string algorithm_version;
};

struct GraphSpec
{
  std::vector<TaskNode> nodes;
  std::map<std::string, GroupSpec> groups;
  /// Topics fed from outside the graph through step().
  std::set<std::string> external_topics;
};

struct Edge
{
  std::string from;
  std::string to;
  std::string topic;

  bool operator==(const Edge &) const = default;
  auto operator<=>(const Edge &) const = default;
};

struct TransitionRecord
{
  std::uint64_t round = 0;
  std::string node_id;
  LifecycleState from = LifecycleState::Created;
  LifecycleState to = LifecycleState::Created;
  std::string reason;
};

struct NodeFiring
{
  std::string node_id;
  Stage stage = Stage::Acquisition;
  std::int64_t elapsed_us = 0;
  /// False when the firing faulted (body exception or watchdog).
  bool ok = true;
};

struct ProducedSample
{
  std::string node_id;
  std::string topic;
  Datum value;
};

struct FiringReport
{
  std::uint64_t round = 0;
  std::vector<NodeFiring> fired;
  std::vector<ProducedSample> produced;
  std::vector<TransitionRecord> transitions;

  nlohmann::json to_json() const;
  /// One line, no trailing newline.
  std::string to_json_line() const;
};

}  // namespace dfp::funcsw

#endif  // DFP__FUNCSW__TYPES_HPP_
