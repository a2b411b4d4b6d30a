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

#ifndef DFP__FUNCSW__GRAPH_HPP_
#define DFP__FUNCSW__GRAPH_HPP_

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <set>
#include <string>
#include <vector>

#include "dfp/funcsw/registry.hpp"
#include "dfp/funcsw/types.hpp"

namespace dfp::funcsw
{

/// Whether the lifecycle table permits `from -> to`. Failed -> Running also
/// needs restart_count < limit.
bool is_legal_transition(
  LifecycleState from, LifecycleState to, std::uint32_t restart_count, std::uint32_t limit);

/// Derived structure of a validated graph.
struct Topology
{
  std::vector<Edge> edges;
  /// Kahn order, ties broken by smallest node_id.
  std::vector<std::string> order;
};

/// Checks a spec without instantiating anything. Throws FswError (or
/// CycleError) on the first violation found.
Topology analyze(const GraphSpec & spec, const AlgorithmRegistry & registry);

/// The orchestrator: owns the node instances, their lifecycle and the
/// synchronous firing rounds. All methods are serialized internally.
class TaskGraph
{
public:
  TaskGraph(GraphSpec spec, std::shared_ptr<const AlgorithmRegistry> registry);

  std::vector<std::string> topological_order() const;
  std::vector<Edge> edges() const;
  GraphSpec spec() const;
  TaskNode node(const std::string & node_id) const;

  LifecycleState state(const std::string & node_id) const;
  std::uint32_t restart_count(const std::string & node_id) const;
  /// Label carried by the node, empty while unbound.
  std::string binding_label(const std::string & node_id) const;

  /// Throws FswError{UnknownGroup | BindingConflict}. Nothing changes on
  /// error.
  void bind(const std::string & group_id, const std::string & compute_label);

  /// Throws FswError{UnknownNode | UnknownConfigKey | StaticKeyWhileRunning}.
  /// Nothing changes on error.
  void configure(const std::string & node_id, const Attributes & patch);

  /// Created -> Configured -> Running for every node of the group(s).
  void start();
  void start_group(const std::string & group_id);
  /// Running or Failed -> Stopped. Stopped is terminal.
  void stop_group(const std::string & group_id);
  bool group_started(const std::string & group_id) const;

  /// One synchronous round. Samples for topics nobody consumes are ignored.
  FiringReport step(const std::map<std::string, Datum> & external_inputs);

  /// Applies the group's restart policy to a running node.
  LifecycleState on_node_failure(const std::string & node_id, const std::string & reason = "injected");

  /// Service-stage nodes only, between rounds. The node starts at once when
  /// its group is started.
  void add_service_node(const TaskNode & node);
  void remove_service_node(const std::string & node_id);

  /// Replaces the node's algorithm by another version with the same ports.
  /// Throws FswError{AlgorithmNotFound | PortSchemaMismatch}.
  void swap_algorithm(const std::string & node_id, const std::string & version);

  std::vector<TransitionRecord> trace() const;
  std::uint64_t rounds() const;

private:
  struct Runtime
  {
    LifecycleState state = LifecycleState::Created;
    std::uint32_t restarts = 0;
    std::string label;
    StepFn body;
    /// Input topic -> datum waiting to be consumed.
    std::map<std::string, Datum> fresh;
  };

  const TaskNode & node_locked(const std::string & node_id) const;
  Runtime & runtime_locked(const std::string & node_id);
  void transition_locked(const std::string & node_id, LifecycleState to, const std::string & reason);
  void start_node_locked(const std::string & node_id);
  LifecycleState fail_locked(const std::string & node_id, const std::string & reason);
  void rebuild_locked(GraphSpec candidate);
  void check_binding_locked(const TaskNode & n, const std::string & label) const;

  std::shared_ptr<const AlgorithmRegistry> registry_;
  GraphSpec spec_;
  Topology topology_;
  std::map<std::string, std::size_t> index_;
  std::map<std::string, std::vector<std::string>> consumers_;
  std::map<std::string, Runtime> runtime_;
  std::set<std::string> started_groups_;
  std::vector<TransitionRecord> trace_;
  std::vector<TransitionRecord> pending_transitions_;
  std::uint64_t round_ = 0;
  mutable std::mutex mutex_;
};

}  // namespace dfp::funcsw

#endif  // DFP__FUNCSW__GRAPH_HPP_
