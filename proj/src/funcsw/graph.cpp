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

#include "dfp/funcsw/graph.hpp"

#include <algorithm>
#include <functional>
#include <queue>
#include <string>
#include <utility>
#include <vector>

namespace dfp::funcsw
{

namespace
{

void check_ports(const TaskNode & n, const AlgorithmDescriptor & d)
{
  if (n.inputs.size() != d.input_ports.size() || n.outputs.size() != d.output_ports.size()) {
    throw FswError(
      FswErrc::PortSchemaMismatch,
      "node '" + n.node_id + "' wires " + std::to_string(n.inputs.size()) + " inputs/" +
      std::to_string(n.outputs.size()) + " outputs but " + d.name + "@" + d.version + " declares " +
      std::to_string(d.input_ports.size()) + "/" + std::to_string(d.output_ports.size()));
  }
}

std::vector<std::string> find_cycle(
  const std::set<std::string> & remaining, const std::map<std::string, std::set<std::string>> & succ)
{
  enum class Color { White, Grey, Black };
  std::map<std::string, Color> color;
  for (const auto & n : remaining) {
    color[n] = Color::White;
  }
  std::vector<std::string> stack;
  std::vector<std::string> cycle;
  std::function<bool(const std::string &)> visit = [&](const std::string & n) {
      color[n] = Color::Grey;
      stack.push_back(n);
      auto it = succ.find(n);
      if (it != succ.end()) {
        for (const auto & m : it->second) {
          if (!remaining.contains(m)) {
            continue;
          }
          if (color[m] == Color::Grey) {
            auto start = std::find(stack.begin(), stack.end(), m);
            cycle.assign(start, stack.end());
            cycle.push_back(m);
            return true;
          }
          if (color[m] == Color::White && visit(m)) {
            return true;
          }
        }
      }
      stack.pop_back();
      color[n] = Color::Black;
      return false;
    };
  for (const auto & n : remaining) {
    if (color[n] == Color::White && visit(n)) {
      break;
    }
  }
  return cycle;
}

}  // namespace

bool is_legal_transition(
  LifecycleState from, LifecycleState to, std::uint32_t restart_count, std::uint32_t limit)
{
  using S = LifecycleState;
  switch (from) {
    case S::Created:
      return to == S::Configured;
    case S::Configured:
      return to == S::Running;
    case S::Running:
      return to == S::Failed || to == S::Stopped;
    case S::Failed:
      return (to == S::Running && restart_count < limit) || to == S::Stopped;
    case S::Stopped:
      return false;
  }
  return false;
}

Topology analyze(const GraphSpec & spec, const AlgorithmRegistry & registry)
{
  if (spec.nodes.empty()) {
    throw FswError(FswErrc::InvalidGraph, "graph has no nodes");
  }
  std::map<std::string, const TaskNode *> by_id;
  for (const auto & n : spec.nodes) {
    if (n.node_id.empty()) {
      throw FswError(FswErrc::InvalidGraph, "node with empty id");
    }
    if (!by_id.emplace(n.node_id, &n).second) {
      throw FswError(FswErrc::DuplicateNodeId, "duplicate node id '" + n.node_id + "'");
    }
    if (!spec.groups.contains(n.group_id)) {
      throw FswError(FswErrc::UnknownGroup, "node '" + n.node_id + "' names unknown group '" + n.group_id + "'");
    }
    if (n.watchdog_ms == 0) {
      throw FswError(FswErrc::InvalidGraph, "node '" + n.node_id + "' needs a positive watchdog");
    }
  }

  std::map<std::string, std::string> producer;
  for (const auto & n : spec.nodes) {
    for (const auto & t : n.outputs) {
      if (spec.external_topics.contains(t)) {
        throw FswError(FswErrc::DuplicateProducer, "topic '" + t + "' is external and produced by '" + n.node_id + "'");
      }
      auto [it, inserted] = producer.emplace(t, n.node_id);
      if (!inserted) {
        throw FswError(
          FswErrc::DuplicateProducer, "topic '" + t + "' produced by '" + it->second + "' and '" + n.node_id + "'");
      }
    }
  }

  Topology topo;
  std::map<std::string, std::set<std::string>> succ;
  std::map<std::string, std::size_t> indegree;
  for (const auto & n : spec.nodes) {
    indegree[n.node_id];
    for (const auto & t : n.inputs) {
      auto it = producer.find(t);
      if (it == producer.end()) {
        if (!spec.external_topics.contains(t)) {
          throw FswError(FswErrc::UnresolvedInput, "input '" + t + "' of node '" + n.node_id + "' has no producer");
        }
        continue;
      }
      topo.edges.push_back({it->second, n.node_id, t});
    }
    check_ports(n, registry.descriptor(n.algorithm, n.algorithm_version));
  }
  std::sort(topo.edges.begin(), topo.edges.end());

  for (const auto & e : topo.edges) {
    const Stage from = by_id.at(e.from)->stage;
    const Stage to = by_id.at(e.to)->stage;
    if (from > to) {
      throw FswError(
        FswErrc::StageOrderViolation,
        "edge " + e.from + " (" + std::string(to_string(from)) + ") -> " + e.to + " (" +
        std::string(to_string(to)) + ") runs against the stage order");
    }
    if (succ[e.from].insert(e.to).second) {
      ++indegree[e.to];
    }
  }

  std::priority_queue<std::string, std::vector<std::string>, std::greater<>> ready;
  for (const auto & [id, d] : indegree) {
    if (d == 0) {
      ready.push(id);
    }
  }
  while (!ready.empty()) {
    std::string n = ready.top();
    ready.pop();
    topo.order.push_back(n);
    for (const auto & m : succ[n]) {
      if (--indegree[m] == 0) {
        ready.push(m);
      }
    }
  }
  if (topo.order.size() != spec.nodes.size()) {
    std::set<std::string> remaining;
    for (const auto & [id, n] : by_id) {
      remaining.insert(id);
    }
    for (const auto & id : topo.order) {
      remaining.erase(id);
    }
    throw CycleError(find_cycle(remaining, succ));
  }
  return topo;
}

TaskGraph::TaskGraph(GraphSpec spec, std::shared_ptr<const AlgorithmRegistry> registry)
: registry_(std::move(registry))
{
  if (!registry_) {
    throw FswError(FswErrc::InvalidGraph, "no algorithm registry");
  }
  std::lock_guard lock(mutex_);
  rebuild_locked(std::move(spec));
  for (const auto & [gid, g] : spec_.groups) {
    if (g.binding_label.empty()) {
      continue;
    }
    for (const auto & n : spec_.nodes) {
      if (n.group_id == gid) {
        check_binding_locked(n, g.binding_label);
        runtime_[n.node_id].label = g.binding_label;
      }
    }
  }
}

void TaskGraph::rebuild_locked(GraphSpec candidate)
{
  Topology topo = analyze(candidate, *registry_);
  spec_ = std::move(candidate);
  topology_ = std::move(topo);
  index_.clear();
  consumers_.clear();
  for (std::size_t i = 0; i < spec_.nodes.size(); ++i) {
    index_[spec_.nodes[i].node_id] = i;
  }
  for (const auto & id : topology_.order) {
    for (const auto & t : spec_.nodes[index_.at(id)].inputs) {
      consumers_[t].push_back(id);
    }
    runtime_[id];
  }
}

const TaskNode & TaskGraph::node_locked(const std::string & node_id) const
{
  auto it = index_.find(node_id);
  if (it == index_.end()) {
    throw FswError(FswErrc::UnknownNode, "unknown node '" + node_id + "'");
  }
  return spec_.nodes[it->second];
}

TaskGraph::Runtime & TaskGraph::runtime_locked(const std::string & node_id)
{
  node_locked(node_id);
  return runtime_.at(node_id);
}

std::vector<std::string> TaskGraph::topological_order() const
{
  std::lock_guard lock(mutex_);
  return topology_.order;
}

std::vector<Edge> TaskGraph::edges() const
{
  std::lock_guard lock(mutex_);
  return topology_.edges;
}

GraphSpec TaskGraph::spec() const
{
  std::lock_guard lock(mutex_);
  return spec_;
}

TaskNode TaskGraph::node(const std::string & node_id) const
{
  std::lock_guard lock(mutex_);
  return node_locked(node_id);
}

LifecycleState TaskGraph::state(const std::string & node_id) const
{
  std::lock_guard lock(mutex_);
  node_locked(node_id);
  return runtime_.at(node_id).state;
}

std::uint32_t TaskGraph::restart_count(const std::string & node_id) const
{
  std::lock_guard lock(mutex_);
  node_locked(node_id);
  return runtime_.at(node_id).restarts;
}

std::string TaskGraph::binding_label(const std::string & node_id) const
{
  std::lock_guard lock(mutex_);
  node_locked(node_id);
  return runtime_.at(node_id).label;
}

void TaskGraph::check_binding_locked(const TaskNode & n, const std::string & label) const
{
  const auto & d = registry_->descriptor(n.algorithm, n.algorithm_version);
  if (d.binding_requirement && *d.binding_requirement != label) {
    throw FswError(
      FswErrc::BindingConflict,
      "node '" + n.node_id + "' requires '" + *d.binding_requirement + "' but group '" + n.group_id +
      "' is bound to '" + label + "'");
  }
}

void TaskGraph::bind(const std::string & group_id, const std::string & compute_label)
{
  std::lock_guard lock(mutex_);
  auto git = spec_.groups.find(group_id);
  if (git == spec_.groups.end()) {
    throw FswError(FswErrc::UnknownGroup, "unknown group '" + group_id + "'");
  }
  for (const auto & n : spec_.nodes) {
    if (n.group_id != group_id) {
      continue;
    }
    const auto s = runtime_.at(n.node_id).state;
    if (s != LifecycleState::Created && s != LifecycleState::Configured) {
      throw FswError(FswErrc::BindingConflict, "group '" + group_id + "' is already started; binding is static");
    }
    check_binding_locked(n, compute_label);
  }
  git->second.binding_label = compute_label;
  for (const auto & n : spec_.nodes) {
    if (n.group_id == group_id) {
      runtime_.at(n.node_id).label = compute_label;
    }
  }
}

void TaskGraph::configure(const std::string & node_id, const Attributes & patch)
{
  std::lock_guard lock(mutex_);
  const TaskNode & n = node_locked(node_id);
  const auto s = runtime_.at(node_id).state;
  const bool started = s != LifecycleState::Created && s != LifecycleState::Configured;
  for (const auto & [key, value] : patch) {
    if (!n.config.contains(key)) {
      throw FswError(FswErrc::UnknownConfigKey, "node '" + node_id + "' has no config key '" + key + "'");
    }
    auto mode = n.config_mode.find(key);
    const bool dynamic = mode != n.config_mode.end() && mode->second == ConfigMode::Dynamic;
    if (started && !dynamic) {
      throw FswError(
        FswErrc::StaticKeyWhileRunning, "static key '" + key + "' of node '" + node_id + "' cannot change after start");
    }
  }
  auto & cfg = spec_.nodes[index_.at(node_id)].config;
  for (const auto & [key, value] : patch) {
    cfg[key] = value;
  }
}

void TaskGraph::transition_locked(const std::string & node_id, LifecycleState to, const std::string & reason)
{
  Runtime & rt = runtime_.at(node_id);
  const TaskNode & n = node_locked(node_id);
  const std::uint32_t limit = spec_.groups.at(n.group_id).restart_policy.max_restarts();
  if (!is_legal_transition(rt.state, to, rt.restarts, limit)) {
    throw FswError(
      FswErrc::IllegalTransition, "node '" + node_id + "': " + std::string(to_string(rt.state)) + " -> " +
      std::string(to_string(to)) + " is not permitted");
  }
  TransitionRecord rec{round_, node_id, rt.state, to, reason};
  rt.state = to;
  trace_.push_back(rec);
  pending_transitions_.push_back(std::move(rec));
}

void TaskGraph::start_node_locked(const std::string & node_id)
{
  Runtime & rt = runtime_.at(node_id);
  if (rt.state != LifecycleState::Created) {
    return;
  }
  const TaskNode & n = node_locked(node_id);
  rt.body = registry_->resolve(n.algorithm, n.algorithm_version)(n.config);
  transition_locked(node_id, LifecycleState::Configured, "configure");
  transition_locked(node_id, LifecycleState::Running, "start");
}

void TaskGraph::start()
{
  std::lock_guard lock(mutex_);
  for (const auto & [gid, g] : spec_.groups) {
    started_groups_.insert(gid);
  }
  for (const auto & id : topology_.order) {
    start_node_locked(id);
  }
}

void TaskGraph::start_group(const std::string & group_id)
{
  std::lock_guard lock(mutex_);
  if (!spec_.groups.contains(group_id)) {
    throw FswError(FswErrc::UnknownGroup, "unknown group '" + group_id + "'");
  }
  started_groups_.insert(group_id);
  for (const auto & id : topology_.order) {
    if (node_locked(id).group_id == group_id) {
      start_node_locked(id);
    }
  }
}

void TaskGraph::stop_group(const std::string & group_id)
{
  std::lock_guard lock(mutex_);
  if (!spec_.groups.contains(group_id)) {
    throw FswError(FswErrc::UnknownGroup, "unknown group '" + group_id + "'");
  }
  started_groups_.erase(group_id);
  for (const auto & id : topology_.order) {
    if (node_locked(id).group_id != group_id) {
      continue;
    }
    Runtime & rt = runtime_.at(id);
    if (rt.state == LifecycleState::Running || rt.state == LifecycleState::Failed) {
      transition_locked(id, LifecycleState::Stopped, "stop");
      rt.fresh.clear();
    }
  }
}

bool TaskGraph::group_started(const std::string & group_id) const
{
  std::lock_guard lock(mutex_);
  return started_groups_.contains(group_id);
}

LifecycleState TaskGraph::fail_locked(const std::string & node_id, const std::string & reason)
{
  transition_locked(node_id, LifecycleState::Failed, reason);
  Runtime & rt = runtime_.at(node_id);
  rt.fresh.clear();
  const std::uint32_t limit = spec_.groups.at(node_locked(node_id).group_id).restart_policy.max_restarts();
  if (rt.restarts < limit) {
    transition_locked(node_id, LifecycleState::Running, "restart");
    ++rt.restarts;
  }
  return rt.state;
}

LifecycleState TaskGraph::on_node_failure(const std::string & node_id, const std::string & reason)
{
  std::lock_guard lock(mutex_);
  if (runtime_locked(node_id).state != LifecycleState::Running) {
    throw FswError(FswErrc::IllegalTransition, "node '" + node_id + "' is not running");
  }
  return fail_locked(node_id, reason);
}

FiringReport TaskGraph::step(const std::map<std::string, Datum> & external_inputs)
{
  std::lock_guard lock(mutex_);
  ++round_;
  FiringReport report;
  report.round = round_;

  for (const auto & [topic, datum] : external_inputs) {
    if (!spec_.external_topics.contains(topic)) {
      continue;
    }
    auto it = consumers_.find(topic);
    if (it == consumers_.end()) {
      continue;
    }
    for (const auto & id : it->second) {
      Runtime & rt = runtime_.at(id);
      if (rt.state == LifecycleState::Running) {
        rt.fresh[topic] = datum;
      }
    }
  }

  for (const auto & id : topology_.order) {
    Runtime & rt = runtime_.at(id);
    if (rt.state != LifecycleState::Running) {
      continue;
    }
    const TaskNode & n = node_locked(id);
    if (!std::all_of(n.inputs.begin(), n.inputs.end(), [&](const std::string & t) {return rt.fresh.contains(t);})) {
      continue;
    }
    const std::map<std::string, Datum> inputs = std::exchange(rt.fresh, {});
    StepResult result;
    std::string fault;
    try {
      result = rt.body(StepContext{inputs, n.config, round_});
    } catch (const std::exception & e) {
      fault = std::string("fault: ") + e.what();
    }
    if (fault.empty() && result.elapsed_us > static_cast<std::int64_t>(n.watchdog_ms) * 1000) {
      fault = "watchdog: " + std::to_string(result.elapsed_us) + " us > " + std::to_string(n.watchdog_ms) + " ms";
    }
    if (fault.empty()) {
      for (const auto & [topic, datum] : result.outputs) {
        if (std::find(n.outputs.begin(), n.outputs.end(), topic) == n.outputs.end()) {
          fault = "fault: undeclared output '" + topic + "'";
          break;
        }
      }
    }
    report.fired.push_back({id, n.stage, result.elapsed_us, fault.empty()});
    if (!fault.empty()) {
      fail_locked(id, fault);
      continue;
    }
    for (auto & [topic, datum] : result.outputs) {
      auto it = consumers_.find(topic);
      if (it != consumers_.end()) {
        for (const auto & consumer : it->second) {
          Runtime & crt = runtime_.at(consumer);
          if (crt.state == LifecycleState::Running) {
            crt.fresh[topic] = datum;
          }
        }
      }
      report.produced.push_back({id, topic, std::move(datum)});
    }
  }
  report.transitions = std::exchange(pending_transitions_, {});
  return report;
}

void TaskGraph::add_service_node(const TaskNode & node)
{
  std::lock_guard lock(mutex_);
  if (node.stage != Stage::Service) {
    throw FswError(FswErrc::InvalidGraph, "only Service-stage nodes may be added at run time");
  }
  auto git = spec_.groups.find(node.group_id);
  if (git != spec_.groups.end() && !git->second.binding_label.empty()) {
    check_binding_locked(node, git->second.binding_label);
  }
  GraphSpec candidate = spec_;
  candidate.nodes.push_back(node);
  rebuild_locked(std::move(candidate));
  if (git != spec_.groups.end()) {
    runtime_.at(node.node_id).label = git->second.binding_label;
  }
  if (started_groups_.contains(node.group_id)) {
    start_node_locked(node.node_id);
  }
}

void TaskGraph::remove_service_node(const std::string & node_id)
{
  std::lock_guard lock(mutex_);
  const TaskNode & n = node_locked(node_id);
  if (n.stage != Stage::Service) {
    throw FswError(FswErrc::InvalidGraph, "only Service-stage nodes may be removed at run time");
  }
  GraphSpec candidate = spec_;
  std::erase_if(candidate.nodes, [&](const TaskNode & t) {return t.node_id == node_id;});
  // Validate before touching any state.
  analyze(candidate, *registry_);
  Runtime & rt = runtime_.at(node_id);
  if (rt.state == LifecycleState::Running || rt.state == LifecycleState::Failed) {
    transition_locked(node_id, LifecycleState::Stopped, "removed");
  }
  runtime_.erase(node_id);
  rebuild_locked(std::move(candidate));
}

void TaskGraph::swap_algorithm(const std::string & node_id, const std::string & version)
{
  std::lock_guard lock(mutex_);
  const TaskNode & n = node_locked(node_id);
  const auto & d = registry_->descriptor(n.algorithm, version);
  check_ports(n, d);
  const auto & label = runtime_.at(node_id).label;
  if (!label.empty() && d.binding_requirement && *d.binding_requirement != label) {
    throw FswError(FswErrc::BindingConflict, "version " + version + " cannot run on '" + label + "'");
  }
  GraphSpec candidate = spec_;
  candidate.nodes[index_.at(node_id)].algorithm_version = version;
  rebuild_locked(std::move(candidate));
  Runtime & rt = runtime_.at(node_id);
  const TaskNode & updated = node_locked(node_id);
  if (rt.state != LifecycleState::Created) {
    rt.body = registry_->resolve(updated.algorithm, updated.algorithm_version)(updated.config);
  }
}

std::vector<TransitionRecord> TaskGraph::trace() const
{
  std::lock_guard lock(mutex_);
  return trace_;
}

std::uint64_t TaskGraph::rounds() const
{
  std::lock_guard lock(mutex_);
  return round_;
}

}  // namespace dfp::funcsw
