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

#include "dfp/modemgr/coordinator.hpp"

#include <deque>
#include <utility>

namespace dfp::modemgr
{

namespace
{

bool guard_holds(const std::optional<Guard> & guard, const SystemMode & mode)
{
  if (!guard) {
    return true;
  }
  for (const auto & [fsm, state] : *guard) {
    auto it = mode.find(fsm);
    if (it == mode.end() || it->second != state) {
      return false;
    }
  }
  return true;
}

}  // namespace

Coordinator::Coordinator(std::set<std::string> groups, GroupSink sink)
: groups_(std::move(groups)), sink_(std::move(sink))
{
}

SystemMode Coordinator::load(const std::vector<FsmDefinition> & defs)
{
  if (defs.empty()) {
    throw ModeError(ModeErrc::InvalidDefinition, "no FSM definitions");
  }
  std::map<std::string, FsmDefinition> next;
  for (const auto & d : defs) {
    if (d.fsm_id.empty()) {
      throw ModeError(ModeErrc::InvalidDefinition, "FSM with empty id");
    }
    if (d.states.empty()) {
      throw ModeError(ModeErrc::InvalidDefinition, "FSM '" + d.fsm_id + "' has no states");
    }
    if (!next.emplace(d.fsm_id, d).second) {
      throw ModeError(ModeErrc::DuplicateFsmId, "duplicate FSM id '" + d.fsm_id + "'");
    }
  }
  for (const auto & [id, d] : next) {
    auto state_ref = [&](const std::string & s, const std::string & what) {
        if (!d.states.contains(s)) {
          throw ModeError(ModeErrc::UnknownStateRef, "FSM '" + id + "': " + what + " '" + s + "' is not a state");
        }
      };
    state_ref(d.initial, "initial state");
    for (const auto & t : d.transitions) {
      state_ref(t.from, "transition source");
      state_ref(t.to, "transition target");
      if (t.guard) {
        for (const auto & [fsm, state] : *t.guard) {
          auto other = next.find(fsm);
          if (other == next.end()) {
            throw ModeError(ModeErrc::UnknownFsmRef, "FSM '" + id + "': guard names unknown FSM '" + fsm + "'");
          }
          if (!other->second.states.contains(state)) {
            throw ModeError(
              ModeErrc::UnknownStateRef, "FSM '" + id + "': guard expects '" + fsm + "' in unknown state '" + state + "'");
          }
        }
      }
      for (const auto & a : t.actions) {
        if (a.kind == Action::Kind::EmitEvent) {
          if (!next.contains(a.target_fsm)) {
            throw ModeError(
              ModeErrc::UnknownFsmRef, "FSM '" + id + "': action emits to unknown FSM '" + a.target_fsm + "'");
          }
        } else if (!groups_.contains(a.group_id)) {
          throw ModeError(ModeErrc::UnknownGroupRef, "FSM '" + id + "': action names unknown group '" + a.group_id + "'");
        }
      }
    }
  }

  std::lock_guard dispatch_lock(dispatch_mutex_);
  SystemMode mode;
  for (const auto & [id, d] : next) {
    mode[id] = d.initial;
  }
  defs_ = std::move(next);
  trace_.clear();
  steps_ = 0;
  std::unique_lock lock(mode_mutex_);
  mode_ = mode;
  return mode;
}

DispatchResult Coordinator::dispatch(const std::string & fsm_id, const std::string & event)
{
  std::lock_guard dispatch_lock(dispatch_mutex_);
  if (!defs_.contains(fsm_id)) {
    throw ModeError(ModeErrc::UnknownFsm, "no FSM named '" + fsm_id + "'");
  }
  DispatchResult result;
  {
    std::shared_lock lock(mode_mutex_);
    result.mode = mode_;
  }
  struct Pending
  {
    std::string fsm;
    std::string event;
    std::uint32_t depth;
  };
  std::deque<Pending> queue{{fsm_id, event, 0}};
  std::uint32_t chained = 0;
  std::uint64_t step = steps_;
  while (!queue.empty()) {
    Pending p = std::move(queue.front());
    queue.pop_front();
    if (p.depth > 0 && ++chained > kMaxCascade) {
      throw CascadeOverflowError(kMaxCascade);
    }
    const FsmDefinition & def = defs_.at(p.fsm);
    std::string & current = result.mode.at(p.fsm);
    TraceEntry entry{++step, p.depth, p.fsm, p.event, current, current, -1, {}};
    for (std::size_t i = 0; i < def.transitions.size(); ++i) {
      const Transition & t = def.transitions[i];
      if (t.from != current || t.event != p.event || !guard_holds(t.guard, result.mode)) {
        continue;
      }
      entry.transition = static_cast<int>(i);
      entry.to = t.to;
      entry.actions = t.actions;
      current = t.to;
      for (const auto & a : t.actions) {
        result.actions.push_back(a);
        if (a.kind == Action::Kind::EmitEvent) {
          queue.push_back({a.target_fsm, a.event, p.depth + 1});
        }
      }
      break;
    }
    result.trace.push_back(std::move(entry));
  }

  steps_ = step;
  trace_.insert(trace_.end(), result.trace.begin(), result.trace.end());
  {
    std::unique_lock lock(mode_mutex_);
    mode_ = result.mode;
  }
  if (sink_) {
    for (const auto & a : result.actions) {
      if (a.kind != Action::Kind::EmitEvent) {
        sink_(a);
      }
    }
  }
  return result;
}

SystemMode Coordinator::snapshot() const
{
  std::shared_lock lock(mode_mutex_);
  return mode_;
}

std::vector<TraceEntry> Coordinator::trace() const
{
  std::lock_guard lock(dispatch_mutex_);
  return trace_;
}

std::size_t Coordinator::trace_length() const
{
  std::lock_guard lock(dispatch_mutex_);
  return trace_.size();
}

std::set<std::string> group_ids(const funcsw::TaskGraph & graph)
{
  std::set<std::string> out;
  for (const auto & [gid, g] : graph.spec().groups) {
    out.insert(gid);
  }
  return out;
}

GroupSink task_graph_sink(funcsw::TaskGraph & graph)
{
  return [&graph](const Action & a) {
           if (a.kind == Action::Kind::StartGroup) {
             graph.start_group(a.group_id);
           } else if (a.kind == Action::Kind::StopGroup) {
             graph.stop_group(a.group_id);
           }
         };
}

}  // namespace dfp::modemgr
