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

#ifndef DFP__MODEMGR__COORDINATOR_HPP_
#define DFP__MODEMGR__COORDINATOR_HPP_

#include <functional>
#include <map>
#include <mutex>
#include <set>
#include <shared_mutex>
#include <string>
#include <vector>

#include "dfp/funcsw/graph.hpp"
#include "dfp/modemgr/fsm.hpp"

namespace dfp::modemgr
{

/// Receives StartGroup / StopGroup actions once a dispatch has settled.
using GroupSink = std::function<void(const Action &)>;

struct DispatchResult
{
  SystemMode mode;
  /// Every action of every fired transition, in firing order.
  std::vector<Action> actions;
  std::vector<TraceEntry> trace;
};

/// System-mode coordinator. Dispatches are serialized. A dispatch works on a
/// private copy of the mode and publishes it only once the event queue is
/// empty, so snapshot() sees either the state before or after a dispatch.
class Coordinator
{
public:
  /// `groups` are the group ids StartGroup/StopGroup may name.
  explicit Coordinator(std::set<std::string> groups = {}, GroupSink sink = {});

  /// Replaces all definitions and enters every initial state. Throws
  /// ModeError{InvalidDefinition | UnknownStateRef | UnknownFsmRef |
  /// UnknownGroupRef | DuplicateFsmId}; nothing changes on error.
  SystemMode load(const std::vector<FsmDefinition> & defs);

  /// Throws ModeError{UnknownFsm} or CascadeOverflowError.
  DispatchResult dispatch(const std::string & fsm_id, const std::string & event);

  SystemMode snapshot() const;
  /// All entries of successful dispatches since load.
  std::vector<TraceEntry> trace() const;
  std::size_t trace_length() const;

private:
  std::set<std::string> groups_;
  GroupSink sink_;
  std::map<std::string, FsmDefinition> defs_;
  std::vector<TraceEntry> trace_;
  std::uint64_t steps_ = 0;
  SystemMode mode_;

  mutable std::mutex dispatch_mutex_;
  mutable std::shared_mutex mode_mutex_;
};

/// Group ids of a task graph plus a sink that starts and stops them.
std::set<std::string> group_ids(const funcsw::TaskGraph & graph);
GroupSink task_graph_sink(funcsw::TaskGraph & graph);

}  // namespace dfp::modemgr

#endif  // DFP__MODEMGR__COORDINATOR_HPP_
