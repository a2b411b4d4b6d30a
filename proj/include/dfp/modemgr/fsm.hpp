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

#ifndef DFP__MODEMGR__FSM_HPP_
#define DFP__MODEMGR__FSM_HPP_

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"

#include "dfp/common/error.hpp"

namespace dfp::modemgr
{

enum class ModeErrc
{
  InvalidDefinition,
  UnknownStateRef,
  UnknownFsmRef,
  UnknownGroupRef,
  DuplicateFsmId,
  UnknownFsm,
  CascadeOverflow,
};

using ModeError = Error<ModeErrc>;

/// Most chained events one dispatch may process after the external one.
inline constexpr std::uint32_t kMaxCascade = 1000;

/// Thrown when a dispatch would exceed kMaxCascade chained events. The
/// coordinator is left exactly as it was before the dispatch.
class CascadeOverflowError : public ModeError
{
public:
  explicit CascadeOverflowError(std::uint32_t depth);
  std::uint32_t depth() const noexcept {return depth_;}

private:
  std::uint32_t depth_;
};

/// Conjunction of (fsm_id == state) literals.
using Guard = std::map<std::string, std::string>;

struct Action
{
  enum class Kind
  {
    StartGroup,
    StopGroup,
    EmitEvent,
  };

  Kind kind = Kind::EmitEvent;
  /// StartGroup / StopGroup.
  std::string group_id;
  /// EmitEvent.
  std::string target_fsm;
  std::string event;

  static Action start_group(std::string g) {return {Kind::StartGroup, std::move(g), {}, {}};}
  static Action stop_group(std::string g) {return {Kind::StopGroup, std::move(g), {}, {}};}
  static Action emit(std::string fsm, std::string ev) {return {Kind::EmitEvent, {}, std::move(fsm), std::move(ev)};}

  bool operator==(const Action &) const = default;
};

struct Transition
{
  std::string from;
  std::string event;
  std::optional<Guard> guard;
  std::string to;
  std::vector<Action> actions;
};

struct FsmDefinition
{
  std::string fsm_id;
  std::set<std::string> states;
  std::string initial;
  /// Declaration order is priority order.
  std::vector<Transition> transitions;
};

/// fsm_id -> current state.
using SystemMode = std::map<std::string, std::string>;

/// One processed event. `transition` is the index of the transition that
/// fired, or -1 when the event was ignored.
struct TraceEntry
{
  std::uint64_t step = 0;
  std::uint32_t depth = 0;
  std::string fsm_id;
  std::string event;
  std::string from;
  std::string to;
  int transition = -1;
  std::vector<Action> actions;

  nlohmann::json to_json() const;
};

nlohmann::json to_json(const Action & a);
nlohmann::json to_json(const FsmDefinition & d);

/// Parses one entry of the `fsms` array:
///
///   {"id": "ads", "states": [...], "initial": "Off",
///    "transitions": [{"from", "event", "guard": {"health": "Ok"}, "to",
///                     "actions": [{"start_group": g} | {"stop_group": g} |
///                                 {"emit": {"fsm": f, "event": e}}]}]}
///
/// Throws ModeError{InvalidDefinition}.
FsmDefinition fsm_from_json(const nlohmann::json & j);

}  // namespace dfp::modemgr

#endif  // DFP__MODEMGR__FSM_HPP_
