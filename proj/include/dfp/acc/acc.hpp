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

#ifndef DFP__ACC__ACC_HPP_
#define DFP__ACC__ACC_HPP_

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "dfp/funcsw/types.hpp"
#include "dfp/modemgr/fsm.hpp"
#include "dfp/platform/platform.hpp"

namespace dfp::acc
{

struct AccConfig
{
  double standstill_gap = 2.0;
  double time_headway = 1.5;
  double kp = 0.18;
  double kv = 0.8;
  double accel_min = -3.5;
  double accel_max = 2.0;
};

/// Throws std::invalid_argument naming the first bad field.
void validate(const AccConfig & cfg);

/// standstill_gap + time_headway * ego_speed
double desired_gap(const AccConfig & cfg, double ego_speed);
/// Gap and rate feedback before saturation.
double acc_unsaturated(const AccConfig & cfg, double gap, double v_ego, double v_lead);
double saturate(const AccConfig & cfg, double accel);
double acc_command(const AccConfig & cfg, double gap, double v_ego, double v_lead);

struct VehicleState
{
  double position = 0.0;
  double speed = 0.0;
  double accel = 0.0;

  bool operator==(const VehicleState &) const = default;
};

struct SpeedStep
{
  double t_start = 0.0;
  double speed = 0.0;
};

struct ModeEvent
{
  double t = 0.0;
  std::string fsm;
  std::string event;
};

struct Scenario
{
  VehicleState ego;
  VehicleState lead;
  /// Piecewise-constant lead speed; before the first step the lead keeps
  /// its initial speed.
  std::vector<SpeedStep> lead_profile;
  double dt = 0.05;
  double duration = 120.0;
  /// Defaults to engaging and activating the ADS at t = 0.
  std::vector<ModeEvent> mode_events = {{0.0, "ads", "driver_engage"}, {0.0, "ads", "activate"}};
};

/// Throws std::invalid_argument.
void validate(const Scenario & s);
double lead_speed_at(const Scenario & s, double t);

struct TrajectoryPoint
{
  double t = 0.0;
  VehicleState ego;
  VehicleState lead;
  double gap = 0.0;
  /// Acceleration applied over the next interval; nullopt when no command
  /// arrived and the ego coasted.
  std::optional<double> command;

  nlohmann::json to_json() const;
};

struct SimulationResult
{
  std::vector<TrajectoryPoint> trajectory;
  bool collision = false;
  std::uint64_t commands_received = 0;

  /// One JSON object per line.
  std::string trajectory_json_lines() const;
  double min_gap() const;
  /// gap - desired_gap at the last point.
  double final_gap_error(const AccConfig & cfg) const;
};

// Topic and node names of the ACC pipeline.
inline constexpr const char * kEgoTopic = "ego/state";
inline constexpr const char * kPlanTopic = "acc/plan";
inline constexpr const char * kCommandTopic = "acc/command";
inline constexpr const char * kPlannerNode = "acc_planner";
inline constexpr const char * kControlNode = "acc_control";
inline constexpr const char * kPerceptionGroup = "perception";
inline constexpr const char * kControlGroup = "control";

/// Registers "acc_planner" and "acc_control" 1.0.0. The planner reads the
/// lead vehicle from `env` by querying the records stamped with the
/// incoming frame time.
void register_algorithms(funcsw::AlgorithmRegistry & registry, envmodel::EnvStore & env, const AccConfig & cfg);

/// env ingest -> planner -> control, reading `radar_id`'s frames.
funcsw::GraphSpec pipeline(const std::string & radar_id);
/// Declares ego, plan and command topics.
void declare_topics(platform::Platform & p);

/// "ads" (Off, Standby, Active, Fallback) and "health" (Ok, Degraded, Fault).
/// The ADS starts perception on engage, control on activate, stops control
/// on fallback and everything on takeover.
std::vector<modemgr::FsmDefinition> default_fsms();

/// Closed loop on an assembled platform. The radar sees the simulated
/// world; the ego state is published each round and the newest command is
/// integrated.
class AccSession
{
public:
  /// The platform must be built, with `radar_id` registered and the pipeline
  /// topics declared.
  AccSession(platform::Platform & p, Scenario scenario, AccConfig cfg, const std::string & radar_id);

  /// One round. False once the run is over (duration reached or collision).
  bool step();
  SimulationResult run();

  const SimulationResult & result() const {return result_;}
  double time() const;
  std::uint64_t round() const {return k_;}

private:
  platform::Platform & p_;
  Scenario s_;
  AccConfig cfg_;
  std::shared_ptr<VehicleState> ego_;
  std::shared_ptr<VehicleState> lead_;
  middleware::Publisher ego_pub_;
  middleware::Subscriber cmd_sub_;
  std::vector<bool> events_done_;
  std::uint64_t k_ = 0;
  std::uint64_t steps_total_ = 0;
  bool done_ = false;
  SimulationResult result_;
};

inline constexpr const char * kRadarId = "radar_front";

/// Assembles the default system (radar, pipeline, FSMs) and runs the
/// scenario. Throws std::invalid_argument on an invalid scenario or config.
SimulationResult simulate(const Scenario & scenario, const AccConfig & cfg = {}, std::uint64_t seed = 0);

/// Assembles the default system without running it.
std::unique_ptr<platform::Platform> default_platform(const Scenario & scenario, const AccConfig & cfg, std::uint64_t seed);

}  // namespace dfp::acc

#endif  // DFP__ACC__ACC_HPP_
