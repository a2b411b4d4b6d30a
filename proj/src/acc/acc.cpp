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

#include "dfp/acc/acc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <utility>

namespace dfp::acc
{

namespace
{

void require(bool ok, const char * what)
{
  if (!ok) {
    throw std::invalid_argument(what);
  }
}

nlohmann::json state_json(const VehicleState & v)
{
  return {{"position", v.position}, {"speed", v.speed}, {"accel", v.accel}};
}

middleware::QoSProfile pipeline_qos()
{
  return {middleware::Reliability::Reliable, middleware::History::keep_last(4), middleware::Durability::Volatile,
    std::nullopt};
}

}  // namespace

void validate(const AccConfig & cfg)
{
  require(cfg.standstill_gap > 0.0, "standstill_gap must be positive");
  require(cfg.time_headway > 0.0, "time_headway must be positive");
  require(cfg.accel_min < 0.0, "accel_min must be negative");
  require(cfg.accel_max > 0.0, "accel_max must be positive");
  require(std::isfinite(cfg.kp) && std::isfinite(cfg.kv), "gains must be finite");
}

double desired_gap(const AccConfig & cfg, double ego_speed)
{
  return cfg.standstill_gap + cfg.time_headway * ego_speed;
}

double acc_unsaturated(const AccConfig & cfg, double gap, double v_ego, double v_lead)
{
  return cfg.kp * (gap - desired_gap(cfg, v_ego)) + cfg.kv * (v_lead - v_ego);
}

double saturate(const AccConfig & cfg, double accel)
{
  return std::clamp(accel, cfg.accel_min, cfg.accel_max);
}

double acc_command(const AccConfig & cfg, double gap, double v_ego, double v_lead)
{
  return saturate(cfg, acc_unsaturated(cfg, gap, v_ego, v_lead));
}

void validate(const Scenario & s)
{
  require(s.dt > 0.0 && std::isfinite(s.dt), "dt must be positive");
  require(s.duration >= 0.0 && std::isfinite(s.duration), "duration must be non-negative");
  require(s.lead.position > s.ego.position, "lead must start ahead of ego");
  require(s.ego.speed >= 0.0 && s.lead.speed >= 0.0, "speeds must be non-negative");
  for (const auto & st : s.lead_profile) {
    require(st.speed >= 0.0 && std::isfinite(st.speed), "profile speeds must be non-negative");
  }
}

double lead_speed_at(const Scenario & s, double t)
{
  double v = s.lead.speed;
  double start = -std::numeric_limits<double>::infinity();
  for (const auto & st : s.lead_profile) {
    if (st.t_start <= t && st.t_start >= start) {
      v = st.speed;
      start = st.t_start;
    }
  }
  return v;
}

nlohmann::json TrajectoryPoint::to_json() const
{
  nlohmann::json j{{"t", t}, {"ego", state_json(ego)}, {"lead", state_json(lead)}, {"gap", gap}};
  j["command"] = command ? nlohmann::json(*command) : nlohmann::json(nullptr);
  return j;
}

std::string SimulationResult::trajectory_json_lines() const
{
  std::string out;
  for (const auto & p : trajectory) {
    out += p.to_json().dump();
    out += '\n';
  }
  return out;
}

double SimulationResult::min_gap() const
{
  double m = std::numeric_limits<double>::infinity();
  for (const auto & p : trajectory) {
    m = std::min(m, p.gap);
  }
  return m;
}

double SimulationResult::final_gap_error(const AccConfig & cfg) const
{
  if (trajectory.empty()) {
    return 0.0;
  }
  const auto & p = trajectory.back();
  return p.gap - desired_gap(cfg, p.ego.speed);
}

void register_algorithms(funcsw::AlgorithmRegistry & registry, envmodel::EnvStore & env, const AccConfig & cfg)
{
  validate(cfg);
  envmodel::EnvStore * store = &env;
  registry.register_algorithm(
    {"acc_planner", "1.0.0", "builtin:acc_planner", {"env", "ego"}, {"plan"}, std::nullopt},
    [store, cfg](const Attributes &) -> funcsw::StepFn {
      return [store, cfg](const funcsw::StepContext & ctx) {
               const std::string env_topic = *get_string(ctx.config, "env_topic");
               const funcsw::Datum & rec = ctx.inputs.at(env_topic);
               const funcsw::Datum & ego = ctx.inputs.at(kEgoTopic);
               const auto ts = static_cast<std::int64_t>(*get_number(rec, "timestamp_ns"));
               const double v_ego = get_number(ego, "speed").value_or(0.0);

               envmodel::OddQuery q;
               q.tokens = {"lead", "vehicle"};
               q.class_filter = envmodel::RecordClass::Object;
               q.time_range = std::make_pair(ts, ts);
               const auto hits = store->query(q);

               funcsw::Datum plan{{"v_ego", v_ego}, {"desired_gap", desired_gap(cfg, v_ego)}, {"timestamp_ns", ts}};
               if (hits.empty()) {
                 plan["lead"] = false;
                 plan["accel_unsat"] = 0.0;
               } else {
                 const double gap = get_number(hits.front().attributes, "range_m").value_or(0.0);
                 const double rate = get_number(hits.front().attributes, "range_rate_mps").value_or(0.0);
                 const double v_lead = v_ego + rate;
                 plan["lead"] = true;
                 plan["gap"] = gap;
                 plan["v_lead"] = v_lead;
                 plan["accel_unsat"] = acc_unsaturated(cfg, gap, v_ego, v_lead);
               }
               funcsw::StepResult r;
               r.outputs[*get_string(ctx.config, "out")] = std::move(plan);
               r.elapsed_us = 150;
               return r;
             };
    });
  registry.register_algorithm(
    {"acc_control", "1.0.0", "builtin:acc_control", {"plan"}, {"command"}, std::nullopt},
    [cfg](const Attributes &) -> funcsw::StepFn {
      return [cfg](const funcsw::StepContext & ctx) {
               const funcsw::Datum & plan = ctx.inputs.at(kPlanTopic);
               const double a = saturate(cfg, get_number(plan, "accel_unsat").value_or(0.0));
               funcsw::StepResult r;
               r.outputs[*get_string(ctx.config, "out")] = {
                 {"accel", a}, {"timestamp_ns", static_cast<std::int64_t>(*get_number(plan, "timestamp_ns"))}};
               r.elapsed_us = 40;
               return r;
             };
    });
}

funcsw::GraphSpec pipeline(const std::string & radar_id)
{
  const std::string radar_topic = platform::device_topic(radar_id);
  const std::string env_topic = "env/" + radar_id;
  funcsw::GraphSpec g;
  g.external_topics = {radar_topic, kEgoTopic};
  g.groups[kPerceptionGroup] = {"compute-unit", funcsw::RestartPolicy::up_to(1)};
  g.groups[kControlGroup] = {"control-unit", funcsw::RestartPolicy::never()};

  funcsw::TaskNode ingest;
  ingest.node_id = "env_ingest";
  ingest.stage = funcsw::Stage::Abstraction;
  ingest.inputs = {radar_topic};
  ingest.outputs = {env_topic};
  ingest.group_id = kPerceptionGroup;
  ingest.config = {{"out", env_topic}};
  ingest.watchdog_ms = 20;
  ingest.algorithm = platform::kEnvIngestAlgorithm;
  ingest.algorithm_version = platform::kEnvIngestVersion;

  funcsw::TaskNode planner;
  planner.node_id = kPlannerNode;
  planner.stage = funcsw::Stage::PreProcessing;
  planner.inputs = {env_topic, kEgoTopic};
  planner.outputs = {kPlanTopic};
  planner.group_id = kPerceptionGroup;
  planner.config = {{"env_topic", env_topic}, {"out", std::string(kPlanTopic)}};
  planner.watchdog_ms = 20;
  planner.algorithm = "acc_planner";
  planner.algorithm_version = "1.0.0";

  funcsw::TaskNode control;
  control.node_id = kControlNode;
  control.stage = funcsw::Stage::Service;
  control.inputs = {kPlanTopic};
  control.outputs = {kCommandTopic};
  control.group_id = kControlGroup;
  control.config = {{"out", std::string(kCommandTopic)}};
  control.watchdog_ms = 10;
  control.algorithm = "acc_control";
  control.algorithm_version = "1.0.0";

  g.nodes = {ingest, planner, control};
  return g;
}

void declare_topics(platform::Platform & p)
{
  for (const char * t : {kEgoTopic, kPlanTopic, kCommandTopic}) {
    p.declare_topic(platform::attributes_topic(t, pipeline_qos()));
  }
}

std::vector<modemgr::FsmDefinition> default_fsms()
{
  using modemgr::Action;
  modemgr::FsmDefinition ads;
  ads.fsm_id = "ads";
  ads.states = {"Off", "Standby", "Active", "Fallback"};
  ads.initial = "Off";
  const modemgr::Guard healthy{{"health", "Ok"}};
  ads.transitions = {
    {"Off", "driver_engage", healthy, "Standby", {Action::start_group(kPerceptionGroup)}},
    {"Standby", "activate", healthy, "Active", {Action::start_group(kControlGroup)}},
    {"Active", "fallback", std::nullopt, "Fallback", {Action::stop_group(kControlGroup)}},
    {"Standby", "driver_takeover", std::nullopt, "Off", {Action::stop_group(kPerceptionGroup)}},
    {"Active", "driver_takeover", std::nullopt, "Off",
      {Action::stop_group(kControlGroup), Action::stop_group(kPerceptionGroup)}},
    {"Fallback", "driver_takeover", std::nullopt, "Off", {Action::stop_group(kPerceptionGroup)}},
  };
  modemgr::FsmDefinition health;
  health.fsm_id = "health";
  health.states = {"Ok", "Degraded", "Fault"};
  health.initial = "Ok";
  health.transitions = {
    {"Ok", "degrade", std::nullopt, "Degraded", {}},
    {"Degraded", "recover", std::nullopt, "Ok", {}},
    {"Ok", "fault", std::nullopt, "Fault", {Action::emit("ads", "fallback")}},
    {"Degraded", "fault", std::nullopt, "Fault", {Action::emit("ads", "fallback")}},
  };
  return {ads, health};
}

AccSession::AccSession(platform::Platform & p, Scenario scenario, AccConfig cfg, const std::string & radar_id)
: p_(p), s_(std::move(scenario)), cfg_(cfg),
  ego_(std::make_shared<VehicleState>(s_.ego)),
  lead_(std::make_shared<VehicleState>(s_.lead))
{
  validate(s_);
  validate(cfg_);
  p_.attach_radar_scene(
    radar_id, [ego = ego_, lead = lead_](std::int64_t) -> std::optional<platform::RadarTruth> {
      return platform::RadarTruth{lead->position - ego->position, lead->speed - ego->speed, 0.0};
    });
  ego_pub_ = p_.participant().create_publisher(platform::attributes_topic(kEgoTopic, pipeline_qos()));
  cmd_sub_ = p_.participant().create_subscriber(platform::attributes_topic(kCommandTopic, pipeline_qos()));
  // Let discovery match the new endpoints before the first sample.
  p_.domain().spin_some();
  events_done_.assign(s_.mode_events.size(), false);
  steps_total_ = static_cast<std::uint64_t>(std::llround(s_.duration / s_.dt));
}

double AccSession::time() const
{
  return static_cast<double>(k_) * s_.dt;
}

bool AccSession::step()
{
  if (done_ || k_ >= steps_total_) {
    done_ = true;
    return false;
  }
  const double t = time();
  for (std::size_t i = 0; i < s_.mode_events.size(); ++i) {
    if (!events_done_[i] && s_.mode_events[i].t <= t + 1e-9) {
      events_done_[i] = true;
      p_.modes().dispatch(s_.mode_events[i].fsm, s_.mode_events[i].event);
    }
  }

  ego_pub_.publish(platform::encode({
      {"t_ns", static_cast<std::int64_t>(std::llround(t * 1e9))},
      {"position", ego_->position},
      {"speed", ego_->speed}}));
  p_.step();

  std::optional<double> command;
  auto samples = cmd_sub_.take(static_cast<std::size_t>(-1));
  result_.commands_received += samples.size();
  if (!samples.empty()) {
    command = get_number(platform::decode(samples.back().payload.bytes()), "accel");
  }
  const double a = command.value_or(0.0);
  ego_->accel = a;

  TrajectoryPoint pt{t, *ego_, *lead_, lead_->position - ego_->position, command};
  result_.trajectory.push_back(pt);

  // Speed first, then position with the new speed. The lead holds the
  // profile value in force at the start of the interval, so its position is
  // exact on the grid.
  const double dt = s_.dt;
  ego_->speed = std::max(0.0, ego_->speed + a * dt);
  ego_->position += ego_->speed * dt;
  const double v_lead = lead_speed_at(s_, t + 1e-9 * dt);
  lead_->accel = (v_lead - lead_->speed) / dt;
  lead_->speed = v_lead;
  lead_->position += lead_->speed * dt;
  ++k_;

  const double gap = lead_->position - ego_->position;
  if (gap <= 0.0) {
    result_.collision = true;
    result_.trajectory.push_back({time(), *ego_, *lead_, gap, std::nullopt});
    done_ = true;
    return false;
  }
  return true;
}

SimulationResult AccSession::run()
{
  while (step()) {
  }
  return result_;
}

std::unique_ptr<platform::Platform> default_platform(const Scenario & scenario, const AccConfig & cfg, std::uint64_t seed)
{
  validate(scenario);
  validate(cfg);
  const auto step_ns = std::llround(scenario.dt * 1e9);
  if (step_ns <= 0) {
    throw std::invalid_argument("dt below one nanosecond");
  }
  auto p = std::make_unique<platform::Platform>(platform::PlatformOptions{seed, step_ns});
  p->add_radar(kRadarId, 1.0 / scenario.dt, seed);
  declare_topics(*p);
  register_algorithms(p->algorithms(), p->env(), cfg);
  p->build(pipeline(kRadarId));
  p->load_fsms(default_fsms());
  return p;
}

SimulationResult simulate(const Scenario & scenario, const AccConfig & cfg, std::uint64_t seed)
{
  auto p = default_platform(scenario, cfg, seed);
  AccSession session(*p, scenario, cfg, kRadarId);
  return session.run();
}

}  // namespace dfp::acc
