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

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "dfp/acc/acc.hpp"
#include "support/acc_oracle.hpp"

namespace acc = dfp::acc;

namespace
{

acc::Scenario lead_step()
{
  acc::Scenario s;
  s.ego = {0.0, 25.0, 0.0};
  s.lead = {39.5, 25.0, 0.0};
  s.lead_profile = {{10.0, 15.0}};
  s.dt = 0.05;
  s.duration = 120.0;
  return s;
}

oracle::FollowCase as_case(const acc::Scenario & s)
{
  oracle::FollowCase c{s.ego.position, s.ego.speed, s.lead.position, s.lead.speed, {}, s.duration};
  for (const auto & st : s.lead_profile) {
    c.profile.emplace_back(st.t_start, st.speed);
  }
  return c;
}

}  // namespace

TEST(AccLaw, DesiredGap)
{
  const acc::AccConfig d;
  EXPECT_DOUBLE_EQ(acc::desired_gap(d, 20.0), 32.0);
  EXPECT_DOUBLE_EQ(acc::desired_gap(d, 0.0), 2.0);
  acc::AccConfig h;
  h.time_headway = 2.0;
  EXPECT_DOUBLE_EQ(acc::desired_gap(h, 10.0), 22.0);
}

TEST(AccLaw, CommandAndSaturation)
{
  const acc::AccConfig d;
  EXPECT_DOUBLE_EQ(acc::acc_command(d, 32.0, 20.0, 20.0), 0.0);
  EXPECT_DOUBLE_EQ(acc::acc_command(d, 1.0, 30.0, 0.0), d.accel_min);
  EXPECT_DOUBLE_EQ(acc::acc_command(d, 500.0, 0.0, 30.0), d.accel_max);
  EXPECT_NEAR(acc::acc_command(d, 40.0, 20.0, 18.0), -0.16, 1e-12);
}

TEST(AccLaw, ConfigAndScenarioValidation)
{
  acc::AccConfig c;
  EXPECT_NO_THROW(acc::validate(c));
  c.standstill_gap = 0.0;
  EXPECT_THROW(acc::validate(c), std::invalid_argument);
  c = {};
  c.accel_min = 0.5;
  EXPECT_THROW(acc::validate(c), std::invalid_argument);
  c = {};
  c.time_headway = -1.0;
  EXPECT_THROW(acc::validate(c), std::invalid_argument);

  auto s = lead_step();
  s.dt = 0.0;
  EXPECT_THROW(acc::validate(s), std::invalid_argument);
  s = lead_step();
  s.lead.position = -1.0;
  EXPECT_THROW(acc::validate(s), std::invalid_argument);
  EXPECT_THROW(acc::simulate(s), std::invalid_argument);
}

TEST(AccLaw, LeadProfileLookup)
{
  auto s = lead_step();
  s.lead_profile = {{20.0, 5.0}, {10.0, 15.0}};
  EXPECT_DOUBLE_EQ(acc::lead_speed_at(s, 0.0), 25.0);
  EXPECT_DOUBLE_EQ(acc::lead_speed_at(s, 10.0), 15.0);
  EXPECT_DOUBLE_EQ(acc::lead_speed_at(s, 19.9), 15.0);
  EXPECT_DOUBLE_EQ(acc::lead_speed_at(s, 25.0), 5.0);
}

TEST(AccSim, EquilibriumGapStaysConstant)
{
  acc::Scenario s;
  s.ego = {0.0, 20.0, 0.0};
  s.lead = {32.0, 20.0, 0.0};
  s.duration = 30.0;
  const auto r = acc::simulate(s);
  ASSERT_FALSE(r.collision);
  ASSERT_EQ(r.trajectory.size(), 600u);
  for (const auto & p : r.trajectory) {
    EXPECT_NEAR(p.gap, 32.0, 1e-9) << "t=" << p.t;
    EXPECT_NEAR(p.ego.speed, 20.0, 1e-9);
  }
}

TEST(AccSim, LeadStepSettlesToTheDesiredGap)
{
  const acc::AccConfig cfg;
  const auto r = acc::simulate(lead_step(), cfg);
  ASSERT_FALSE(r.collision);
  ASSERT_EQ(r.trajectory.size(), 2400u);
  EXPECT_GT(r.min_gap(), 0.0);
  for (const auto & p : r.trajectory) {
    EXPECT_TRUE(p.command.has_value()) << "t=" << p.t;
    if (p.t > 70.0) {
      ASSERT_LT(std::abs(p.gap - acc::desired_gap(cfg, p.ego.speed)), 0.5) << "t=" << p.t;
    }
  }
}

TEST(AccSim, StackMatchesTheSameStepOracle)
{
  // Same step size: the full stack must reproduce the plain integrator.
  const auto s = lead_step();
  const auto r = acc::simulate(s);
  const auto ref = oracle::integrate_following(as_case(s), {}, s.dt, 1);
  ASSERT_EQ(ref.size(), r.trajectory.size());
  for (std::size_t i = 0; i < ref.size(); ++i) {
    ASSERT_NEAR(r.trajectory[i].gap, ref[i].gap, 1e-6) << "t=" << ref[i].t;
    ASSERT_NEAR(r.trajectory[i].ego.position, ref[i].ego_x, 1e-6) << "t=" << ref[i].t;
  }
}

TEST(AccSim, AgreesWithTenfoldFinerIntegration)
{
  const auto s = lead_step();
  const auto r = acc::simulate(s);
  const auto fine = oracle::integrate_following(as_case(s), {}, s.dt / 10.0, 10);
  ASSERT_EQ(fine.size(), r.trajectory.size());
  double worst = 0.0;
  for (std::size_t i = 0; i < fine.size(); ++i) {
    worst = std::max(worst, std::abs(r.trajectory[i].ego.position - fine[i].ego_x));
    worst = std::max(worst, std::abs(r.trajectory[i].gap - fine[i].gap));
  }
  EXPECT_LT(worst, 0.1) << "largest position difference " << worst << " m";
}

TEST(AccSim, RunsAreByteIdentical)
{
  const auto a = acc::simulate(lead_step(), {}, 42);
  const auto b = acc::simulate(lead_step(), {}, 42);
  EXPECT_EQ(a.trajectory_json_lines(), b.trajectory_json_lines());
  EXPECT_FALSE(a.trajectory_json_lines().empty());
}

TEST(AccSim, HardStopAheadIsReportedAsCollision)
{
  acc::Scenario s;
  s.ego = {0.0, 30.0, 0.0};
  s.lead = {47.0, 30.0, 0.0};
  s.lead_profile = {{0.0, 0.0}};
  const auto r = acc::simulate(s);
  EXPECT_TRUE(r.collision);
  ASSERT_FALSE(r.trajectory.empty());
  EXPECT_LE(r.trajectory.back().gap, 0.0);
  EXPECT_LT(r.trajectory.back().t, 20.0);
}

TEST(AccSim, NoCollisionForLeadProfilesWithinRange)
{
  std::mt19937_64 rng(8675309);
  const oracle::FollowParams params;
  int collisions = 0;
  std::string first;
  for (int i = 0; i < 50; ++i) {
    const auto c = oracle::random_following_case(rng, params);
    const auto ref = oracle::integrate_following(c, params, 0.05, 1);
    acc::Scenario s;
    s.ego = {c.ego_x, c.ego_v, 0.0};
    s.lead = {c.lead_x, c.lead_v, 0.0};
    for (const auto & [t, v] : c.profile) {
      s.lead_profile.push_back({t, v});
    }
    const auto r = acc::simulate(s);
    // The plain integrator cross-checks the stack on every case.
    ASSERT_EQ(r.collision, ref.back().gap <= 0.0) << "case " << i;
    if (r.collision) {
      ++collisions;
      if (first.empty()) {
        first = "case " + std::to_string(i) + ": ego " + std::to_string(c.ego_v) + " m/s, lead " +
          std::to_string(c.lead_v) + " m/s, gap " + std::to_string(c.lead_x) + " m";
      }
    }
  }
  EXPECT_EQ(collisions, 0) << "first: " << first;
}

TEST(AccModes, FallbackStopsControlWithinOneRound)
{
  auto s = lead_step();
  s.duration = 20.0;
  auto p = acc::default_platform(s, {}, 0);
  auto cmd = p->participant().create_subscriber(
    dfp::platform::attributes_topic(acc::kCommandTopic,
    {dfp::middleware::Reliability::BestEffort, dfp::middleware::History::keep_all(), {}, std::nullopt}));
  acc::AccSession session(*p, s, {}, acc::kRadarId);
  for (int i = 0; i < 100; ++i) {
    ASSERT_TRUE(session.step());
  }
  EXPECT_EQ(p->modes().snapshot().at("ads"), "Active");
  EXPECT_EQ(cmd.take(1000).size(), 100u);
  const auto fired_before = p->firings(acc::kControlNode);

  p->modes().dispatch("ads", "fallback");
  EXPECT_EQ(p->graph().state(acc::kControlNode), dfp::funcsw::LifecycleState::Stopped);
  for (int i = 0; i < 50; ++i) {
    session.step();
  }
  EXPECT_TRUE(cmd.take(1000).empty());
  EXPECT_EQ(p->firings(acc::kControlNode), fired_before);
  EXPECT_GT(p->firings(acc::kPlannerNode), fired_before);
  EXPECT_FALSE(session.result().trajectory.back().command.has_value());
}

TEST(AccModes, ControlWaitsForActivation)
{
  auto s = lead_step();
  s.duration = 5.0;
  s.mode_events = {{0.0, "ads", "driver_engage"}, {1.0, "ads", "activate"}};
  const auto r = acc::simulate(s);
  for (const auto & p : r.trajectory) {
    EXPECT_EQ(p.command.has_value(), p.t >= 1.0 - 1e-9) << "t=" << p.t;
  }
  s.mode_events = {{0.0, "health", "fault"}, {0.0, "ads", "driver_engage"}, {0.0, "ads", "activate"}};
  const auto blocked = acc::simulate(s);
  EXPECT_EQ(blocked.commands_received, 0u);
}
