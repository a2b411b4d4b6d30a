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

#include <atomic>
#include <memory>
#include <random>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "dfp/modemgr/coordinator.hpp"
#include "support/fsm_oracle.hpp"

namespace mm = dfp::modemgr;
namespace fsw = dfp::funcsw;
using mm::Action;
using mm::ModeErrc;

namespace
{

template<typename F>
ModeErrc error_of(F && f)
{
  try {
    f();
  } catch (const mm::ModeError & e) {
    return e.code();
  }
  ADD_FAILURE() << "no ModeError thrown";
  return ModeErrc::InvalidDefinition;
}

mm::FsmDefinition health()
{
  return {"health", {"Ok", "Degraded", "Fault"}, "Ok",
    {{"Ok", "degrade", std::nullopt, "Degraded", {}}, {"Ok", "fail", std::nullopt, "Fault", {}},
      {"Degraded", "fail", std::nullopt, "Fault", {}}, {"Degraded", "recover", std::nullopt, "Ok", {}},
      {"Fault", "recover", std::nullopt, "Ok", {}}}};
}

mm::FsmDefinition ads()
{
  return {"ads", {"Off", "Standby", "Active", "Fallback"}, "Off",
    {{"Off", "driver_engage", mm::Guard{{"health", "Ok"}}, "Standby", {Action::start_group("perception")}},
      {"Standby", "activate", mm::Guard{{"health", "Ok"}}, "Active", {Action::start_group("control")}},
      {"Active", "fallback", std::nullopt, "Fallback", {Action::stop_group("control")}},
      {"Fallback", "driver_takeover", std::nullopt, "Off", {Action::stop_group("perception")}}}};
}

const std::set<std::string> kGroups{"perception", "control", "g0", "g1"};

}  // namespace

TEST(ModeLoad, SnapshotIsInitials)
{
  mm::Coordinator c(kGroups);
  const auto mode = c.load({ads(), health()});
  EXPECT_EQ(mode, (mm::SystemMode{{"ads", "Off"}, {"health", "Ok"}}));
  EXPECT_EQ(c.snapshot(), mode);
}

TEST(ModeLoad, CrossReferenceErrors)
{
  mm::Coordinator c(kGroups);
  EXPECT_EQ(error_of([&] {c.load({ads()});}), ModeErrc::UnknownFsmRef);
  EXPECT_EQ(error_of([&] {c.load({ads(), health(), health()});}), ModeErrc::DuplicateFsmId);
  EXPECT_EQ(error_of([&] {c.load({});}), ModeErrc::InvalidDefinition);

  auto bad_state = health();
  bad_state.initial = "Unknown";
  EXPECT_EQ(error_of([&] {c.load({bad_state});}), ModeErrc::UnknownStateRef);

  auto bad_target = health();
  bad_target.transitions[0].to = "Gone";
  EXPECT_EQ(error_of([&] {c.load({bad_target});}), ModeErrc::UnknownStateRef);

  auto bad_guard = ads();
  bad_guard.transitions[0].guard = mm::Guard{{"health", "Melted"}};
  EXPECT_EQ(error_of([&] {c.load({bad_guard, health()});}), ModeErrc::UnknownStateRef);

  auto bad_group = ads();
  bad_group.transitions[0].actions = {Action::start_group("planning")};
  EXPECT_EQ(error_of([&] {c.load({bad_group, health()});}), ModeErrc::UnknownGroupRef);

  auto bad_emit = health();
  bad_emit.transitions[0].actions = {Action::emit("nobody", "x")};
  EXPECT_EQ(error_of([&] {c.load({bad_emit});}), ModeErrc::UnknownFsmRef);

  // A failed load leaves nothing behind.
  EXPECT_TRUE(c.snapshot().empty());
}

TEST(ModeDispatch, GuardedEngage)
{
  mm::Coordinator c(kGroups);
  c.load({ads(), health()});
  auto r = c.dispatch("ads", "driver_engage");
  EXPECT_EQ(r.mode.at("ads"), "Standby");
  EXPECT_EQ(r.actions, (std::vector<Action>{Action::start_group("perception")}));

  mm::Coordinator d(kGroups);
  d.load({ads(), health()});
  d.dispatch("health", "fail");
  auto ignored = d.dispatch("ads", "driver_engage");
  EXPECT_EQ(ignored.mode.at("ads"), "Off");
  EXPECT_TRUE(ignored.actions.empty());
  ASSERT_EQ(ignored.trace.size(), 1u);
  EXPECT_EQ(ignored.trace[0].transition, -1);
  EXPECT_EQ(d.trace_length(), 2u);

  EXPECT_EQ(error_of([&] {d.dispatch("nobody", "x");}), ModeErrc::UnknownFsm);
}

TEST(ModeDispatch, EarlierTransitionWins)
{
  mm::FsmDefinition f{"f", {"a", "b", "c"}, "a",
    {{"a", "go", mm::Guard{{"f", "a"}}, "b", {Action::start_group("g0")}},
      {"a", "go", std::nullopt, "c", {Action::start_group("g1")}}}};
  mm::Coordinator c(kGroups);
  c.load({f});
  auto r = c.dispatch("f", "go");
  EXPECT_EQ(r.mode.at("f"), "b");
  EXPECT_EQ(r.actions, (std::vector<Action>{Action::start_group("g0")}));

  // With the first guard false the second one fires.
  f.transitions[0].guard = mm::Guard{{"f", "c"}};
  c.load({f});
  EXPECT_EQ(c.dispatch("f", "go").mode.at("f"), "c");
}

TEST(ModeDispatch, CascadeIsFifoAndUsesCurrentSnapshot)
{
  // x: on "start" emit y.a then y.b. y: a is guarded on x being "on".
  mm::FsmDefinition x{"x", {"off", "on"}, "off",
    {{"off", "start", std::nullopt, "on", {Action::emit("y", "a"), Action::emit("y", "b")}}}};
  mm::FsmDefinition y{"y", {"s0", "s1", "s2"}, "s0",
    {{"s0", "a", mm::Guard{{"x", "on"}}, "s1", {Action::emit("x", "noop")}},
      {"s1", "b", std::nullopt, "s2", {}}}};
  mm::Coordinator c(kGroups);
  c.load({x, y});
  auto r = c.dispatch("x", "start");
  EXPECT_EQ(r.mode, (mm::SystemMode{{"x", "on"}, {"y", "s2"}}));
  ASSERT_EQ(r.trace.size(), 4u);
  EXPECT_EQ(r.trace[1].event, "a");
  EXPECT_EQ(r.trace[2].event, "b");
  EXPECT_EQ(r.trace[3].event, "noop");
  EXPECT_EQ(r.trace[3].depth, 2u);
}

TEST(ModeDispatch, PingPongOverflowsAtDepthLimit)
{
  mm::Coordinator c(kGroups);
  c.load(oracle::ping_pong_pair());
  const auto before = c.snapshot();
  try {
    c.dispatch("A", "ping");
    FAIL() << "no overflow";
  } catch (const mm::CascadeOverflowError & e) {
    EXPECT_EQ(e.code(), ModeErrc::CascadeOverflow);
    EXPECT_EQ(e.depth(), 1000u);
  }
  EXPECT_EQ(c.snapshot(), before);
  EXPECT_EQ(c.trace_length(), 0u);
}

TEST(ModeDispatch, ChainOfExactlyTheLimitSettles)
{
  // A counter FSM that re-emits to itself until it reaches the last state.
  auto chain = [](int n) {
      mm::FsmDefinition f{"chain", {}, "s0", {}};
      for (int i = 0; i <= n; ++i) {
        f.states.insert("s" + std::to_string(i));
      }
      for (int i = 0; i < n; ++i) {
        f.transitions.push_back(
          {"s" + std::to_string(i), "tick", std::nullopt, "s" + std::to_string(i + 1), {Action::emit("chain", "tick")}});
      }
      return f;
    };
  mm::Coordinator c(kGroups);
  // n transitions emit n events; the last one is ignored in s_n.
  c.load({chain(1000)});
  EXPECT_NO_THROW(c.dispatch("chain", "tick"));
  c.load({chain(1001)});
  EXPECT_EQ(error_of([&] {c.dispatch("chain", "tick");}), ModeErrc::CascadeOverflow);
}

TEST(ModeProperty, RandomPairsMatchReferenceInterpreter)
{
  std::mt19937_64 rng(31337);
  int overflows = 0;
  int fired = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const auto defs = oracle::random_fsm_pair(rng);
    std::vector<Action> sunk;
    mm::Coordinator c(kGroups, [&](const Action & a) {sunk.push_back(a);});
    c.load(defs);
    oracle::ReferenceCoordinator ref(defs);
    std::vector<Action> actions;
    for (int i = 0; i < 100; ++i) {
      const std::string fsm = rng() % 2 ? "p" : "q";
      const std::string ev = oracle::fsm_events()[rng() % 3];
      const bool ok = ref.dispatch(fsm, ev);
      try {
        auto r = c.dispatch(fsm, ev);
        EXPECT_TRUE(ok) << "trial " << trial << " event " << i;
        actions.insert(actions.end(), r.actions.begin(), r.actions.end());
        for (const auto & t : r.trace) {
          fired += t.transition >= 0 ? 1 : 0;
        }
      } catch (const mm::CascadeOverflowError &) {
        EXPECT_FALSE(ok) << "trial " << trial << " event " << i;
        ++overflows;
      }
      ASSERT_EQ(c.snapshot(), ref.mode()) << "trial " << trial << " event " << i;
    }
    EXPECT_EQ(actions, ref.actions) << "trial " << trial;
    std::vector<Action> group_actions;
    for (const auto & a : ref.actions) {
      if (a.kind != Action::Kind::EmitEvent) {
        group_actions.push_back(a);
      }
    }
    EXPECT_EQ(sunk, group_actions);
  }
  EXPECT_GT(fired, 500);
  RecordProperty("overflows", overflows);
}

TEST(ModeConcurrency, SnapshotNeverShowsMidCascade)
{
  // "go" moves (x0, y0) to (x2, y1) through (x1, y0); "back" undoes it via
  // (x1, y1). Only the settled pairs may be observed.
  mm::FsmDefinition x{"x", {"x0", "x1", "x2"}, "x0",
    {{"x0", "go", std::nullopt, "x1", {Action::emit("y", "go")}},
      {"x1", "done", std::nullopt, "x2", {}},
      {"x2", "back", std::nullopt, "x1", {Action::emit("y", "back")}},
      {"x1", "undone", std::nullopt, "x0", {}}}};
  mm::FsmDefinition y{"y", {"y0", "y1"}, "y0",
    {{"y0", "go", std::nullopt, "y1", {Action::emit("x", "done")}},
      {"y1", "back", std::nullopt, "y0", {Action::emit("x", "undone")}}}};
  mm::Coordinator c(kGroups);
  c.load({x, y});
  const mm::SystemMode rest{{"x", "x0"}, {"y", "y0"}};
  const mm::SystemMode moved{{"x", "x2"}, {"y", "y1"}};
  std::atomic<bool> done{false};
  std::atomic<int> bad{0};
  std::atomic<int> seen{0};
  std::thread watcher([&] {
      while (!done) {
        const auto s = c.snapshot();
        if (s != rest && s != moved) {
          ++bad;
        }
        ++seen;
      }
    });
  for (int i = 0; i < 2000; ++i) {
    c.dispatch("x", i % 2 == 0 ? "go" : "back");
  }
  done = true;
  watcher.join();
  EXPECT_EQ(bad.load(), 0);
  EXPECT_GT(seen.load(), 0);
  EXPECT_EQ(c.snapshot(), rest);
}

TEST(ModeCoupling, GroupActionsDriveTaskGraph)
{
  auto reg = std::make_shared<fsw::AlgorithmRegistry>();
  reg->register_algorithm(
    {"pass", "1", "pass", {"i"}, {"o"}, std::nullopt}, [](const dfp::Attributes & cfg) -> fsw::StepFn {
      const std::string out = std::get<std::string>(cfg.at("out"));
      return [out](const fsw::StepContext & ctx) {
               fsw::StepResult r;
               r.outputs[out] = ctx.inputs.begin()->second;
               return r;
             };
    });
  fsw::GraphSpec spec;
  spec.groups["perception"] = {};
  spec.groups["control"] = {};
  spec.external_topics = {"radar"};
  fsw::TaskNode p{"track", fsw::Stage::Abstraction, {"radar"}, {"tracks"}, "perception", {{"out", "tracks"}}, {}, 1000,
    "pass", "1"};
  fsw::TaskNode k{"ctrl", fsw::Stage::Service, {"tracks"}, {"cmd"}, "control", {{"out", "cmd"}}, {}, 1000, "pass", "1"};
  spec.nodes = {p, k};
  fsw::TaskGraph graph(spec, reg);

  mm::Coordinator c(mm::group_ids(graph), mm::task_graph_sink(graph));
  c.load({ads(), health()});
  const std::map<std::string, fsw::Datum> in{{"radar", {{"r", 1.0}}}};
  EXPECT_TRUE(graph.step(in).fired.empty());

  c.dispatch("ads", "driver_engage");
  EXPECT_EQ(graph.state("track"), fsw::LifecycleState::Running);
  EXPECT_EQ(graph.state("ctrl"), fsw::LifecycleState::Created);

  c.dispatch("ads", "activate");
  EXPECT_EQ(graph.state("ctrl"), fsw::LifecycleState::Running);
  EXPECT_EQ(graph.step(in).fired.size(), 2u);

  c.dispatch("ads", "fallback");
  EXPECT_EQ(graph.state("ctrl"), fsw::LifecycleState::Stopped);
  const auto after = graph.step(in);
  ASSERT_EQ(after.fired.size(), 1u);
  EXPECT_EQ(after.fired[0].node_id, "track");
}

TEST(ModeJson, DefinitionRoundTrip)
{
  const auto j = mm::to_json(ads());
  const auto back = mm::fsm_from_json(j);
  EXPECT_EQ(back.fsm_id, "ads");
  ASSERT_EQ(back.transitions.size(), 4u);
  EXPECT_EQ(back.transitions[0].guard, (mm::Guard{{"health", "Ok"}}));
  EXPECT_EQ(back.transitions[2].actions, (std::vector<Action>{Action::stop_group("control")}));
  EXPECT_EQ(mm::to_json(back), j);

  auto bad = j;
  bad["priority"] = 3;
  EXPECT_EQ(error_of([&] {mm::fsm_from_json(bad);}), ModeErrc::InvalidDefinition);
  bad = j;
  bad["transitions"][0]["actions"][0] = {{"launch", "x"}};
  EXPECT_EQ(error_of([&] {mm::fsm_from_json(bad);}), ModeErrc::InvalidDefinition);
}
