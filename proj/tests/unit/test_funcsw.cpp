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

#include <algorithm>
#include <memory>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "dfp/funcsw/config.hpp"
#include "dfp/funcsw/graph.hpp"
#include "support/graph_oracle.hpp"

namespace fsw = dfp::funcsw;
using fsw::FswErrc;
using fsw::LifecycleState;
using fsw::Stage;

namespace
{

// "op" versions "k.m" take k inputs and write m outputs named by config keys
// out0, out1. Each output carries v = sum(input v) + gain.
std::shared_ptr<fsw::AlgorithmRegistry> op_registry(std::shared_ptr<oracle::FaultScript> faults = nullptr)
{
  auto reg = std::make_shared<fsw::AlgorithmRegistry>();
  auto factory = [faults](const dfp::Attributes & init) -> fsw::StepFn {
      const std::string id = std::get<std::string>(init.at("id"));
      return [faults, id](const fsw::StepContext & ctx) {
               if (faults && faults->contains({id, ctx.round})) {
                 throw std::runtime_error("boom");
               }
               std::int64_t v = 0;
               for (const auto & [t, d] : ctx.inputs) {
                 v += std::get<std::int64_t>(d.at("v"));
               }
               auto g = ctx.config.find("gain");
               v += g == ctx.config.end() ? 1 : std::get<std::int64_t>(g->second);
               fsw::StepResult r;
               for (const char * k : {"out0", "out1"}) {
                 auto it = ctx.config.find(k);
                 if (it != ctx.config.end()) {
                   r.outputs[std::get<std::string>(it->second)] = {{"v", v}};
                 }
               }
               auto c = ctx.config.find("cost_us");
               r.elapsed_us = c == ctx.config.end() ? 5 : std::get<std::int64_t>(c->second);
               return r;
             };
    };
  for (int k = 0; k <= 3; ++k) {
    for (int m = 0; m <= 2; ++m) {
      fsw::AlgorithmDescriptor d{"op", std::to_string(k) + "." + std::to_string(m), "op", {}, {}, std::nullopt};
      for (int i = 0; i < k; ++i) {
        d.input_ports.push_back("i" + std::to_string(i));
      }
      for (int i = 0; i < m; ++i) {
        d.output_ports.push_back("o" + std::to_string(i));
      }
      reg->register_algorithm(d, factory);
    }
  }
  reg->register_algorithm({"op", "1.1-gpu", "op_gpu", {"i0"}, {"o0"}, "gpu"}, factory);
  reg->register_algorithm({"op", "2.1-alt", "op_alt", {"i0", "i1"}, {"o0"}, std::nullopt}, factory);
  return reg;
}

fsw::TaskNode mk(
  const std::string & id, Stage stage, std::vector<std::string> in, std::vector<std::string> out,
  const std::string & group = "g")
{
  fsw::TaskNode n;
  n.node_id = id;
  n.stage = stage;
  n.inputs = std::move(in);
  n.outputs = std::move(out);
  n.group_id = group;
  n.config["id"] = id;
  for (std::size_t i = 0; i < n.outputs.size(); ++i) {
    n.config["out" + std::to_string(i)] = n.outputs[i];
  }
  n.algorithm = "op";
  n.algorithm_version = std::to_string(n.inputs.size()) + "." + std::to_string(n.outputs.size());
  return n;
}

// A -> {B, C} -> D, with A reading the external topic "cam".
fsw::GraphSpec diamond(fsw::RestartPolicy policy = fsw::RestartPolicy::never())
{
  fsw::GraphSpec s;
  s.groups["g"] = {"", policy};
  s.external_topics = {"cam"};
  s.nodes = {
    mk("D", Stage::Service, {"b", "c"}, {"d"}),
    mk("C", Stage::PreProcessing, {"a"}, {"c"}),
    mk("B", Stage::Abstraction, {"a"}, {"b"}),
    mk("A", Stage::Acquisition, {"cam"}, {"a"}),
  };
  return s;
}

std::vector<std::string> fired_ids(const fsw::FiringReport & r)
{
  std::vector<std::string> out;
  for (const auto & f : r.fired) {
    out.push_back(f.node_id);
  }
  return out;
}

template<typename F>
FswErrc error_of(F && f)
{
  try {
    f();
  } catch (const fsw::FswError & e) {
    return e.code();
  }
  ADD_FAILURE() << "no FswError thrown";
  return FswErrc::InvalidGraph;
}

const std::map<std::string, fsw::Datum> kCam{{"cam", {{"v", std::int64_t{0}}}}};

}  // namespace

TEST(FuncswGraph, DiamondOrderAndEdges)
{
  fsw::TaskGraph g(diamond(), op_registry());
  EXPECT_EQ(g.topological_order(), (std::vector<std::string>{"A", "B", "C", "D"}));
  std::vector<fsw::Edge> want{{"A", "B", "a"}, {"A", "C", "a"}, {"B", "D", "b"}, {"C", "D", "c"}};
  EXPECT_EQ(g.edges(), want);
}

TEST(FuncswGraph, StageOrderViolationRejected)
{
  fsw::GraphSpec s;
  s.groups["g"] = {};
  s.external_topics = {"cam"};
  s.nodes = {mk("S", Stage::Service, {"cam"}, {"s"}), mk("Q", Stage::Acquisition, {"s"}, {})};
  EXPECT_EQ(error_of([&] {fsw::TaskGraph g(s, op_registry());}), FswErrc::StageOrderViolation);
}

TEST(FuncswGraph, CycleReportsMembers)
{
  fsw::GraphSpec s;
  s.groups["g"] = {};
  s.nodes = {mk("A", Stage::Abstraction, {"b"}, {"a"}), mk("B", Stage::Abstraction, {"a"}, {"b"})};
  try {
    fsw::TaskGraph g(s, op_registry());
    FAIL() << "cycle accepted";
  } catch (const fsw::CycleError & e) {
    EXPECT_EQ(e.code(), FswErrc::CycleDetected);
    std::set<std::string> members(e.cycle().begin(), e.cycle().end());
    EXPECT_EQ(members, (std::set<std::string>{"A", "B"}));
    EXPECT_EQ(e.cycle().front(), e.cycle().back());
  }
}

TEST(FuncswGraph, StructuralErrors)
{
  auto reg = op_registry();
  {
    fsw::GraphSpec s = diamond();
    s.external_topics.clear();
    EXPECT_EQ(error_of([&] {fsw::TaskGraph g(s, reg);}), FswErrc::UnresolvedInput);
  }
  {
    fsw::GraphSpec s = diamond();
    s.nodes.push_back(mk("A", Stage::Acquisition, {"cam"}, {"a2"}));
    EXPECT_EQ(error_of([&] {fsw::TaskGraph g(s, reg);}), FswErrc::DuplicateNodeId);
  }
  {
    fsw::GraphSpec s = diamond();
    s.nodes.push_back(mk("E", Stage::Acquisition, {"cam"}, {"a"}));
    EXPECT_EQ(error_of([&] {fsw::TaskGraph g(s, reg);}), FswErrc::DuplicateProducer);
  }
  {
    fsw::GraphSpec s = diamond();
    s.nodes[0].group_id = "nope";
    EXPECT_EQ(error_of([&] {fsw::TaskGraph g(s, reg);}), FswErrc::UnknownGroup);
  }
  {
    fsw::GraphSpec s = diamond();
    s.nodes[0].algorithm_version = "1.1";
    EXPECT_EQ(error_of([&] {fsw::TaskGraph g(s, reg);}), FswErrc::PortSchemaMismatch);
  }
  {
    fsw::GraphSpec s = diamond();
    s.nodes[0].algorithm_version = "9.9";
    EXPECT_EQ(error_of([&] {fsw::TaskGraph g(s, reg);}), FswErrc::AlgorithmNotFound);
  }
  {
    fsw::GraphSpec s;
    EXPECT_EQ(error_of([&] {fsw::TaskGraph g(s, reg);}), FswErrc::InvalidGraph);
  }
}

TEST(FuncswRegistry, ResolveAndErrors)
{
  fsw::AlgorithmRegistry reg;
  auto f = [](const dfp::Attributes &) -> fsw::StepFn {
      return [](const fsw::StepContext &) {return fsw::StepResult{};};
    };
  reg.register_algorithm({"lidar_filter", "1.2.0", "filter", {"in"}, {"out"}, std::nullopt}, f);
  EXPECT_TRUE(reg.contains("lidar_filter", "1.2.0"));
  EXPECT_FALSE(reg.contains("lidar_filter", "1.3.0"));
  EXPECT_NO_THROW(reg.resolve("lidar_filter", "1.2.0"));
  EXPECT_EQ(error_of([&] {reg.resolve("lidar_filter", "1.3.0");}), FswErrc::AlgorithmNotFound);
  EXPECT_EQ(
    error_of([&] {reg.register_algorithm({"lidar_filter", "1.2.0", "x", {}, {}, std::nullopt}, f);}),
    FswErrc::DuplicateAlgorithm);
  EXPECT_EQ(error_of([&] {reg.register_algorithm({"", "1", "x", {}, {}, std::nullopt}, f);}), FswErrc::InvalidGraph);
  EXPECT_EQ(reg.list().size(), 1u);
}

TEST(FuncswBinding, LastBindWinsBeforeStartThenStatic)
{
  fsw::TaskGraph g(diamond(), op_registry());
  g.bind("g", "cpu0");
  g.bind("g", "cpu1");
  EXPECT_EQ(g.binding_label("D"), "cpu1");
  g.start();
  EXPECT_EQ(error_of([&] {g.bind("g", "cpu2");}), FswErrc::BindingConflict);
  EXPECT_EQ(g.binding_label("A"), "cpu1");
  EXPECT_EQ(error_of([&] {g.bind("missing", "cpu0");}), FswErrc::UnknownGroup);
}

TEST(FuncswBinding, RequirementMismatchIsConflict)
{
  fsw::GraphSpec s = diamond();
  s.nodes[2].algorithm_version = "1.1-gpu";  // B
  fsw::TaskGraph g(s, op_registry());
  EXPECT_EQ(error_of([&] {g.bind("g", "cpu0");}), FswErrc::BindingConflict);
  EXPECT_EQ(g.binding_label("B"), "");
  EXPECT_NO_THROW(g.bind("g", "gpu"));
}

TEST(FuncswConfig, DynamicStaticAndUnknownKeys)
{
  fsw::GraphSpec s = diamond();
  s.nodes[3].config["gain"] = std::int64_t{1};  // A
  s.nodes[3].config["mode"] = std::string("fast");
  s.nodes[3].config_mode["gain"] = fsw::ConfigMode::Dynamic;
  fsw::TaskGraph g(s, op_registry());
  g.configure("A", {{"mode", std::string("slow")}});  // static keys may change before start
  g.start();

  auto r1 = g.step(kCam);
  ASSERT_FALSE(r1.produced.empty());
  EXPECT_EQ(std::get<std::int64_t>(r1.produced[0].value.at("v")), 1);

  g.configure("A", {{"gain", std::int64_t{5}}});
  auto r2 = g.step(kCam);
  EXPECT_EQ(std::get<std::int64_t>(r2.produced[0].value.at("v")), 5);

  EXPECT_EQ(error_of([&] {g.configure("A", {{"mode", std::string("x")}});}), FswErrc::StaticKeyWhileRunning);
  EXPECT_EQ(error_of([&] {g.configure("A", {{"nope", true}});}), FswErrc::UnknownConfigKey);
  EXPECT_EQ(
    error_of([&] {g.configure("A", {{"gain", std::int64_t{9}}, {"mode", std::string("x")}});}),
    FswErrc::StaticKeyWhileRunning);
  EXPECT_EQ(std::get<std::int64_t>(g.node("A").config.at("gain")), 5);
  EXPECT_EQ(error_of([&] {g.configure("Z", {});}), FswErrc::UnknownNode);
}

TEST(FuncswStep, AllInputsFreshRule)
{
  fsw::GraphSpec s = diamond();
  s.external_topics.insert("aux");
  s.nodes[2] = mk("B", Stage::Abstraction, {"a", "aux"}, {"b"});
  fsw::TaskGraph g(s, op_registry());
  g.start();

  auto r1 = g.step(kCam);
  EXPECT_EQ(fired_ids(r1), (std::vector<std::string>{"A", "C"}));

  // B keeps its "a" and fires once "aux" shows up; D already holds "c".
  auto r2 = g.step({{"aux", {{"v", std::int64_t{10}}}}});
  EXPECT_EQ(fired_ids(r2), (std::vector<std::string>{"B", "D"}));
  // b = 1 + 10 + 1, c = 2, so d = 12 + 2 + 1.
  EXPECT_EQ(std::get<std::int64_t>(r2.produced.back().value.at("v")), 15);

  auto r3 = g.step(kCam);
  EXPECT_EQ(fired_ids(r3), (std::vector<std::string>{"A", "C"}));

  auto r4 = g.step({});
  EXPECT_TRUE(r4.fired.empty());
  EXPECT_EQ(g.rounds(), 4u);
}

TEST(FuncswStep, ReportsAreDeterministic)
{
  auto run = [] {
      fsw::TaskGraph g(diamond(fsw::RestartPolicy::up_to(1)), op_registry());
      g.start();
      std::string out;
      for (int i = 0; i < 10; ++i) {
        out += g.step(i % 3 == 2 ? std::map<std::string, fsw::Datum>{} : kCam).to_json_line() + "\n";
        if (i == 4) {
          g.on_node_failure("C");
        }
      }
      return out;
    };
  const std::string a = run();
  EXPECT_EQ(a, run());
  EXPECT_NE(a.find("\"transitions\""), std::string::npos);
}

TEST(FuncswLifecycle, UpToOneRestartsOnceThenFails)
{
  auto faults = std::make_shared<oracle::FaultScript>();
  faults->insert({"C", 1});
  faults->insert({"C", 3});
  fsw::TaskGraph g(diamond(fsw::RestartPolicy::up_to(1)), op_registry(faults));
  g.start();

  auto r1 = g.step(kCam);
  EXPECT_EQ(fired_ids(r1), (std::vector<std::string>{"A", "B", "C"}));
  EXPECT_FALSE(r1.fired[2].ok);
  EXPECT_EQ(g.state("C"), LifecycleState::Running);
  EXPECT_EQ(g.restart_count("C"), 1u);

  auto r2 = g.step(kCam);
  EXPECT_EQ(fired_ids(r2), (std::vector<std::string>{"A", "B", "C", "D"}));

  g.step(kCam);
  EXPECT_EQ(g.state("C"), LifecycleState::Failed);
  for (int i = 0; i < 3; ++i) {
    auto r = g.step(kCam);
    EXPECT_EQ(fired_ids(r), (std::vector<std::string>{"A", "B"}));
  }
  EXPECT_EQ(g.state("D"), LifecycleState::Running);
  EXPECT_EQ(oracle::illegal_transitions(g.trace(), {{"A", 1}, {"B", 1}, {"C", 1}, {"D", 1}}), 0);
}

TEST(FuncswLifecycle, NeverPolicyFailsImmediately)
{
  fsw::TaskGraph g(diamond(), op_registry());
  g.start();
  EXPECT_EQ(g.on_node_failure("B"), LifecycleState::Failed);
  EXPECT_EQ(g.restart_count("B"), 0u);
  EXPECT_EQ(error_of([&] {g.on_node_failure("B");}), FswErrc::IllegalTransition);
  g.stop_group("g");
  EXPECT_EQ(g.state("B"), LifecycleState::Stopped);
  EXPECT_EQ(g.state("A"), LifecycleState::Stopped);
  g.start();
  EXPECT_EQ(g.state("A"), LifecycleState::Stopped);
  EXPECT_TRUE(g.step(kCam).fired.empty());
}

TEST(FuncswLifecycle, WatchdogOverrunIsAFault)
{
  fsw::GraphSpec s = diamond(fsw::RestartPolicy::up_to(2));
  s.nodes[1].config["cost_us"] = std::int64_t{1000001};  // C, watchdog 1000 ms
  s.nodes[2].config["cost_us"] = std::int64_t{1000000};  // B, exactly at the limit
  fsw::TaskGraph g(s, op_registry());
  g.start();
  auto r = g.step(kCam);
  ASSERT_EQ(r.fired.size(), 3u);
  EXPECT_TRUE(r.fired[1].ok);
  EXPECT_FALSE(r.fired[2].ok);
  EXPECT_EQ(g.restart_count("C"), 1u);
  auto failed = std::find_if(
    r.transitions.begin(), r.transitions.end(),
    [](const fsw::TransitionRecord & t) {return t.to == LifecycleState::Failed;});
  ASSERT_NE(failed, r.transitions.end());
  EXPECT_EQ(failed->node_id, "C");
  EXPECT_EQ(failed->reason.rfind("watchdog", 0), 0u);
}

TEST(FuncswLifecycle, UndeclaredOutputIsAFault)
{
  auto reg = std::make_shared<fsw::AlgorithmRegistry>();
  reg->register_algorithm(
    {"leaky", "1", "leaky", {"i"}, {"o"}, std::nullopt}, [](const dfp::Attributes &) -> fsw::StepFn {
      return [](const fsw::StepContext &) {
               fsw::StepResult r;
               r.outputs["elsewhere"] = {};
               return r;
             };
    });
  fsw::GraphSpec one;
  one.groups["g"] = {};
  one.external_topics = {"cam"};
  fsw::TaskNode n = mk("L", Stage::Acquisition, {"cam"}, {"x"});
  n.algorithm = "leaky";
  n.algorithm_version = "1";
  one.nodes = {n};
  fsw::TaskGraph g(one, reg);
  g.start();
  auto r = g.step(kCam);
  ASSERT_EQ(r.fired.size(), 1u);
  EXPECT_FALSE(r.fired[0].ok);
  EXPECT_TRUE(r.produced.empty());
  EXPECT_EQ(g.state("L"), LifecycleState::Failed);
}

TEST(FuncswProperty, RandomDagsMatchTopoOracle)
{
  std::mt19937_64 rng(20260501);
  auto reg = oracle::relay_registry(nullptr);
  for (int trial = 0; trial < 100; ++trial) {
    const auto rg = oracle::random_graph(rng, 20);
    fsw::TaskGraph g(rg.spec, reg);
    const auto want = oracle::lexicographic_topo(rg);
    ASSERT_EQ(g.topological_order(), want) << "trial " << trial;

    std::map<std::string, Stage> stage;
    for (const auto & n : rg.spec.nodes) {
      stage[n.node_id] = n.stage;
    }
    std::size_t expected_edges = 0;
    for (const auto & [id, ps] : rg.producers) {
      expected_edges += ps.size();
    }
    ASSERT_EQ(g.edges().size(), expected_edges);
    for (const auto & e : g.edges()) {
      EXPECT_LE(static_cast<int>(stage[e.from]), static_cast<int>(stage[e.to]));
    }

    // Firing with a random subset of external inputs present.
    g.start();
    oracle::FiringModel model(rg, [&] {
        std::map<std::string, std::uint32_t> l;
        for (const auto & id : want) {
          l[id] = 0;
        }
        return l;
      }());
    for (std::uint64_t round = 1; round <= 3; ++round) {
      std::map<std::string, fsw::Datum> ext;
      std::set<std::string> present;
      for (const auto & t : rg.spec.external_topics) {
        if (rng() % 3 != 0) {
          ext[t] = {{"depth", std::int64_t{0}}};
          present.insert(t);
        }
      }
      const auto report = g.step(ext);
      const auto expect = model.round(present, {}, round);
      ASSERT_EQ(report.fired.size(), expect.size()) << "trial " << trial << " round " << round;
      std::set<std::string> fired_now;
      for (std::size_t i = 0; i < expect.size(); ++i) {
        EXPECT_EQ(report.fired[i].node_id, expect[i].id);
        fired_now.insert(report.fired[i].node_id);
      }
      for (const auto & e : g.edges()) {
        if (fired_now.contains(e.from) && fired_now.contains(e.to)) {
          EXPECT_LE(static_cast<int>(stage[e.from]), static_cast<int>(stage[e.to]));
        }
      }
    }
  }
}

TEST(FuncswProperty, FaultScriptsFollowLifecycleTable)
{
  std::mt19937_64 rng(777);
  for (int trial = 0; trial < 20; ++trial) {
    auto faults = std::make_shared<oracle::FaultScript>();
    auto rg = oracle::random_graph(rng, 12, 3);
    std::map<std::string, std::uint32_t> group_limit;
    for (auto & [gid, gs] : rg.spec.groups) {
      const auto k = static_cast<std::uint32_t>(rng() % 4);
      gs.restart_policy = k == 0 ? fsw::RestartPolicy::never() : fsw::RestartPolicy::up_to(k - 1);
      group_limit[gid] = gs.restart_policy.max_restarts();
    }
    std::map<std::string, std::uint32_t> limits;
    for (const auto & n : rg.spec.nodes) {
      limits[n.node_id] = group_limit[n.group_id];
    }
    const std::uint64_t rounds = 30;
    for (std::uint64_t r = 1; r <= rounds; ++r) {
      for (const auto & n : rg.spec.nodes) {
        if (rng() % 10 == 0) {
          faults->insert({n.node_id, r});
        }
      }
    }
    fsw::TaskGraph g(rg.spec, oracle::relay_registry(faults));
    g.start();
    oracle::FiringModel model(rg, limits);
    std::map<std::string, fsw::Datum> ext;
    std::set<std::string> present;
    for (const auto & t : rg.spec.external_topics) {
      ext[t] = {{"depth", std::int64_t{0}}};
      present.insert(t);
    }
    for (std::uint64_t r = 1; r <= rounds; ++r) {
      const auto report = g.step(ext);
      const auto expect = model.round(present, *faults, r);
      ASSERT_EQ(report.fired.size(), expect.size()) << "trial " << trial << " round " << r;
      for (std::size_t i = 0; i < expect.size(); ++i) {
        EXPECT_EQ(report.fired[i].node_id, expect[i].id);
        EXPECT_EQ(report.fired[i].ok, expect[i].ok);
      }
    }
    for (const auto & n : rg.spec.nodes) {
      EXPECT_EQ(g.state(n.node_id), model.state(n.node_id)) << n.node_id;
      EXPECT_EQ(g.restart_count(n.node_id), model.restarts(n.node_id)) << n.node_id;
    }
    EXPECT_EQ(oracle::illegal_transitions(g.trace(), limits), 0) << "trial " << trial;
  }
}

TEST(FuncswLifecycle, TableRejectsIllegalPairs)
{
  using S = LifecycleState;
  const std::vector<S> all{S::Created, S::Configured, S::Running, S::Failed, S::Stopped};
  for (S a : all) {
    for (S b : all) {
      EXPECT_EQ(fsw::is_legal_transition(a, b, 0, 1), oracle::transition_allowed(a, b));
    }
  }
  EXPECT_FALSE(fsw::is_legal_transition(S::Failed, S::Running, 1, 1));
}

TEST(FuncswReconfig, SwapKeepsEdges)
{
  fsw::TaskGraph g(diamond(), op_registry());
  g.start();
  g.step(kCam);
  const auto before = g.edges();
  g.swap_algorithm("D", "2.1-alt");
  EXPECT_EQ(g.edges(), before);
  EXPECT_EQ(g.node("D").algorithm_version, "2.1-alt");
  EXPECT_EQ(g.state("D"), LifecycleState::Running);
  EXPECT_EQ(error_of([&] {g.swap_algorithm("D", "1.1");}), FswErrc::PortSchemaMismatch);
  EXPECT_EQ(error_of([&] {g.swap_algorithm("D", "7.7");}), FswErrc::AlgorithmNotFound);
  EXPECT_EQ(fired_ids(g.step(kCam)), (std::vector<std::string>{"A", "B", "C", "D"}));
}

TEST(FuncswReconfig, AddAndRemoveServiceNodes)
{
  fsw::TaskGraph g(diamond(), op_registry());
  g.start();
  EXPECT_EQ(error_of([&] {g.add_service_node(mk("X", Stage::Abstraction, {"a"}, {}));}), FswErrc::InvalidGraph);
  g.add_service_node(mk("E", Stage::Service, {"d"}, {}));
  EXPECT_EQ(g.state("E"), LifecycleState::Running);
  EXPECT_EQ(g.topological_order(), (std::vector<std::string>{"A", "B", "C", "D", "E"}));
  EXPECT_EQ(fired_ids(g.step(kCam)), (std::vector<std::string>{"A", "B", "C", "D", "E"}));

  EXPECT_EQ(error_of([&] {g.remove_service_node("A");}), FswErrc::InvalidGraph);
  // D feeds E, so removing D leaves an unresolved input.
  EXPECT_EQ(error_of([&] {g.remove_service_node("D");}), FswErrc::UnresolvedInput);
  EXPECT_EQ(g.state("D"), LifecycleState::Running);
  g.remove_service_node("E");
  EXPECT_EQ(error_of([&] {g.state("E");}), FswErrc::UnknownNode);
  EXPECT_EQ(fired_ids(g.step(kCam)), (std::vector<std::string>{"A", "B", "C", "D"}));
  const auto trace = g.trace();
  EXPECT_EQ(trace.back().node_id, "E");
  EXPECT_EQ(trace.back().to, LifecycleState::Stopped);
}

TEST(FuncswConfigFile, ParsesAndRejectsUnknownKeys)
{
  const auto j = nlohmann::json::parse(R"({
    "external_topics": ["cam"],
    "groups": {"g": {"binding": "cpu0", "restart": {"up_to": 2}}},
    "nodes": [
      {"id": "A", "stage": "Acquisition", "group": "g", "algorithm": "op", "version": "1.1",
       "inputs": ["cam"], "outputs": ["a"], "config": {"id": "A", "out0": "a", "gain": 3},
       "dynamic_keys": ["gain"], "watchdog_ms": 20}
    ]})");
  const auto spec = fsw::graph_spec_from_json(j);
  ASSERT_EQ(spec.nodes.size(), 1u);
  EXPECT_EQ(spec.nodes[0].watchdog_ms, 20u);
  EXPECT_EQ(spec.groups.at("g").restart_policy.max_restarts(), 2u);
  EXPECT_EQ(spec.nodes[0].config_mode.at("gain"), fsw::ConfigMode::Dynamic);
  EXPECT_EQ(fsw::graph_spec_from_json(fsw::to_json(spec)).nodes[0].config, spec.nodes[0].config);

  fsw::TaskGraph g(spec, op_registry());
  g.start();
  EXPECT_EQ(std::get<std::int64_t>(g.step(kCam).produced[0].value.at("v")), 3);

  auto bad = j;
  bad["nodes"][0]["priority"] = 1;
  EXPECT_EQ(error_of([&] {fsw::graph_spec_from_json(bad);}), FswErrc::InvalidGraph);
  bad = j;
  bad["groups"]["g"]["restart"] = "always";
  EXPECT_EQ(error_of([&] {fsw::graph_spec_from_json(bad);}), FswErrc::InvalidGraph);
  bad = j;
  bad["nodes"][0]["stage"] = "Planning";
  EXPECT_EQ(error_of([&] {fsw::graph_spec_from_json(bad);}), FswErrc::InvalidGraph);
}
