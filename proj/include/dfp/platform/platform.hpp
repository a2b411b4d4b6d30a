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

#ifndef DFP__PLATFORM__PLATFORM_HPP_
#define DFP__PLATFORM__PLATFORM_HPP_

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dfp/common/attributes.hpp"
#include "dfp/envmodel/store.hpp"
#include "dfp/funcsw/graph.hpp"
#include "dfp/hal/device.hpp"
#include "dfp/middleware/domain.hpp"
#include "dfp/modemgr/coordinator.hpp"

namespace dfp::platform
{

/// Schema string whose hash tags every attribute-map topic.
inline constexpr const char * kAttributesSchema = "dfp.attributes.json.v1";

middleware::Bytes encode(const Attributes & attrs);
/// Throws std::invalid_argument on bytes that are not an attribute map.
Attributes decode(std::span<const std::byte> bytes);

/// Attribute-map topic with the given QoS.
middleware::TopicDescriptor attributes_topic(const std::string & name, middleware::QoSProfile qos);

/// Topic a device's normalized frames are published on.
std::string device_topic(const std::string & device_id);

/// What a simulated radar sees at an instant.
struct RadarTruth
{
  double range_m = 0.0;
  double range_rate_mps = 0.0;
  double azimuth_rad = 0.0;
};

using RadarScene = std::function<std::optional<RadarTruth>(std::int64_t timestamp_ns)>;

struct PlatformOptions
{
  std::uint64_t seed = 0;
  /// Simulated time between rounds.
  std::int64_t step_ns = 50'000'000;
};

struct TopicMetrics
{
  std::uint64_t published = 0;
  std::uint64_t received = 0;
  std::uint64_t dropped = 0;
};

struct NodeMetrics
{
  std::uint64_t firings = 0;
  std::uint64_t faults = 0;
  std::uint32_t restarts = 0;
  std::int64_t max_latency_us = 0;
  funcsw::LifecycleState state = funcsw::LifecycleState::Created;
};

/// The assembled stack: simulated devices feed middleware topics, external
/// topics feed the task graph, node outputs that are declared topics are
/// published back onto the middleware, and a mode coordinator starts and
/// stops task groups.
///
/// Applications reach it only through algorithms(), env(), participant(),
/// modes() and graph().
class Platform
{
public:
  explicit Platform(PlatformOptions options = {});
  ~Platform();
  Platform(const Platform &) = delete;
  Platform & operator=(const Platform &) = delete;

  /// Throws hal::HalError. Every device publishes on device_topic(id).
  void add_device(hal::DeviceDescriptor desc);
  /// Radar device with a compute-unit binding hint, for callers that stay
  /// above the device layer.
  void add_radar(const std::string & device_id, double rate_hz, std::uint64_t seed);
  /// Throws hal::HalError{UnknownDevice | UnsupportedKind}.
  void attach_radar_scene(const std::string & device_id, RadarScene scene);

  /// Topics node outputs are published on and external inputs read from.
  /// Device topics are declared implicitly.
  void declare_topic(const middleware::TopicDescriptor & topic);
  bool topic_declared(const std::string & name) const;

  /// Registry the graph resolves algorithms from. Holds "env_ingest" 1.0.0
  /// (one input frame, one output) from construction.
  funcsw::AlgorithmRegistry & algorithms();
  envmodel::EnvStore & env();
  /// In-process participant for applications.
  middleware::Participant & participant();
  middleware::Domain & domain();

  /// Builds the task graph. External topics must be declared. Throws
  /// funcsw::FswError or std::invalid_argument for an undeclared topic.
  void build(funcsw::GraphSpec spec);
  bool built() const;
  funcsw::TaskGraph & graph();
  modemgr::Coordinator & modes();
  /// Loads FSMs whose group actions drive the graph.
  void load_fsms(const std::vector<modemgr::FsmDefinition> & defs);

  /// One round at now_ns(): due device frames are published, queued
  /// samples become external inputs (the newest per topic), the graph fires
  /// once and outputs are published. The clock then advances one step.
  funcsw::FiringReport step();
  /// Called with every round's report, including rounds driven by an app.
  void set_round_observer(std::function<void(const funcsw::FiringReport &)> observer);
  std::int64_t now_ns() const;
  std::uint64_t rounds() const;

  std::map<std::string, TopicMetrics> topic_metrics() const;
  std::map<std::string, NodeMetrics> node_metrics() const;

  /// Cumulative firings of one node.
  std::uint64_t firings(const std::string & node_id) const;

private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Algorithm name of the envmodel ingest node.
inline constexpr const char * kEnvIngestAlgorithm = "env_ingest";
inline constexpr const char * kEnvIngestVersion = "1.0.0";

}  // namespace dfp::platform

#endif  // DFP__PLATFORM__PLATFORM_HPP_
