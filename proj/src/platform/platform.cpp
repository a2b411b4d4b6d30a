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

#include "dfp/platform/platform.hpp"

#include <algorithm>
#include <stdexcept>
#include <utility>

#include "dfp/hal/normalize.hpp"
#include "dfp/hal/registry.hpp"

namespace dfp::platform
{

namespace mw = middleware;

middleware::Bytes encode(const Attributes & attrs)
{
  return mw::to_bytes(to_json(attrs).dump());
}

Attributes decode(std::span<const std::byte> bytes)
{
  const std::string_view text(reinterpret_cast<const char *>(bytes.data()), bytes.size());
  nlohmann::json j = nlohmann::json::parse(text, nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    throw std::invalid_argument("payload is not an attribute map");
  }
  return attributes_from_json(j);
}

middleware::TopicDescriptor attributes_topic(const std::string & name, middleware::QoSProfile qos)
{
  return {name, mw::type_hash_of(kAttributesSchema), qos};
}

std::string device_topic(const std::string & device_id)
{
  return "hal/" + device_id;
}

namespace
{

mw::QoSProfile device_qos()
{
  return {mw::Reliability::Reliable, mw::History::keep_last(4), mw::Durability::Volatile, std::nullopt};
}

}  // namespace

struct Platform::Impl
{
  explicit Impl(PlatformOptions o)
  : options(o),
    clock(std::make_shared<mw::ManualClock>()),
    domain(mw::DomainOptions{clock, mw::kDefaultHeartbeatPeriodNs, 1u << 20, 0.0, o.seed, {}}),
    algorithms(std::make_shared<funcsw::AlgorithmRegistry>())
  {
    if (options.step_ns <= 0) {
      throw std::invalid_argument("step_ns must be positive");
    }
    platform = domain.create_participant("platform", mw::Transport::in_process());
    apps = domain.create_participant("apps", mw::Transport::in_process());
    envstore = std::make_unique<envmodel::EnvStore>();
    envmodel::EnvStore * store = envstore.get();
    algorithms->register_algorithm(
      {kEnvIngestAlgorithm, kEnvIngestVersion, "builtin:env_ingest", {"frame"}, {"record"}, std::nullopt},
      [store](const Attributes &) -> funcsw::StepFn {
        return [store](const funcsw::StepContext & ctx) {
                 const hal::AbstractFrame frame = hal::abstract_frame_from_attributes(ctx.inputs.begin()->second);
                 const std::uint64_t id = store->ingest(frame);
                 funcsw::StepResult r;
                 r.elapsed_us = 20;
                 if (auto out = get_string(ctx.config, "out")) {
                   r.outputs[*out] = {
                     {"record_id", static_cast<std::int64_t>(id)},
                     {"timestamp_ns", frame.timestamp_ns},
                     {"source_id", frame.source_id}};
                 }
                 return r;
               };
      });
  }

  struct TopicIo
  {
    mw::TopicDescriptor desc;
    mw::Publisher pub;
    mw::Subscriber sub;
  };

  TopicIo & declare(const mw::TopicDescriptor & t)
  {
    auto it = topics.find(t.name);
    if (it != topics.end()) {
      if (it->second.desc.type_hash != t.type_hash || !(it->second.desc.qos == t.qos)) {
        throw std::invalid_argument("topic '" + t.name + "' redeclared with a different type or QoS");
      }
      return it->second;
    }
    TopicIo io{t, platform->create_publisher(t), {}};
    return topics.emplace(t.name, std::move(io)).first->second;
  }

  PlatformOptions options;
  std::shared_ptr<mw::ManualClock> clock;
  mw::Domain domain;
  std::shared_ptr<mw::Participant> platform;
  std::shared_ptr<mw::Participant> apps;
  std::shared_ptr<funcsw::AlgorithmRegistry> algorithms;
  std::unique_ptr<envmodel::EnvStore> envstore;
  hal::DeviceRegistry devices;
  std::map<std::string, TopicIo> topics;
  std::unique_ptr<funcsw::TaskGraph> graph;
  std::unique_ptr<modemgr::Coordinator> coordinator;
  bool fsms_loaded = false;
  bool started = false;
  std::uint64_t rounds = 0;
  std::map<std::string, NodeMetrics> nodes;
  std::function<void(const funcsw::FiringReport &)> observer;
};

Platform::Platform(PlatformOptions options)
: impl_(std::make_unique<Impl>(options))
{
}

Platform::~Platform() = default;

void Platform::add_device(hal::DeviceDescriptor desc)
{
  if (impl_->graph) {
    throw std::logic_error("devices must be added before build");
  }
  const std::string topic = device_topic(desc.device_id);
  if (!mw::is_valid_topic_name(topic)) {
    throw hal::HalError(hal::HalErrc::InvalidDescriptor, "device id '" + desc.device_id + "' is not a valid topic segment");
  }
  impl_->devices.register_device(std::move(desc));
  impl_->declare(attributes_topic(topic, device_qos()));
}

void Platform::add_radar(const std::string & device_id, double rate_hz, std::uint64_t seed)
{
  add_device({device_id, hal::DeviceKind::Radar, rate_hz, seed, "compute-unit"});
}

void Platform::attach_radar_scene(const std::string & device_id, RadarScene scene)
{
  auto h = impl_->devices.find(device_id);
  if (!h) {
    throw hal::HalError(hal::HalErrc::UnknownDevice, "no device '" + device_id + "'");
  }
  impl_->devices.attach_radar_scene(
    *h, [scene = std::move(scene)](std::int64_t ts) -> std::optional<hal::RadarTarget> {
      auto t = scene(ts);
      if (!t) {
        return std::nullopt;
      }
      return hal::RadarTarget{t->range_m, t->range_rate_mps, t->azimuth_rad};
    });
}

void Platform::declare_topic(const middleware::TopicDescriptor & topic)
{
  impl_->declare(topic);
}

bool Platform::topic_declared(const std::string & name) const
{
  return impl_->topics.contains(name);
}

funcsw::AlgorithmRegistry & Platform::algorithms()
{
  return *impl_->algorithms;
}

envmodel::EnvStore & Platform::env()
{
  return *impl_->envstore;
}

middleware::Participant & Platform::participant()
{
  return *impl_->apps;
}

middleware::Domain & Platform::domain()
{
  return impl_->domain;
}

void Platform::build(funcsw::GraphSpec spec)
{
  if (impl_->graph) {
    throw std::logic_error("platform already built");
  }
  for (const auto & t : spec.external_topics) {
    if (!impl_->topics.contains(t)) {
      throw std::invalid_argument("external topic '" + t + "' is not declared");
    }
  }
  auto graph = std::make_unique<funcsw::TaskGraph>(spec, impl_->algorithms);
  for (const auto & t : spec.external_topics) {
    auto & io = impl_->topics.at(t);
    io.sub = impl_->platform->create_subscriber(io.desc);
  }
  for (const auto & n : spec.nodes) {
    impl_->nodes[n.node_id] = {};
  }
  impl_->graph = std::move(graph);
  impl_->coordinator = std::make_unique<modemgr::Coordinator>(
    modemgr::group_ids(*impl_->graph), modemgr::task_graph_sink(*impl_->graph));
}

bool Platform::built() const
{
  return static_cast<bool>(impl_->graph);
}

funcsw::TaskGraph & Platform::graph()
{
  if (!impl_->graph) {
    throw std::logic_error("platform not built");
  }
  return *impl_->graph;
}

modemgr::Coordinator & Platform::modes()
{
  if (!impl_->coordinator) {
    throw std::logic_error("platform not built");
  }
  return *impl_->coordinator;
}

void Platform::load_fsms(const std::vector<modemgr::FsmDefinition> & defs)
{
  modes().load(defs);
  impl_->fsms_loaded = true;
}

funcsw::FiringReport Platform::step()
{
  Impl & im = *impl_;
  funcsw::TaskGraph & g = graph();
  if (!im.started) {
    im.started = true;
    // Without mode management every group runs from the first round.
    if (!im.fsms_loaded) {
      g.start();
    }
  }
  const std::int64_t now = now_ns();
  im.clock->set(now);

  for (const auto & h : im.devices.handles()) {
    while (im.devices.next_timestamp_ns(h) <= now) {
      for (const auto & f : im.devices.tick(h, 1)) {
        const Attributes a = hal::to_attributes(hal::normalize(f));
        const mw::Bytes b = encode(a);
        im.topics.at(device_topic(f.device_id)).pub.publish(b);
      }
    }
  }
  im.domain.spin_some();

  std::map<std::string, funcsw::Datum> inputs;
  for (auto & [name, io] : im.topics) {
    if (!io.sub) {
      continue;
    }
    auto samples = io.sub.take(static_cast<std::size_t>(-1));
    if (!samples.empty()) {
      inputs[name] = decode(samples.back().payload.bytes());
    }
  }

  funcsw::FiringReport report = g.step(inputs);
  for (const auto & p : report.produced) {
    auto it = im.topics.find(p.topic);
    if (it != im.topics.end()) {
      it->second.pub.publish(encode(p.value));
    }
  }
  im.domain.spin_some();

  for (const auto & f : report.fired) {
    NodeMetrics & m = im.nodes[f.node_id];
    ++m.firings;
    if (!f.ok) {
      ++m.faults;
    }
    m.max_latency_us = std::max(m.max_latency_us, f.elapsed_us);
  }
  ++im.rounds;
  if (im.observer) {
    im.observer(report);
  }
  return report;
}

void Platform::set_round_observer(std::function<void(const funcsw::FiringReport &)> observer)
{
  impl_->observer = std::move(observer);
}

std::int64_t Platform::now_ns() const
{
  return static_cast<std::int64_t>(impl_->rounds) * impl_->options.step_ns;
}

std::uint64_t Platform::rounds() const
{
  return impl_->rounds;
}

std::map<std::string, TopicMetrics> Platform::topic_metrics() const
{
  std::map<std::string, TopicMetrics> out;
  for (const auto & [name, io] : impl_->topics) {
    TopicMetrics m;
    m.published = io.pub.published_count();
    if (io.sub) {
      m.received = io.sub.received_count();
      m.dropped = io.sub.dropped_count();
    }
    out[name] = m;
  }
  return out;
}

std::map<std::string, NodeMetrics> Platform::node_metrics() const
{
  std::map<std::string, NodeMetrics> out = impl_->nodes;
  if (impl_->graph) {
    for (auto & [id, m] : out) {
      m.restarts = impl_->graph->restart_count(id);
      m.state = impl_->graph->state(id);
    }
  }
  return out;
}

std::uint64_t Platform::firings(const std::string & node_id) const
{
  auto it = impl_->nodes.find(node_id);
  return it == impl_->nodes.end() ? 0 : it->second.firings;
}

}  // namespace dfp::platform
