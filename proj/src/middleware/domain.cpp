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

#include "dfp/middleware/domain.hpp"

#include <string>
#include <utility>
#include <vector>

#include "core.hpp"

namespace dfp::middleware
{
namespace detail
{

namespace
{

// Upper bound on spin passes per Domain::spin_some; discovery replies settle
// in a handful.
constexpr int kMaxSpinRounds = 64;

}  // namespace

DomainCore::DomainCore(DomainOptions opts)
: clock(opts.clock ? opts.clock : std::make_shared<SteadyClock>()), options(std::move(opts))
{
  options.clock = clock;
}

std::uint64_t DomainCore::allocate_participant_id()
{
  std::lock_guard lock(mutex_);
  return next_participant_id_++;
}

void DomainCore::add_participant(
  std::uint64_t id, const std::shared_ptr<ParticipantImpl> & p, const std::shared_ptr<Inbox> & inbox,
  bool in_process)
{
  std::lock_guard lock(mutex_);
  participants_[id] = p;
  if (in_process) {
    in_process_inboxes_[id] = inbox;
  } else {
    hubs_.at(p->transport().port)->join(id, inbox);
  }
}

void DomainCore::remove_participant(std::uint64_t id)
{
  std::lock_guard lock(mutex_);
  participants_.erase(id);
  in_process_inboxes_.erase(id);
  for (auto & [port, hub] : hubs_) {
    hub->leave(id);
  }
  std::erase_if(readers_, [id](const auto & kv) {return kv.first.first == id;});
}

std::shared_ptr<LoopbackHub> DomainCore::hub_for(std::uint16_t port)
{
  std::lock_guard lock(mutex_);
  auto & hub = hubs_[port];
  if (!hub) {
    hub = std::make_shared<LoopbackHub>(port, options.loopback_drop_probability, options.seed);
  }
  return hub;
}

std::shared_ptr<LoopbackHub> DomainCore::find_hub(std::uint16_t port) const
{
  std::lock_guard lock(mutex_);
  auto it = hubs_.find(port);
  return it == hubs_.end() ? nullptr : it->second;
}

void DomainCore::send_in_process(std::uint64_t from, std::optional<std::uint64_t> to, const Frame & frame)
{
  std::lock_guard lock(mutex_);
  if (to) {
    auto it = in_process_inboxes_.find(*to);
    if (it != in_process_inboxes_.end()) {
      if (auto inbox = it->second.lock()) {
        inbox->push(frame);
      }
    }
    return;
  }
  for (const auto & [pid, weak] : in_process_inboxes_) {
    if (pid == from) {
      continue;
    }
    if (auto inbox = weak.lock()) {
      inbox->push(frame);
    }
  }
}

std::shared_ptr<SlotArena> DomainCore::claim_topic(const std::string & name, std::uint64_t type_hash)
{
  std::lock_guard lock(mutex_);
  auto it = topics_.find(name);
  if (it == topics_.end()) {
    it = topics_.emplace(name, TopicEntry{type_hash, SlotArena::create(options.arena_slot_size)}).first;
  } else if (it->second.type_hash != type_hash) {
    throw MwError(MwErrc::TypeHashMismatch, "topic '" + name + "' is already declared with another type");
  }
  return it->second.arena;
}

std::shared_ptr<SlotArena> DomainCore::arena_for(const std::string & name) const
{
  std::lock_guard lock(mutex_);
  auto it = topics_.find(name);
  return it == topics_.end() ? nullptr : it->second.arena;
}

void DomainCore::add_in_process_reader(EntityKey key, const std::shared_ptr<ReaderImpl> & reader)
{
  std::lock_guard lock(mutex_);
  readers_[key] = reader;
}

std::shared_ptr<ReaderImpl> DomainCore::find_in_process_reader(EntityKey key) const
{
  std::lock_guard lock(mutex_);
  auto it = readers_.find(key);
  return it == readers_.end() ? nullptr : it->second.lock();
}

bool DomainCore::claim_service(const std::string & name)
{
  std::lock_guard lock(mutex_);
  return services_.insert(name).second;
}

void DomainCore::release_service(const std::string & name)
{
  std::lock_guard lock(mutex_);
  services_.erase(name);
}

std::size_t DomainCore::spin_all()
{
  std::size_t total = 0;
  for (int round = 0; round < kMaxSpinRounds; ++round) {
    std::vector<std::shared_ptr<ParticipantImpl>> live;
    {
      std::lock_guard lock(mutex_);
      for (const auto & [id, weak] : participants_) {
        if (auto p = weak.lock()) {
          live.push_back(std::move(p));
        }
      }
    }
    std::size_t handled = 0;
    for (const auto & p : live) {
      handled += p->spin_some();
    }
    total += handled;
    if (handled == 0) {
      break;
    }
  }
  return total;
}

}  // namespace detail

Participant::Participant(std::shared_ptr<detail::ParticipantImpl> impl)
: impl_(std::move(impl))
{
}

Participant::~Participant()
{
  if (impl_) {
    impl_->shutdown();
  }
}

const std::string & Participant::name() const
{
  return impl_->name();
}

std::uint64_t Participant::id() const
{
  return impl_->id();
}

Transport Participant::transport() const
{
  return impl_->transport();
}

Publisher Participant::create_publisher(const TopicDescriptor & topic)
{
  return impl_->create_publisher(topic);
}

Subscriber Participant::create_subscriber(const TopicDescriptor & topic)
{
  return impl_->create_subscriber(topic);
}

ServiceHandle Participant::register_service(const ServiceDescriptor & service, ServiceHandler handler)
{
  return impl_->register_service(service, std::move(handler));
}

Bytes Participant::call(
  const std::string & service_name, std::span<const std::byte> request, std::uint32_t timeout_ms)
{
  return impl_->call(service_name, request, timeout_ms);
}

std::vector<DiscoveryRecord> Participant::discover(DiscoveryFilter filter) const
{
  return impl_->discover(filter);
}

std::size_t Participant::spin_some()
{
  return impl_->spin_some();
}

void Participant::shutdown()
{
  impl_->shutdown();
}

bool Participant::is_closed() const
{
  return impl_->closed();
}

std::uint64_t Participant::late_responses() const
{
  return impl_->late_responses();
}

Domain::Domain(DomainOptions options)
: core_(std::make_shared<detail::DomainCore>(std::move(options)))
{
}

Domain::~Domain() = default;

std::shared_ptr<Participant> Domain::create_participant(const std::string & name, Transport transport)
{
  if (name.empty()) {
    throw MwError(MwErrc::InvalidArgument, "participant name must not be empty");
  }
  const bool in_process = transport.kind == Transport::Kind::InProcess;
  std::shared_ptr<detail::LoopbackHub> hub;
  if (!in_process) {
    if (transport.port == 0 || core_->options.unavailable_ports.contains(transport.port)) {
      throw MwError(
        MwErrc::TransportUnavailable, "loopback port " + std::to_string(transport.port) + " cannot be bound");
    }
    hub = core_->hub_for(transport.port);
  }
  const std::uint64_t id = core_->allocate_participant_id();
  auto inbox = std::make_shared<detail::Inbox>();
  auto impl = std::make_shared<detail::ParticipantImpl>(core_, id, name, transport, inbox, hub);
  core_->add_participant(id, impl, inbox, in_process);
  impl->start();
  return std::shared_ptr<Participant>(new Participant(impl));
}

std::size_t Domain::spin_some()
{
  return core_->spin_all();
}

const Clock & Domain::clock() const
{
  return *core_->clock;
}

const DomainOptions & Domain::options() const
{
  return core_->options;
}

LinkStats Domain::link_stats(std::uint16_t port) const
{
  auto hub = core_->find_hub(port);
  return hub ? hub->stats() : LinkStats{};
}

std::shared_ptr<SlotArena> Domain::arena_for(const std::string & topic) const
{
  return core_->arena_for(topic);
}

}  // namespace dfp::middleware
