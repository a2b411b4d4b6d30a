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

#ifndef DFP__MIDDLEWARE__DOMAIN_HPP_
#define DFP__MIDDLEWARE__DOMAIN_HPP_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "dfp/middleware/clock.hpp"
#include "dfp/middleware/errors.hpp"
#include "dfp/middleware/payload.hpp"
#include "dfp/middleware/qos.hpp"
#include "dfp/middleware/wire.hpp"

namespace dfp::middleware
{

namespace detail
{
class DomainCore;
class ParticipantImpl;
struct WriterImpl;
struct ReaderImpl;
struct ServiceImpl;
}  // namespace detail

inline constexpr std::int64_t kDefaultHeartbeatPeriodNs = 100'000'000;
inline constexpr std::size_t kDefaultArenaSlotSize = 8u << 20;
/// Records expire after this many missed heartbeat periods.
inline constexpr int kLivelinessPeriods = 3;

struct Transport
{
  enum class Kind
  {
    InProcess,
    Loopback,
  };

  Kind kind = Kind::InProcess;
  std::uint16_t port = 0;

  static Transport in_process() {return {Kind::InProcess, 0};}
  static Transport loopback(std::uint16_t port) {return {Kind::Loopback, port};}
};

struct DomainOptions
{
  /// Drives discovery, liveliness and sample timestamps. Defaults to a
  /// SteadyClock when null.
  std::shared_ptr<Clock> clock;
  std::int64_t heartbeat_period_ns = kDefaultHeartbeatPeriodNs;
  std::size_t arena_slot_size = kDefaultArenaSlotSize;
  /// Probability that the loopback link drops a frame, per destination.
  double loopback_drop_probability = 0.0;
  std::uint64_t seed = 0;
  /// Loopback ports that refuse to bind.
  std::set<std::uint16_t> unavailable_ports;
};

/// One published sample as seen by a subscriber.
struct Sample
{
  std::string topic;
  std::uint64_t seq = 0;
  /// (participant_id << 32) | entity_id of the writer.
  std::uint64_t publisher_id = 0;
  std::int64_t timestamp_ns = 0;
  Payload payload;
};

inline std::uint64_t make_publisher_id(std::uint64_t participant_id, std::uint32_t entity_id)
{
  return (participant_id << 32) | entity_id;
}

struct DiscoveryRecord
{
  EntityKind entity = EntityKind::Participant;
  std::uint64_t participant_id = 0;
  std::uint32_t entity_id = 0;
  /// Topic, service or participant name.
  std::string name;
  std::uint64_t type_hash = 0;
  std::uint64_t response_type_hash = 0;
  QoSProfile qos;
  std::int64_t liveliness_deadline_ns = 0;
};

enum class DiscoveryFilter
{
  Topics,
  Services,
  All,
};

struct ServiceDescriptor
{
  std::string service_name;
  std::uint64_t request_type_hash = 0;
  std::uint64_t response_type_hash = 0;
};

using ServiceHandler = std::function<Bytes(std::span<const std::byte> request)>;

struct LinkStats
{
  std::uint64_t frames_sent = 0;
  std::uint64_t frames_dropped = 0;
  std::uint64_t frames_delivered = 0;
  std::uint64_t decode_errors = 0;
};

class Publisher
{
public:
  Publisher() = default;

  /// Copies `bytes` into a fresh buffer once, then delivers handles to it.
  std::uint64_t publish(std::span<const std::byte> bytes);
  /// Buffer to fill in place; publish(Loan) hands it out without copying.
  Loan loan(std::size_t size);
  std::uint64_t publish(Loan && loan);

  const TopicDescriptor & topic() const;
  std::uint64_t id() const;
  std::size_t matched_count() const;
  std::uint64_t published_count() const;
  /// Samples currently retained for late joiners and retransmission.
  std::size_t retained_count() const;
  explicit operator bool() const {return static_cast<bool>(impl_);}

private:
  friend class detail::ParticipantImpl;
  explicit Publisher(std::shared_ptr<detail::WriterImpl> impl) : impl_(std::move(impl)) {}
  std::shared_ptr<detail::WriterImpl> impl_;
};

class Subscriber
{
public:
  Subscriber() = default;

  /// Up to `max_n` queued samples, oldest first; per-writer seq order holds.
  std::vector<Sample> take(std::size_t max_n);

  const TopicDescriptor & topic() const;
  std::uint64_t id() const;
  std::size_t matched_count() const;
  std::size_t queued() const;
  std::uint64_t received_count() const;
  /// Samples evicted from the queue by KeepLast history before being taken.
  std::uint64_t dropped_count() const;
  std::uint64_t deadline_missed_count() const;
  explicit operator bool() const {return static_cast<bool>(impl_);}

private:
  friend class detail::ParticipantImpl;
  explicit Subscriber(std::shared_ptr<detail::ReaderImpl> impl) : impl_(std::move(impl)) {}
  std::shared_ptr<detail::ReaderImpl> impl_;
};

class ServiceHandle
{
public:
  ServiceHandle() = default;
  const ServiceDescriptor & descriptor() const;
  std::uint64_t handled_count() const;

private:
  friend class detail::ParticipantImpl;
  explicit ServiceHandle(std::shared_ptr<detail::ServiceImpl> impl) : impl_(std::move(impl)) {}
  std::shared_ptr<detail::ServiceImpl> impl_;
};

class Participant
{
public:
  const std::string & name() const;
  std::uint64_t id() const;
  Transport transport() const;

  /// Throws MwError{InvalidArgument | TypeHashMismatch | ParticipantClosed}.
  Publisher create_publisher(const TopicDescriptor & topic);
  Subscriber create_subscriber(const TopicDescriptor & topic);

  /// Throws MwError{DuplicateService} when the name is already served on the
  /// discovery plane.
  ServiceHandle register_service(const ServiceDescriptor & service, ServiceHandler handler);

  /// Blocks up to `timeout_ms` of wall time. Throws MwError{ServiceNotFound |
  /// Timeout} or RemoteServiceError.
  Bytes call(const std::string & service_name, std::span<const std::byte> request, std::uint32_t timeout_ms);

  /// Live records, this participant's own entities included.
  std::vector<DiscoveryRecord> discover(DiscoveryFilter filter = DiscoveryFilter::All) const;

  /// Processes queued frames and due timers. Returns the number of frames
  /// handled.
  std::size_t spin_some();

  /// Leaves the plane without a goodbye; peers expire the records once
  /// liveliness lapses.
  void shutdown();
  bool is_closed() const;

  std::uint64_t late_responses() const;

  ~Participant();

private:
  friend class Domain;
  explicit Participant(std::shared_ptr<detail::ParticipantImpl> impl);
  std::shared_ptr<detail::ParticipantImpl> impl_;
};

/// A participant network: the shared in-process bus plus any number of
/// loopback links keyed by port. Discovery is broker-less: every participant
/// keeps its own record cache fed by periodic announcements.
class Domain
{
public:
  explicit Domain(DomainOptions options = {});
  ~Domain();
  Domain(const Domain &) = delete;
  Domain & operator=(const Domain &) = delete;

  /// Throws MwError{InvalidArgument} for an empty name and
  /// MwError{TransportUnavailable} when the loopback port cannot be bound.
  std::shared_ptr<Participant> create_participant(const std::string & name, Transport transport);

  /// Spins every participant until no frames remain queued.
  std::size_t spin_some();

  const Clock & clock() const;
  const DomainOptions & options() const;
  LinkStats link_stats(std::uint16_t port) const;
  /// Arena backing an in-process topic, or null if none was created yet.
  std::shared_ptr<SlotArena> arena_for(const std::string & topic) const;

private:
  std::shared_ptr<detail::DomainCore> core_;
};

}  // namespace dfp::middleware

#endif  // DFP__MIDDLEWARE__DOMAIN_HPP_
