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

#ifndef MIDDLEWARE__CORE_HPP_
#define MIDDLEWARE__CORE_HPP_

// Internal machinery shared by the domain, participants and endpoints.
//
// Lock order, outermost first:
//   ParticipantImpl::mutex_ -> WriterImpl::mutex -> DomainCore::mutex
//     -> LoopbackHub::mutex -> ReaderImpl::mutex -> Inbox::mutex
// Nothing that holds a later lock may take an earlier one.

#include <atomic>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <functional>
#include <random>
#include <set>
#include <stop_token>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "dfp/middleware/domain.hpp"

namespace dfp::middleware::detail
{

using EntityKey = std::pair<std::uint64_t, std::uint32_t>;

class Inbox
{
public:
  void push(Frame frame)
  {
    std::lock_guard lock(mutex_);
    frames_.push_back(std::move(frame));
  }

  std::deque<Frame> drain()
  {
    std::lock_guard lock(mutex_);
    return std::exchange(frames_, {});
  }

private:
  std::mutex mutex_;
  std::deque<Frame> frames_;
};

/// Simulated datagram link: every frame is encoded to DFP1 bytes, may be
/// dropped, and is decoded again at the receiving side.
class LoopbackHub
{
public:
  LoopbackHub(std::uint16_t port, double drop_probability, std::uint64_t seed);

  void join(std::uint64_t participant_id, std::shared_ptr<Inbox> inbox);
  void leave(std::uint64_t participant_id);

  /// `to` empty means broadcast to every other member.
  void send(std::uint64_t from, std::optional<std::uint64_t> to, const Frame & frame);
  void send_encoded(std::uint64_t from, std::optional<std::uint64_t> to, const Bytes & bytes);

  LinkStats stats() const;

private:
  void deliver_locked(const std::shared_ptr<Inbox> & inbox, const Bytes & bytes);

  std::uint16_t port_;
  mutable std::mutex mutex_;
  std::map<std::uint64_t, std::weak_ptr<Inbox>> members_;
  std::mt19937_64 rng_;
  std::bernoulli_distribution drop_;
  LinkStats stats_;
};

class ParticipantImpl;

class DomainCore : public std::enable_shared_from_this<DomainCore>
{
public:
  explicit DomainCore(DomainOptions opts);

  std::shared_ptr<Clock> clock;
  DomainOptions options;

  std::uint64_t allocate_participant_id();
  void add_participant(std::uint64_t id, const std::shared_ptr<ParticipantImpl> & p,
    const std::shared_ptr<Inbox> & inbox, bool in_process);
  void remove_participant(std::uint64_t id);
  std::shared_ptr<LoopbackHub> hub_for(std::uint16_t port);
  std::shared_ptr<LoopbackHub> find_hub(std::uint16_t port) const;

  void send_in_process(std::uint64_t from, std::optional<std::uint64_t> to, const Frame & frame);

  /// Registers the topic's type for the in-process bus and returns its arena.
  /// Throws MwError{TypeHashMismatch}.
  std::shared_ptr<SlotArena> claim_topic(const std::string & name, std::uint64_t type_hash);
  std::shared_ptr<SlotArena> arena_for(const std::string & name) const;

  void add_in_process_reader(EntityKey key, const std::shared_ptr<ReaderImpl> & reader);
  std::shared_ptr<ReaderImpl> find_in_process_reader(EntityKey key) const;

  /// False when the name is already served on the in-process bus.
  bool claim_service(const std::string & name);
  void release_service(const std::string & name);

  std::size_t spin_all();

private:
  mutable std::mutex mutex_;
  std::uint64_t next_participant_id_ = 1;
  std::map<std::uint64_t, std::weak_ptr<ParticipantImpl>> participants_;
  std::map<std::uint64_t, std::weak_ptr<Inbox>> in_process_inboxes_;
  std::map<std::uint16_t, std::shared_ptr<LoopbackHub>> hubs_;
  struct TopicEntry
  {
    std::uint64_t type_hash;
    std::shared_ptr<SlotArena> arena;
  };
  std::map<std::string, TopicEntry> topics_;
  std::map<EntityKey, std::weak_ptr<ReaderImpl>> readers_;
  std::set<std::string> services_;
};

/// Reader-side state for one matched writer.
struct WriterProxy
{
  QoSProfile writer_qos;
  bool synced = false;
  std::uint64_t next_expected = 0;
  std::map<std::uint64_t, Sample> pending;
};

struct ReaderImpl
{
  std::uint64_t participant_id = 0;
  std::uint32_t entity_id = 0;
  TopicDescriptor topic;

  mutable std::mutex mutex;
  std::deque<Sample> queue;
  std::map<EntityKey, WriterProxy> writers;
  std::uint64_t received = 0;
  std::uint64_t dropped = 0;
  std::uint64_t deadline_missed = 0;
  std::int64_t last_activity_ns = 0;
  bool closed = false;

  bool reliable() const {return topic.qos.reliability == Reliability::Reliable;}

  /// Direct in-process delivery.
  void deliver(const Sample & s, std::int64_t now_ns);
  /// Wire delivery through the writer proxy's ordering rules.
  void on_data(EntityKey writer, Sample s, std::int64_t now_ns);
  /// Returns the acknowledgement to send back, if the writer is known.
  std::optional<AckNack> on_heartbeat(
    EntityKey writer, std::uint64_t first_seq, std::uint64_t next_seq, std::int64_t now_ns);
  void check_deadline(std::int64_t now_ns);

private:
  void push_locked(const Sample & s, std::int64_t now_ns);
  void flush_locked(WriterProxy & proxy, std::int64_t now_ns);
};

/// Writer-side state for one matched reader.
struct ReaderMatch
{
  std::uint64_t participant_id = 0;
  std::uint32_t entity_id = 0;
  QoSProfile qos;
  /// Delivered by handle instead of over the link: every reader on the
  /// in-process bus and same-participant readers on a loopback link.
  bool direct = false;
  std::weak_ptr<ReaderImpl> local;
  std::uint64_t first_seq = 0;
  std::uint64_t ack_base = 0;
};

struct WriterImpl
{
  std::uint64_t participant_id = 0;
  std::uint32_t entity_id = 0;
  TopicDescriptor topic;
  std::shared_ptr<Clock> clock;
  std::shared_ptr<SlotArena> arena;   // in-process only
  std::shared_ptr<LoopbackHub> hub;   // loopback only

  mutable std::mutex mutex;
  std::uint64_t next_seq = 0;
  std::deque<Sample> history;
  std::vector<ReaderMatch> matches;
  bool closed = false;

  bool in_process() const {return !hub;}
  bool retains() const;
  std::uint8_t flags() const;
  Frame data_frame(const Sample & s) const;

  Loan loan(std::size_t size);
  std::uint64_t publish(Loan && loan);

  /// Adds a match unless present. Replays retained samples to transient
  /// local readers.
  void add_match(ReaderMatch match);
  void remove_matches_of(std::uint64_t participant_id);
  void remove_match(EntityKey reader);
  void on_acknack(std::uint64_t reader_participant, std::uint32_t reader_entity, const AckNack & an);
  void send_heartbeats();

private:
  void trim_history_locked();
  std::uint64_t first_available_locked(const ReaderMatch & m) const;
  void send_heartbeat_locked(const ReaderMatch & m);
};

struct ServiceImpl
{
  std::uint32_t entity_id = 0;
  ServiceDescriptor descriptor;
  ServiceHandler handler;
  std::atomic<std::uint64_t> handled{0};
};

class ParticipantImpl : public std::enable_shared_from_this<ParticipantImpl>
{
public:
  ParticipantImpl(
    std::shared_ptr<DomainCore> core, std::uint64_t id, std::string name, Transport transport,
    std::shared_ptr<Inbox> inbox, std::shared_ptr<LoopbackHub> hub);
  ~ParticipantImpl();

  void start();

  const std::string & name() const {return name_;}
  std::uint64_t id() const {return id_;}
  Transport transport() const {return transport_;}

  Publisher create_publisher(const TopicDescriptor & topic);
  Subscriber create_subscriber(const TopicDescriptor & topic);
  ServiceHandle register_service(const ServiceDescriptor & service, ServiceHandler handler);
  Bytes call(const std::string & service_name, std::span<const std::byte> request, std::uint32_t timeout_ms);
  std::vector<DiscoveryRecord> discover(DiscoveryFilter filter) const;
  std::size_t spin_some();
  void shutdown();
  bool closed() const {return closed_.load();}
  std::uint64_t late_responses() const {return late_responses_.load();}

private:
  void ensure_open() const;
  void send(std::optional<std::uint64_t> to, const Frame & frame);
  void check_topic_locked(const TopicDescriptor & topic) const;

  Frame announcement_frame(EntityKind kind, std::uint32_t entity_id, const Announcement & a) const;
  void announce_all_locked(std::optional<std::uint64_t> to);
  void handle(const Frame & frame, std::int64_t now);
  void on_announcement(const Frame & frame, std::int64_t now);
  void on_request(const Frame & frame);
  void on_response(const Frame & frame);
  void note_alive_locked(std::uint64_t participant_id, std::int64_t now);
  void expire_peers_locked(std::int64_t now);
  void match_remote_reader_locked(const DiscoveryRecord & rec);
  void match_remote_writer_locked(const DiscoveryRecord & rec);
  void run_timers(std::int64_t now);
  void post_job(std::function<void()> job);
  bool alive_locked(std::uint64_t participant_id, std::int64_t now) const;

  std::shared_ptr<DomainCore> core_;
  const std::uint64_t id_;
  const std::string name_;
  const Transport transport_;
  std::shared_ptr<Inbox> inbox_;
  std::shared_ptr<LoopbackHub> hub_;
  const std::int64_t period_ns_;

  mutable std::mutex mutex_;
  std::mutex spin_mutex_;
  std::map<std::uint32_t, std::shared_ptr<WriterImpl>> writers_;
  std::map<std::uint32_t, std::shared_ptr<ReaderImpl>> readers_;
  std::map<std::uint32_t, std::shared_ptr<ServiceImpl>> services_;
  std::map<EntityKey, DiscoveryRecord> remote_;
  std::map<std::uint64_t, std::int64_t> last_heard_;
  std::uint32_t next_entity_id_ = 1;
  std::int64_t next_heartbeat_ns_ = 0;
  std::uint64_t heartbeat_count_ = 0;

  std::mutex call_mutex_;
  std::condition_variable call_cv_;
  std::map<std::uint64_t, std::optional<ResponseBody>> pending_calls_;
  std::uint64_t next_request_id_ = 1;
  std::atomic<std::uint64_t> late_responses_{0};

  std::mutex jobs_mutex_;
  std::condition_variable_any jobs_cv_;
  std::deque<std::function<void()>> jobs_;
  std::jthread worker_;

  std::atomic<bool> closed_{false};
};

}  // namespace dfp::middleware::detail

#endif  // MIDDLEWARE__CORE_HPP_
