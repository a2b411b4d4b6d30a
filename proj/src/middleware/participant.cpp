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

#include <algorithm>
#include <chrono>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "core.hpp"

namespace dfp::middleware::detail
{

namespace
{

// Status sent back when a request names an entity that serves nothing.
constexpr std::uint32_t kStatusNoSuchService = 0xFFFFFFFFu;
// Status for handler exceptions that are not a ServiceFault.
constexpr std::uint32_t kStatusHandlerException = 1;

TopicDescriptor as_topic(const DiscoveryRecord & rec)
{
  return {rec.name, rec.type_hash, rec.qos};
}

}  // namespace

ParticipantImpl::ParticipantImpl(
  std::shared_ptr<DomainCore> core, std::uint64_t id, std::string name, Transport transport,
  std::shared_ptr<Inbox> inbox, std::shared_ptr<LoopbackHub> hub)
: core_(std::move(core)), id_(id), name_(std::move(name)), transport_(transport),
  inbox_(std::move(inbox)), hub_(std::move(hub)),
  period_ns_(std::max<std::int64_t>(1, core_->options.heartbeat_period_ns))
{
}

ParticipantImpl::~ParticipantImpl()
{
  shutdown();
  if (worker_.joinable() && worker_.get_id() != std::this_thread::get_id()) {
    worker_.request_stop();
    worker_.join();
  }
}

void ParticipantImpl::start()
{
  std::lock_guard lock(mutex_);
  next_heartbeat_ns_ = core_->clock->now_ns() + period_ns_;
  announce_all_locked(std::nullopt);
}

void ParticipantImpl::ensure_open() const
{
  if (closed_.load()) {
    throw MwError(MwErrc::ParticipantClosed, "participant '" + name_ + "' is shut down");
  }
}

void ParticipantImpl::send(std::optional<std::uint64_t> to, const Frame & frame)
{
  if (closed_.load()) {
    return;
  }
  if (hub_) {
    hub_->send(id_, to, frame);
  } else {
    core_->send_in_process(id_, to, frame);
  }
}

void ParticipantImpl::check_topic_locked(const TopicDescriptor & topic) const
{
  if (!is_valid_topic_name(topic.name)) {
    throw MwError(MwErrc::InvalidArgument, "invalid topic name '" + topic.name + "'");
  }
  if (auto err = validate(topic.qos)) {
    throw MwError(MwErrc::InvalidArgument, "invalid QoS for '" + topic.name + "': " + *err);
  }
  auto mismatch = [&](std::uint64_t other) {
      if (other != topic.type_hash) {
        throw MwError(
          MwErrc::TypeHashMismatch, "topic '" + topic.name + "' is already declared with another type");
      }
    };
  for (const auto & [eid, w] : writers_) {
    if (w->topic.name == topic.name) {
      mismatch(w->topic.type_hash);
    }
  }
  for (const auto & [eid, r] : readers_) {
    if (r->topic.name == topic.name) {
      mismatch(r->topic.type_hash);
    }
  }
  const std::int64_t now = core_->clock->now_ns();
  for (const auto & [key, rec] : remote_) {
    if ((rec.entity == EntityKind::Publisher || rec.entity == EntityKind::Subscriber) &&
      rec.name == topic.name && alive_locked(rec.participant_id, now))
    {
      mismatch(rec.type_hash);
    }
  }
}

Publisher ParticipantImpl::create_publisher(const TopicDescriptor & topic)
{
  ensure_open();
  std::lock_guard lock(mutex_);
  check_topic_locked(topic);
  auto w = std::make_shared<WriterImpl>();
  w->participant_id = id_;
  w->topic = topic;
  w->clock = core_->clock;
  if (hub_) {
    w->hub = hub_;
  } else {
    w->arena = core_->claim_topic(topic.name, topic.type_hash);
  }
  w->entity_id = next_entity_id_++;
  writers_[w->entity_id] = w;

  for (const auto & [eid, r] : readers_) {
    if (endpoints_match(w->topic, r->topic)) {
      {
        std::lock_guard rlock(r->mutex);
        WriterProxy proxy;
        proxy.writer_qos = topic.qos;
        proxy.synced = true;
        r->writers[{id_, w->entity_id}] = proxy;
      }
      ReaderMatch m;
      m.participant_id = id_;
      m.entity_id = eid;
      m.qos = r->topic.qos;
      m.direct = true;
      m.local = r;
      w->add_match(std::move(m));
    }
  }
  for (const auto & [key, rec] : remote_) {
    if (rec.entity == EntityKind::Subscriber) {
      match_remote_reader_locked(rec);
    }
  }
  send(
    std::nullopt, announcement_frame(
      EntityKind::Publisher, w->entity_id, {EntityKind::Publisher, topic.name, topic.type_hash, 0, topic.qos}));
  return Publisher(w);
}

Subscriber ParticipantImpl::create_subscriber(const TopicDescriptor & topic)
{
  ensure_open();
  std::lock_guard lock(mutex_);
  check_topic_locked(topic);
  if (!hub_) {
    core_->claim_topic(topic.name, topic.type_hash);
  }
  auto r = std::make_shared<ReaderImpl>();
  r->participant_id = id_;
  r->topic = topic;
  r->entity_id = next_entity_id_++;
  r->last_activity_ns = core_->clock->now_ns();
  readers_[r->entity_id] = r;
  if (!hub_) {
    core_->add_in_process_reader({id_, r->entity_id}, r);
  }

  for (const auto & [eid, w] : writers_) {
    if (endpoints_match(w->topic, r->topic)) {
      {
        std::lock_guard rlock(r->mutex);
        WriterProxy proxy;
        proxy.writer_qos = w->topic.qos;
        proxy.synced = true;
        r->writers[{id_, eid}] = proxy;
      }
      ReaderMatch m;
      m.participant_id = id_;
      m.entity_id = r->entity_id;
      m.qos = topic.qos;
      m.direct = true;
      m.local = r;
      w->add_match(std::move(m));
    }
  }
  for (const auto & [key, rec] : remote_) {
    if (rec.entity == EntityKind::Publisher) {
      match_remote_writer_locked(rec);
    }
  }
  send(
    std::nullopt, announcement_frame(
      EntityKind::Subscriber, r->entity_id,
      {EntityKind::Subscriber, topic.name, topic.type_hash, 0, topic.qos}));
  return Subscriber(r);
}

ServiceHandle ParticipantImpl::register_service(const ServiceDescriptor & service, ServiceHandler handler)
{
  ensure_open();
  if (service.service_name.empty()) {
    throw MwError(MwErrc::InvalidArgument, "empty service name");
  }
  if (!handler) {
    throw MwError(MwErrc::InvalidArgument, "service '" + service.service_name + "' has no handler");
  }
  std::lock_guard lock(mutex_);
  auto duplicate = [&]() {
      return MwError(MwErrc::DuplicateService, "service '" + service.service_name + "' is already served");
    };
  for (const auto & [eid, s] : services_) {
    if (s->descriptor.service_name == service.service_name) {
      throw duplicate();
    }
  }
  const std::int64_t now = core_->clock->now_ns();
  for (const auto & [key, rec] : remote_) {
    if (rec.entity == EntityKind::Service && rec.name == service.service_name &&
      alive_locked(rec.participant_id, now))
    {
      throw duplicate();
    }
  }
  if (!hub_ && !core_->claim_service(service.service_name)) {
    throw duplicate();
  }

  auto svc = std::make_shared<ServiceImpl>();
  svc->entity_id = next_entity_id_++;
  svc->descriptor = service;
  svc->handler = std::move(handler);
  services_[svc->entity_id] = svc;

  if (!worker_.joinable()) {
    worker_ = std::jthread(
      [this](std::stop_token st) {
        while (true) {
          std::function<void()> job;
          {
            std::unique_lock jlock(jobs_mutex_);
            if (!jobs_cv_.wait(jlock, st, [this] {return !jobs_.empty();})) {
              return;
            }
            job = std::move(jobs_.front());
            jobs_.pop_front();
          }
          job();
        }
      });
  }
  send(
    std::nullopt, announcement_frame(
      EntityKind::Service, svc->entity_id,
      {EntityKind::Service, service.service_name, service.request_type_hash, service.response_type_hash, {}}));
  return ServiceHandle(svc);
}

void ParticipantImpl::post_job(std::function<void()> job)
{
  {
    std::lock_guard lock(jobs_mutex_);
    jobs_.push_back(std::move(job));
  }
  jobs_cv_.notify_one();
}

Bytes ParticipantImpl::call(
  const std::string & service_name, std::span<const std::byte> request, std::uint32_t timeout_ms)
{
  ensure_open();
  const auto deadline = std::chrono::steady_clock::now() + std::chrono::milliseconds(timeout_ms);
  core_->spin_all();

  std::optional<EntityKey> target;
  {
    std::lock_guard lock(mutex_);
    for (const auto & [eid, s] : services_) {
      if (s->descriptor.service_name == service_name) {
        target = EntityKey{id_, eid};
      }
    }
    const std::int64_t now = core_->clock->now_ns();
    for (const auto & [key, rec] : remote_) {
      if (!target && rec.entity == EntityKind::Service && rec.name == service_name &&
        alive_locked(rec.participant_id, now))
      {
        target = key;
      }
    }
  }
  if (!target) {
    throw MwError(MwErrc::ServiceNotFound, "no live server for '" + service_name + "'");
  }

  std::uint64_t request_id = 0;
  {
    std::lock_guard lock(call_mutex_);
    request_id = next_request_id_++;
    pending_calls_[request_id] = std::nullopt;
  }
  Frame f;
  f.type = MsgType::Request;
  f.participant_id = id_;
  f.entity_id = target->second;
  f.seq = request_id;
  f.payload.assign(request.begin(), request.end());
  send(target->first, f);

  ResponseBody response;
  while (true) {
    core_->spin_all();
    std::unique_lock lock(call_mutex_);
    auto it = pending_calls_.find(request_id);
    if (it->second) {
      response = std::move(*it->second);
      pending_calls_.erase(it);
      break;
    }
    const auto now = std::chrono::steady_clock::now();
    if (now >= deadline) {
      pending_calls_.erase(it);
      throw MwError(
        MwErrc::Timeout, "call to '" + service_name + "' timed out after " + std::to_string(timeout_ms) + " ms");
    }
    call_cv_.wait_for(lock, std::min<std::chrono::steady_clock::duration>(deadline - now, std::chrono::milliseconds(1)));
  }
  if (response.status != 0) {
    throw RemoteServiceError(response.status, "'" + service_name + "' failed: " + to_string(response.body));
  }
  return std::move(response.body);
}

std::vector<DiscoveryRecord> ParticipantImpl::discover(DiscoveryFilter filter) const
{
  auto wanted = [filter](EntityKind k) {
      switch (filter) {
        case DiscoveryFilter::Topics:
          return k == EntityKind::Publisher || k == EntityKind::Subscriber;
        case DiscoveryFilter::Services:
          return k == EntityKind::Service;
        case DiscoveryFilter::All:
          return true;
      }
      return false;
    };
  std::lock_guard lock(mutex_);
  const std::int64_t now = core_->clock->now_ns();
  const std::int64_t own_deadline = now + kLivelinessPeriods * period_ns_;
  std::vector<DiscoveryRecord> out;
  auto add = [&](DiscoveryRecord rec) {
      if (wanted(rec.entity)) {
        out.push_back(std::move(rec));
      }
    };
  add({EntityKind::Participant, id_, 0, name_, 0, 0, {}, own_deadline});
  for (const auto & [eid, w] : writers_) {
    add({EntityKind::Publisher, id_, eid, w->topic.name, w->topic.type_hash, 0, w->topic.qos, own_deadline});
  }
  for (const auto & [eid, r] : readers_) {
    add({EntityKind::Subscriber, id_, eid, r->topic.name, r->topic.type_hash, 0, r->topic.qos, own_deadline});
  }
  for (const auto & [eid, s] : services_) {
    add(
      {EntityKind::Service, id_, eid, s->descriptor.service_name, s->descriptor.request_type_hash,
        s->descriptor.response_type_hash, {}, own_deadline});
  }
  for (const auto & [key, rec] : remote_) {
    if (!alive_locked(rec.participant_id, now)) {
      continue;
    }
    DiscoveryRecord copy = rec;
    copy.liveliness_deadline_ns = last_heard_.at(rec.participant_id) + kLivelinessPeriods * period_ns_;
    add(std::move(copy));
  }
  return out;
}

std::size_t ParticipantImpl::spin_some()
{
  std::unique_lock spin(spin_mutex_, std::try_to_lock);
  if (!spin.owns_lock() || closed_.load()) {
    return 0;
  }
  std::deque<Frame> frames = inbox_->drain();
  const std::int64_t now = core_->clock->now_ns();
  for (const Frame & f : frames) {
    handle(f, now);
  }
  run_timers(now);
  return frames.size();
}

void ParticipantImpl::shutdown()
{
  if (closed_.exchange(true)) {
    return;
  }
  {
    std::lock_guard lock(mutex_);
    for (const auto & [eid, w] : writers_) {
      std::lock_guard wlock(w->mutex);
      w->closed = true;
      w->matches.clear();
    }
    for (const auto & [eid, r] : readers_) {
      std::lock_guard rlock(r->mutex);
      r->closed = true;
    }
    if (!hub_) {
      for (const auto & [eid, s] : services_) {
        core_->release_service(s->descriptor.service_name);
      }
    }
  }
  core_->remove_participant(id_);
  if (worker_.joinable() && worker_.get_id() != std::this_thread::get_id()) {
    worker_.request_stop();
    worker_.join();
  }
  call_cv_.notify_all();
}

Frame ParticipantImpl::announcement_frame(
  EntityKind kind, std::uint32_t entity_id, const Announcement & a) const
{
  Frame f;
  f.type = kind == EntityKind::Subscriber ? MsgType::Subscribe : MsgType::Announce;
  f.participant_id = id_;
  f.entity_id = entity_id;
  f.payload = encode_announcement(a);
  return f;
}

void ParticipantImpl::announce_all_locked(std::optional<std::uint64_t> to)
{
  send(to, announcement_frame(EntityKind::Participant, 0, {EntityKind::Participant, name_, 0, 0, {}}));
  for (const auto & [eid, w] : writers_) {
    send(
      to, announcement_frame(
        EntityKind::Publisher, eid,
        {EntityKind::Publisher, w->topic.name, w->topic.type_hash, 0, w->topic.qos}));
  }
  for (const auto & [eid, r] : readers_) {
    send(
      to, announcement_frame(
        EntityKind::Subscriber, eid,
        {EntityKind::Subscriber, r->topic.name, r->topic.type_hash, 0, r->topic.qos}));
  }
  for (const auto & [eid, s] : services_) {
    send(
      to, announcement_frame(
        EntityKind::Service, eid,
        {EntityKind::Service, s->descriptor.service_name, s->descriptor.request_type_hash,
          s->descriptor.response_type_hash, {}}));
  }
}

void ParticipantImpl::note_alive_locked(std::uint64_t participant_id, std::int64_t now)
{
  if (participant_id != id_) {
    auto & t = last_heard_[participant_id];
    t = std::max(t, now);
  }
}

bool ParticipantImpl::alive_locked(std::uint64_t participant_id, std::int64_t now) const
{
  if (participant_id == id_) {
    return true;
  }
  auto it = last_heard_.find(participant_id);
  return it != last_heard_.end() && now < it->second + kLivelinessPeriods * period_ns_;
}

void ParticipantImpl::handle(const Frame & frame, std::int64_t now)
{
  try {
    switch (frame.type) {
      case MsgType::Announce:
      case MsgType::Subscribe:
        on_announcement(frame, now);
        break;
      case MsgType::Heartbeat: {
          std::lock_guard lock(mutex_);
          if (frame.participant_id != id_ && !last_heard_.contains(frame.participant_id)) {
            // A heartbeat from a peer we have not seen announce yet.
            note_alive_locked(frame.participant_id, now);
            announce_all_locked(frame.participant_id);
          }
          note_alive_locked(frame.participant_id, now);
          if (frame.entity_id == 0) {
            break;
          }
          const WriterHeartbeat hb = decode_writer_heartbeat(frame.payload);
          auto it = readers_.find(hb.reader_entity_id);
          if (it == readers_.end()) {
            break;
          }
          auto an = it->second->on_heartbeat(
            {frame.participant_id, frame.entity_id}, hb.first_seq, frame.seq, now);
          if (an) {
            Frame reply;
            reply.type = MsgType::Nack;
            reply.participant_id = id_;
            reply.entity_id = hb.reader_entity_id;
            reply.payload = encode_acknack(*an);
            send(frame.participant_id, reply);
          }
          break;
        }
      case MsgType::Nack: {
          const AckNack an = decode_acknack(frame.payload);
          std::lock_guard lock(mutex_);
          auto it = writers_.find(an.writer_entity_id);
          if (it != writers_.end()) {
            it->second->on_acknack(frame.participant_id, frame.entity_id, an);
          }
          break;
        }
      case MsgType::Data: {
          std::lock_guard lock(mutex_);
          const EntityKey key{frame.participant_id, frame.entity_id};
          std::optional<Payload> payload;
          for (const auto & [eid, r] : readers_) {
            if (!payload) {
              payload = Payload::copy_of(frame.payload);
            }
            r->on_data(
              key, Sample{r->topic.name, frame.seq, make_publisher_id(key.first, key.second), now, *payload},
              now);
          }
          break;
        }
      case MsgType::Request:
        on_request(frame);
        break;
      case MsgType::Response:
        on_response(frame);
        break;
    }
  } catch (const FramingError &) {
    // A control payload that fails to parse is dropped like a lost frame.
  }
}

void ParticipantImpl::on_announcement(const Frame & frame, std::int64_t now)
{
  const Announcement a = decode_announcement(frame.payload);
  if ((frame.type == MsgType::Subscribe) != (a.kind == EntityKind::Subscriber)) {
    return;
  }
  std::lock_guard lock(mutex_);
  if (frame.participant_id == id_) {
    return;
  }
  const bool new_peer = !last_heard_.contains(frame.participant_id);
  note_alive_locked(frame.participant_id, now);
  DiscoveryRecord rec{
    a.kind, frame.participant_id, frame.entity_id, a.name, a.type_hash, a.response_type_hash, a.qos, 0};
  remote_[{frame.participant_id, frame.entity_id}] = rec;
  if (a.kind == EntityKind::Publisher) {
    match_remote_writer_locked(rec);
  } else if (a.kind == EntityKind::Subscriber) {
    match_remote_reader_locked(rec);
  }
  if (new_peer) {
    announce_all_locked(frame.participant_id);
  }
}

void ParticipantImpl::match_remote_reader_locked(const DiscoveryRecord & rec)
{
  const TopicDescriptor reader = as_topic(rec);
  for (const auto & [eid, w] : writers_) {
    if (!endpoints_match(w->topic, reader)) {
      continue;
    }
    ReaderMatch m;
    m.participant_id = rec.participant_id;
    m.entity_id = rec.entity_id;
    m.qos = rec.qos;
    if (!hub_) {
      auto local = core_->find_in_process_reader({rec.participant_id, rec.entity_id});
      if (!local) {
        continue;
      }
      m.direct = true;
      m.local = local;
    }
    w->add_match(std::move(m));
  }
}

void ParticipantImpl::match_remote_writer_locked(const DiscoveryRecord & rec)
{
  const TopicDescriptor writer = as_topic(rec);
  for (const auto & [eid, r] : readers_) {
    if (!endpoints_match(writer, r->topic)) {
      continue;
    }
    std::lock_guard rlock(r->mutex);
    if (!r->writers.contains({rec.participant_id, rec.entity_id})) {
      WriterProxy proxy;
      proxy.writer_qos = rec.qos;
      // Direct delivery needs no sequencing.
      proxy.synced = !hub_;
      r->writers.emplace(EntityKey{rec.participant_id, rec.entity_id}, std::move(proxy));
    }
  }
}

void ParticipantImpl::on_request(const Frame & frame)
{
  std::shared_ptr<ServiceImpl> svc;
  {
    std::lock_guard lock(mutex_);
    auto it = services_.find(frame.entity_id);
    if (it != services_.end()) {
      svc = it->second;
    }
  }
  Frame reply;
  reply.type = MsgType::Response;
  reply.participant_id = id_;
  reply.entity_id = frame.entity_id;
  reply.seq = frame.seq;
  const std::uint64_t caller = frame.participant_id;
  if (!svc) {
    reply.payload = encode_response({kStatusNoSuchService, to_bytes("no such service")});
    send(caller, reply);
    return;
  }
  post_job(
    [this, svc, reply, caller, request = frame.payload]() mutable {
      ResponseBody body;
      try {
        body.body = svc->handler(request);
      } catch (const ServiceFault & e) {
        body.status = e.code() == 0 ? kStatusHandlerException : e.code();
        body.body = to_bytes(e.what());
      } catch (const std::exception & e) {
        body.status = kStatusHandlerException;
        body.body = to_bytes(e.what());
      }
      ++svc->handled;
      reply.payload = encode_response(body);
      send(caller, reply);
    });
}

void ParticipantImpl::on_response(const Frame & frame)
{
  ResponseBody body = decode_response(frame.payload);
  {
    std::lock_guard lock(call_mutex_);
    auto it = pending_calls_.find(frame.seq);
    if (it == pending_calls_.end() || it->second) {
      late_responses_.fetch_add(1);
      return;
    }
    it->second = std::move(body);
  }
  call_cv_.notify_all();
}

void ParticipantImpl::expire_peers_locked(std::int64_t now)
{
  std::vector<std::uint64_t> gone;
  for (const auto & [pid, t] : last_heard_) {
    if (now - t >= kLivelinessPeriods * period_ns_) {
      gone.push_back(pid);
    }
  }
  for (std::uint64_t pid : gone) {
    last_heard_.erase(pid);
    std::erase_if(remote_, [pid](const auto & kv) {return kv.first.first == pid;});
    for (const auto & [eid, w] : writers_) {
      w->remove_matches_of(pid);
    }
    for (const auto & [eid, r] : readers_) {
      std::lock_guard rlock(r->mutex);
      std::erase_if(r->writers, [pid](const auto & kv) {return kv.first.first == pid;});
    }
  }
}

void ParticipantImpl::run_timers(std::int64_t now)
{
  std::lock_guard lock(mutex_);
  if (now >= next_heartbeat_ns_) {
    Frame hb;
    hb.type = MsgType::Heartbeat;
    hb.participant_id = id_;
    hb.seq = heartbeat_count_++;
    send(std::nullopt, hb);
    announce_all_locked(std::nullopt);
    for (const auto & [eid, w] : writers_) {
      w->send_heartbeats();
    }
    next_heartbeat_ns_ = now + period_ns_;
  }
  for (const auto & [eid, r] : readers_) {
    r->check_deadline(now);
  }
  expire_peers_locked(now);
}

}  // namespace dfp::middleware::detail
