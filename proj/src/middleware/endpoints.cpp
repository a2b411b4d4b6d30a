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
#include <limits>
#include <set>
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

// Bounds the NACK payload; the rest is requested on the next heartbeat.
constexpr std::size_t kMaxNackEntries = 256;

}  // namespace

LoopbackHub::LoopbackHub(std::uint16_t port, double drop_probability, std::uint64_t seed)
: port_(port), rng_(seed + port), drop_(std::clamp(drop_probability, 0.0, 1.0))
{
}

void LoopbackHub::join(std::uint64_t participant_id, std::shared_ptr<Inbox> inbox)
{
  std::lock_guard lock(mutex_);
  members_[participant_id] = inbox;
}

void LoopbackHub::leave(std::uint64_t participant_id)
{
  std::lock_guard lock(mutex_);
  members_.erase(participant_id);
}

void LoopbackHub::send(std::uint64_t from, std::optional<std::uint64_t> to, const Frame & frame)
{
  send_encoded(from, to, encode_frame(frame));
}

void LoopbackHub::send_encoded(std::uint64_t from, std::optional<std::uint64_t> to, const Bytes & bytes)
{
  std::lock_guard lock(mutex_);
  if (to) {
    auto it = members_.find(*to);
    if (it == members_.end()) {
      return;
    }
    if (auto inbox = it->second.lock()) {
      deliver_locked(inbox, bytes);
    }
    return;
  }
  for (const auto & [pid, weak] : members_) {
    if (pid == from) {
      continue;
    }
    if (auto inbox = weak.lock()) {
      deliver_locked(inbox, bytes);
    }
  }
}

void LoopbackHub::deliver_locked(const std::shared_ptr<Inbox> & inbox, const Bytes & bytes)
{
  ++stats_.frames_sent;
  if (drop_(rng_)) {
    ++stats_.frames_dropped;
    return;
  }
  try {
    inbox->push(decode_frame(bytes));
    ++stats_.frames_delivered;
  } catch (const FramingError &) {
    ++stats_.decode_errors;
  }
}

LinkStats LoopbackHub::stats() const
{
  std::lock_guard lock(mutex_);
  return stats_;
}

void ReaderImpl::push_locked(const Sample & s, std::int64_t now_ns)
{
  queue.push_back(s);
  ++received;
  last_activity_ns = now_ns;
  const History & h = topic.qos.history;
  if (h.kind == HistoryKind::KeepLast) {
    while (queue.size() > h.depth) {
      queue.pop_front();
      ++dropped;
    }
  }
}

void ReaderImpl::deliver(const Sample & s, std::int64_t now_ns)
{
  std::lock_guard lock(mutex);
  if (!closed) {
    push_locked(s, now_ns);
  }
}

void ReaderImpl::flush_locked(WriterProxy & proxy, std::int64_t now_ns)
{
  while (!proxy.pending.empty()) {
    auto it = proxy.pending.begin();
    if (it->first < proxy.next_expected) {
      proxy.pending.erase(it);
      continue;
    }
    if (it->first != proxy.next_expected) {
      break;
    }
    push_locked(it->second, now_ns);
    ++proxy.next_expected;
    proxy.pending.erase(it);
  }
}

void ReaderImpl::on_data(EntityKey writer, Sample s, std::int64_t now_ns)
{
  std::lock_guard lock(mutex);
  if (closed) {
    return;
  }
  auto it = writers.find(writer);
  if (it == writers.end()) {
    return;
  }
  WriterProxy & proxy = it->second;
  const bool reliable_pair = reliable() && proxy.writer_qos.reliability == Reliability::Reliable;
  if (!reliable_pair) {
    if (!proxy.synced || s.seq >= proxy.next_expected) {
      proxy.synced = true;
      proxy.next_expected = s.seq + 1;
      push_locked(s, now_ns);
    }
    return;
  }
  if (!proxy.synced) {
    proxy.pending.emplace(s.seq, std::move(s));
    return;
  }
  if (s.seq < proxy.next_expected) {
    return;
  }
  if (s.seq == proxy.next_expected) {
    push_locked(s, now_ns);
    ++proxy.next_expected;
    flush_locked(proxy, now_ns);
    return;
  }
  proxy.pending.emplace(s.seq, std::move(s));
}

std::optional<AckNack> ReaderImpl::on_heartbeat(
  EntityKey writer, std::uint64_t first_seq, std::uint64_t next_seq, std::int64_t now_ns)
{
  std::lock_guard lock(mutex);
  if (closed || !reliable()) {
    return std::nullopt;
  }
  auto it = writers.find(writer);
  if (it == writers.end() || it->second.writer_qos.reliability != Reliability::Reliable) {
    return std::nullopt;
  }
  WriterProxy & proxy = it->second;
  if (!proxy.synced) {
    proxy.synced = true;
    proxy.next_expected = first_seq;
  } else if (first_seq > proxy.next_expected) {
    // The writer no longer holds what we miss.
    proxy.next_expected = first_seq;
  }
  flush_locked(proxy, now_ns);

  AckNack an;
  an.writer_entity_id = writer.second;
  an.ack_base = proxy.next_expected;
  for (std::uint64_t seq = proxy.next_expected; seq < next_seq; ++seq) {
    if (an.missing.size() >= kMaxNackEntries) {
      break;
    }
    if (!proxy.pending.contains(seq)) {
      an.missing.push_back(seq);
    }
  }
  return an;
}

void ReaderImpl::check_deadline(std::int64_t now_ns)
{
  std::lock_guard lock(mutex);
  if (closed || !topic.qos.deadline_ms) {
    return;
  }
  const std::int64_t deadline_ns = static_cast<std::int64_t>(*topic.qos.deadline_ms) * 1'000'000;
  if (now_ns - last_activity_ns > deadline_ns) {
    ++deadline_missed;
    last_activity_ns = now_ns;
  }
}

bool WriterImpl::retains() const
{
  return topic.qos.durability == Durability::TransientLocal ||
         (topic.qos.reliability == Reliability::Reliable && !in_process());
}

std::uint8_t WriterImpl::flags() const
{
  std::uint8_t f = 0;
  if (topic.qos.reliability == Reliability::Reliable) {
    f |= kFlagReliable;
  }
  if (topic.qos.durability == Durability::TransientLocal) {
    f |= kFlagTransientLocal;
  }
  return f;
}

Frame WriterImpl::data_frame(const Sample & s) const
{
  Frame f;
  f.type = MsgType::Data;
  f.flags = flags();
  f.participant_id = participant_id;
  f.entity_id = entity_id;
  f.seq = s.seq;
  auto bytes = s.payload.bytes();
  f.payload.assign(bytes.begin(), bytes.end());
  return f;
}

Loan WriterImpl::loan(std::size_t size)
{
  if (arena) {
    return arena->loan(size);
  }
  if (size > kMaxWirePayload) {
    throw MwError(MwErrc::PayloadTooLarge, "payload exceeds the wire limit");
  }
  return Loan::heap(size);
}

std::uint64_t WriterImpl::publish(Loan && loan)
{
  if (!loan) {
    throw MwError(MwErrc::InvalidArgument, "publish of an empty loan");
  }
  if (!in_process() && loan.size() > kMaxWirePayload) {
    throw MwError(MwErrc::PayloadTooLarge, "payload exceeds the wire limit");
  }
  Payload payload = std::move(loan).freeze();
  const std::int64_t now = clock->now_ns();

  std::lock_guard lock(mutex);
  if (closed) {
    throw MwError(MwErrc::ParticipantClosed, "publisher's participant is shut down");
  }
  Sample s{topic.name, next_seq++, make_publisher_id(participant_id, entity_id), now, std::move(payload)};
  if (retains()) {
    history.push_back(s);
  }

  std::set<std::uint64_t> remote_targets;
  for (auto it = matches.begin(); it != matches.end(); ) {
    if (it->direct) {
      if (auto reader = it->local.lock()) {
        reader->deliver(s, now);
        ++it;
      } else {
        it = matches.erase(it);
      }
    } else {
      remote_targets.insert(it->participant_id);
      ++it;
    }
  }
  if (!remote_targets.empty()) {
    const Bytes bytes = encode_frame(data_frame(s));
    for (std::uint64_t pid : remote_targets) {
      hub->send_encoded(participant_id, pid, bytes);
    }
  }
  trim_history_locked();
  return s.seq;
}

void WriterImpl::trim_history_locked()
{
  const History & h = topic.qos.history;
  if (h.kind == HistoryKind::KeepLast) {
    while (history.size() > h.depth) {
      history.pop_front();
    }
    return;
  }
  if (topic.qos.durability == Durability::TransientLocal) {
    return;
  }
  std::uint64_t floor = next_seq;
  for (const auto & m : matches) {
    if (!m.direct && m.qos.reliability == Reliability::Reliable) {
      floor = std::min(floor, m.ack_base);
    }
  }
  while (!history.empty() && history.front().seq < floor) {
    history.pop_front();
  }
}

std::uint64_t WriterImpl::first_available_locked(const ReaderMatch & m) const
{
  if (history.empty()) {
    return std::max(m.first_seq, next_seq);
  }
  return std::max(m.first_seq, history.front().seq);
}

void WriterImpl::send_heartbeat_locked(const ReaderMatch & m)
{
  Frame f;
  f.type = MsgType::Heartbeat;
  f.flags = flags();
  f.participant_id = participant_id;
  f.entity_id = entity_id;
  f.seq = next_seq;
  f.payload = encode_writer_heartbeat({m.entity_id, first_available_locked(m)});
  hub->send(participant_id, m.participant_id, f);
}

void WriterImpl::add_match(ReaderMatch match)
{
  std::lock_guard lock(mutex);
  if (closed) {
    return;
  }
  for (const auto & m : matches) {
    if (m.participant_id == match.participant_id && m.entity_id == match.entity_id) {
      return;
    }
  }

  std::size_t replay = 0;
  if (topic.qos.durability == Durability::TransientLocal &&
    match.qos.durability == Durability::TransientLocal)
  {
    replay = history.size();
    if (match.qos.history.kind == HistoryKind::KeepLast) {
      replay = std::min<std::size_t>(replay, match.qos.history.depth);
    }
  }
  match.first_seq = replay > 0 ? history[history.size() - replay].seq : next_seq;
  match.ack_base = match.first_seq;

  const std::int64_t now = clock->now_ns();
  for (std::size_t i = history.size() - replay; i < history.size(); ++i) {
    if (match.direct) {
      if (auto reader = match.local.lock()) {
        reader->deliver(history[i], now);
      }
    } else {
      hub->send(participant_id, match.participant_id, data_frame(history[i]));
    }
  }
  matches.push_back(match);
  if (!match.direct && topic.qos.reliability == Reliability::Reliable &&
    match.qos.reliability == Reliability::Reliable)
  {
    send_heartbeat_locked(matches.back());
  }
}

void WriterImpl::remove_matches_of(std::uint64_t pid)
{
  std::lock_guard lock(mutex);
  std::erase_if(matches, [pid](const ReaderMatch & m) {return m.participant_id == pid;});
  trim_history_locked();
}

void WriterImpl::remove_match(EntityKey reader)
{
  std::lock_guard lock(mutex);
  std::erase_if(
    matches, [&](const ReaderMatch & m) {
      return m.participant_id == reader.first && m.entity_id == reader.second;
    });
  trim_history_locked();
}

void WriterImpl::on_acknack(std::uint64_t reader_participant, std::uint32_t reader_entity, const AckNack & an)
{
  std::lock_guard lock(mutex);
  if (closed || in_process()) {
    return;
  }
  auto it = std::find_if(
    matches.begin(), matches.end(), [&](const ReaderMatch & m) {
      return m.participant_id == reader_participant && m.entity_id == reader_entity;
    });
  if (it == matches.end()) {
    return;
  }
  it->ack_base = std::max(it->ack_base, an.ack_base);
  for (std::uint64_t seq : an.missing) {
    if (history.empty() || seq < history.front().seq || seq >= next_seq) {
      continue;
    }
    // History holds consecutive sequence numbers.
    const Sample & s = history[seq - history.front().seq];
    hub->send(participant_id, reader_participant, data_frame(s));
  }
  trim_history_locked();
}

void WriterImpl::send_heartbeats()
{
  std::lock_guard lock(mutex);
  if (closed || in_process() || topic.qos.reliability != Reliability::Reliable) {
    return;
  }
  for (const auto & m : matches) {
    if (!m.direct && m.qos.reliability == Reliability::Reliable) {
      send_heartbeat_locked(m);
    }
  }
}

}  // namespace detail

std::uint64_t Publisher::publish(std::span<const std::byte> bytes)
{
  Loan l = impl_->loan(bytes.size());
  std::copy(bytes.begin(), bytes.end(), l.data().begin());
  return impl_->publish(std::move(l));
}

Loan Publisher::loan(std::size_t size)
{
  return impl_->loan(size);
}

std::uint64_t Publisher::publish(Loan && loan)
{
  return impl_->publish(std::move(loan));
}

const TopicDescriptor & Publisher::topic() const
{
  return impl_->topic;
}

std::uint64_t Publisher::id() const
{
  return make_publisher_id(impl_->participant_id, impl_->entity_id);
}

std::size_t Publisher::matched_count() const
{
  std::lock_guard lock(impl_->mutex);
  return static_cast<std::size_t>(std::count_if(
           impl_->matches.begin(), impl_->matches.end(),
           [](const detail::ReaderMatch & m) {return !m.direct || !m.local.expired();}));
}

std::uint64_t Publisher::published_count() const
{
  std::lock_guard lock(impl_->mutex);
  return impl_->next_seq;
}

std::size_t Publisher::retained_count() const
{
  std::lock_guard lock(impl_->mutex);
  return impl_->history.size();
}

std::vector<Sample> Subscriber::take(std::size_t max_n)
{
  std::lock_guard lock(impl_->mutex);
  std::vector<Sample> out;
  const std::size_t n = std::min(max_n, impl_->queue.size());
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.push_back(std::move(impl_->queue.front()));
    impl_->queue.pop_front();
  }
  return out;
}

const TopicDescriptor & Subscriber::topic() const
{
  return impl_->topic;
}

std::uint64_t Subscriber::id() const
{
  return make_publisher_id(impl_->participant_id, impl_->entity_id);
}

std::size_t Subscriber::matched_count() const
{
  std::lock_guard lock(impl_->mutex);
  return impl_->writers.size();
}

std::size_t Subscriber::queued() const
{
  std::lock_guard lock(impl_->mutex);
  return impl_->queue.size();
}

std::uint64_t Subscriber::received_count() const
{
  std::lock_guard lock(impl_->mutex);
  return impl_->received;
}

std::uint64_t Subscriber::dropped_count() const
{
  std::lock_guard lock(impl_->mutex);
  return impl_->dropped;
}

std::uint64_t Subscriber::deadline_missed_count() const
{
  std::lock_guard lock(impl_->mutex);
  return impl_->deadline_missed;
}

const ServiceDescriptor & ServiceHandle::descriptor() const
{
  return impl_->descriptor;
}

std::uint64_t ServiceHandle::handled_count() const
{
  return impl_->handled.load();
}

}  // namespace dfp::middleware
