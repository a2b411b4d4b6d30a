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
#include <chrono>
#include <cstring>
#include <deque>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"

#include "dfp/middleware/domain.hpp"

namespace mw = dfp::middleware;
using mw::Domain;
using mw::DomainOptions;
using mw::MwErrc;
using mw::MwError;
using mw::QoSProfile;
using mw::TopicDescriptor;
using mw::Transport;

namespace
{

template<typename F>
MwErrc mw_error_of(F && f)
{
  try {
    f();
  } catch (const MwError & e) {
    return e.code();
  }
  ADD_FAILURE() << "expected MwError";
  return MwErrc::InvalidArgument;
}

template<typename F>
mw::WireErrc wire_error_of(F && f)
{
  try {
    f();
  } catch (const mw::FramingError & e) {
    return e.code();
  }
  ADD_FAILURE() << "expected FramingError";
  return mw::WireErrc::Truncated;
}

mw::Bytes from_hex(const std::string & hex)
{
  mw::Bytes out;
  for (std::size_t i = 0; i + 1 < hex.size(); i += 2) {
    out.push_back(static_cast<std::byte>(std::stoul(hex.substr(i, 2), nullptr, 16)));
  }
  return out;
}

QoSProfile qos(
  mw::Reliability r, mw::History h = mw::History::keep_last(1),
  mw::Durability d = mw::Durability::Volatile)
{
  QoSProfile q;
  q.reliability = r;
  q.history = h;
  q.durability = d;
  return q;
}

TopicDescriptor topic(const std::string & name, const QoSProfile & q, std::uint64_t hash = 0xABCDu)
{
  return {name, hash, q};
}

std::uint64_t read_u64(const mw::Sample & s)
{
  std::uint64_t v = 0;
  std::memcpy(&v, s.payload.data(), sizeof(v));
  return v;
}

std::span<const std::byte> as_span(const std::uint64_t & v)
{
  return {reinterpret_cast<const std::byte *>(&v), sizeof(v)};
}

nlohmann::json load_golden()
{
  std::ifstream in(std::string(DFP_FIXTURE_DIR) + "/wire_golden.json");
  return nlohmann::json::parse(in);
}

}  // namespace

TEST(Wire, GoldenFramesRoundTripBitExactly)
{
  const auto golden = load_golden();
  std::set<int> types;
  for (const auto & c : golden["frames"]) {
    SCOPED_TRACE(c["name"].get<std::string>());
    mw::Frame f;
    f.type = static_cast<mw::MsgType>(c["msg_type"].get<int>());
    f.flags = c["flags"].get<std::uint8_t>();
    f.participant_id = std::stoull(c["participant_id"].get<std::string>());
    f.entity_id = c["entity_id"].get<std::uint32_t>();
    f.seq = std::stoull(c["seq"].get<std::string>());
    f.payload = from_hex(c["payload"].get<std::string>());
    const auto expected = from_hex(c["frame"].get<std::string>());
    EXPECT_EQ(mw::encode_frame(f), expected);
    EXPECT_EQ(mw::decode_frame(expected), f);
    types.insert(c["msg_type"].get<int>());
  }
  EXPECT_EQ(types.size(), 7u);
}

TEST(Wire, DataFrameHeaderLayout)
{
  mw::Frame f;
  f.participant_id = 1;
  f.entity_id = 2;
  f.payload = mw::to_bytes("hi");
  const auto bytes = mw::encode_frame(f);
  ASSERT_EQ(bytes.size(), 34u);
  const std::uint8_t prefix[] = {0x44, 0x46, 0x50, 0x31, 0x01, 0x00, 0x00, 0x00};
  for (std::size_t i = 0; i < sizeof(prefix); ++i) {
    EXPECT_EQ(static_cast<std::uint8_t>(bytes[i]), prefix[i]) << i;
  }
}

TEST(Wire, GoldenControlPayloadsDecode)
{
  const auto golden = load_golden();
  std::map<std::string, mw::Bytes> payload;
  for (const auto & c : golden["frames"]) {
    payload[c["name"].get<std::string>()] = from_hex(c["payload"].get<std::string>());
  }
  mw::Announcement pub;
  pub.kind = mw::EntityKind::Publisher;
  pub.name = "sensors/radar0";
  pub.type_hash = 0x0123456789ABCDEFull;
  pub.qos = qos(mw::Reliability::Reliable, mw::History::keep_last(8), mw::Durability::TransientLocal);
  pub.qos.deadline_ms = 100;
  EXPECT_EQ(mw::decode_announcement(payload["announce_publisher"]), pub);
  EXPECT_EQ(mw::encode_announcement(pub), payload["announce_publisher"]);

  mw::Announcement sub;
  sub.kind = mw::EntityKind::Subscriber;
  sub.name = "vehicle/state";
  sub.type_hash = 0xFEDCBA9876543210ull;
  sub.qos = qos(mw::Reliability::BestEffort, mw::History::keep_all());
  EXPECT_EQ(mw::decode_announcement(payload["subscribe"]), sub);

  EXPECT_EQ(mw::decode_writer_heartbeat(payload["heartbeat_writer"]), (mw::WriterHeartbeat{6, 990}));
  EXPECT_EQ(mw::decode_acknack(payload["nack"]), (mw::AckNack{4, 990, {991, 995}}));
  EXPECT_EQ(mw::decode_response(payload["response"]), (mw::ResponseBody{0, mw::to_bytes("pong")}));
}

TEST(Wire, CorruptedHeaderIsRejected)
{
  mw::Frame f;
  f.payload = mw::to_bytes("hi");
  const auto good = mw::encode_frame(f);

  auto bad = good;
  bad[0] = std::byte{0x45};
  EXPECT_EQ(wire_error_of([&] {mw::decode_frame(bad);}), mw::WireErrc::BadMagic);
  bad = good;
  bad[4] = std::byte{0x02};
  EXPECT_EQ(wire_error_of([&] {mw::decode_frame(bad);}), mw::WireErrc::BadVersion);
  bad = good;
  bad[5] = std::byte{0x07};
  EXPECT_EQ(wire_error_of([&] {mw::decode_frame(bad);}), mw::WireErrc::BadMsgType);
  bad = good;
  bad[6] = std::byte{0x04};
  EXPECT_EQ(wire_error_of([&] {mw::decode_frame(bad);}), mw::WireErrc::ReservedBits);
  bad = good;
  bad[7] = std::byte{0x01};
  EXPECT_EQ(wire_error_of([&] {mw::decode_frame(bad);}), mw::WireErrc::ReservedBits);
  bad = good;
  bad.pop_back();
  EXPECT_EQ(wire_error_of([&] {mw::decode_frame(bad);}), mw::WireErrc::LengthMismatch);
  bad.resize(10);
  EXPECT_EQ(wire_error_of([&] {mw::decode_frame(bad);}), mw::WireErrc::Truncated);
  EXPECT_EQ(
    wire_error_of([] {mw::check_wire_payload_size(0x100000000ull);}), mw::WireErrc::PayloadTooLarge);
  EXPECT_NO_THROW(mw::check_wire_payload_size(0xFFFFFFFFull));
}

TEST(Qos, CompatibilityLatticeHasNineOfSixteen)
{
  using mw::Durability;
  using mw::Reliability;
  // Offered must be at least as strong on both axes; enumerated by hand.
  const std::set<std::pair<int, int>> compatible_pairs = {
    // (offered, requested) encoded as reliability * 2 + durability
    {0, 0},
    {1, 0}, {1, 1},
    {2, 0}, {2, 2},
    {3, 0}, {3, 1}, {3, 2}, {3, 3},
  };
  int count = 0;
  for (int o = 0; o < 4; ++o) {
    for (int r = 0; r < 4; ++r) {
      const auto offered = qos(Reliability(o / 2), mw::History::keep_last(1), Durability(o % 2));
      const auto requested = qos(Reliability(r / 2), mw::History::keep_all(), Durability(r % 2));
      const bool c = mw::qos_compatible(offered, requested);
      EXPECT_EQ(c, compatible_pairs.contains({o, r})) << o << "," << r;
      count += c ? 1 : 0;
    }
  }
  EXPECT_EQ(count, 9);
}

TEST(Qos, ValidationAndTopicNames)
{
  EXPECT_FALSE(mw::validate(qos(mw::Reliability::Reliable)).has_value());
  EXPECT_TRUE(mw::validate(qos(mw::Reliability::Reliable, mw::History::keep_last(0))).has_value());
  auto q = qos(mw::Reliability::BestEffort);
  q.deadline_ms = 0;
  EXPECT_TRUE(mw::validate(q).has_value());
  EXPECT_TRUE(mw::is_valid_topic_name("sensors/radar0"));
  EXPECT_FALSE(mw::is_valid_topic_name(""));
  EXPECT_FALSE(mw::is_valid_topic_name("Sensors"));
  EXPECT_FALSE(mw::is_valid_topic_name("a b"));
}

TEST(Domain, ParticipantValidationAndTransport)
{
  DomainOptions o;
  o.unavailable_ports = {7001};
  Domain d(o);
  EXPECT_EQ(mw_error_of([&] {d.create_participant("", Transport::in_process());}), MwErrc::InvalidArgument);
  EXPECT_EQ(
    mw_error_of([&] {d.create_participant("x", Transport::loopback(7001));}), MwErrc::TransportUnavailable);
  EXPECT_EQ(
    mw_error_of([&] {d.create_participant("x", Transport::loopback(0));}), MwErrc::TransportUnavailable);
  auto p = d.create_participant("perception", Transport::in_process());
  d.spin_some();
  const auto recs = p->discover();
  ASSERT_EQ(recs.size(), 1u);
  EXPECT_EQ(recs[0].entity, mw::EntityKind::Participant);
  EXPECT_EQ(recs[0].name, "perception");
}

TEST(Domain, PublishTakeRoundTrip)
{
  Domain d;
  auto p = d.create_participant("p", Transport::in_process());
  auto t = topic("demo/abc", qos(mw::Reliability::Reliable, mw::History::keep_all()));
  auto pub = p->create_publisher(t);
  auto sub = p->create_subscriber(t);
  EXPECT_TRUE(sub.take(10).empty());
  EXPECT_EQ(pub.publish(mw::to_bytes("abc")), 0u);
  auto got = sub.take(10);
  ASSERT_EQ(got.size(), 1u);
  EXPECT_EQ(mw::to_string(got[0].payload.bytes()), "abc");
  EXPECT_EQ(got[0].seq, 0u);
  EXPECT_EQ(got[0].publisher_id, pub.id());
  EXPECT_EQ(got[0].topic, "demo/abc");

  for (int i = 1; i <= 10; ++i) {
    pub.publish(mw::to_bytes(std::to_string(i)));
  }
  got = sub.take(100);
  ASSERT_EQ(got.size(), 10u);
  for (std::size_t i = 0; i < got.size(); ++i) {
    EXPECT_EQ(got[i].seq, i + 1);
  }
}

TEST(Domain, TypeHashMismatchAcrossParticipants)
{
  Domain d;
  auto a = d.create_participant("a", Transport::in_process());
  auto b = d.create_participant("b", Transport::in_process());
  a->create_publisher(topic("sensors/radar0", qos(mw::Reliability::BestEffort), 1));
  EXPECT_EQ(
    mw_error_of([&] {b->create_publisher(topic("sensors/radar0", qos(mw::Reliability::BestEffort), 2));}),
    MwErrc::TypeHashMismatch);
  EXPECT_EQ(
    mw_error_of([&] {a->create_subscriber(topic("sensors/radar0", qos(mw::Reliability::BestEffort), 2));}),
    MwErrc::TypeHashMismatch);
  EXPECT_EQ(
    mw_error_of([&] {a->create_publisher(topic("Bad Name", qos(mw::Reliability::BestEffort)));}),
    MwErrc::InvalidArgument);
}

TEST(Domain, MatchingAgreesWithBruteForceRule)
{
  // Property: connected iff names equal, hashes equal and offered covers
  // requested. Descriptors drawn from small pools so every case occurs.
  std::mt19937_64 rng(1234);
  const std::vector<std::string> names = {"a/x", "a/y"};
  int connected = 0;
  int rejected = 0;
  for (int trial = 0; trial < 300; ++trial) {
    auto draw = [&]() {
        QoSProfile q;
        q.reliability = mw::Reliability(rng() % 2);
        q.durability = mw::Durability(rng() % 2);
        q.history = rng() % 2 ? mw::History::keep_all() : mw::History::keep_last(1 + rng() % 4);
        return TopicDescriptor{names[rng() % 2], 1 + rng() % 2, q};
      };
    const TopicDescriptor w = draw();
    const TopicDescriptor r = draw();
    const bool loopback = trial % 3 == 0;
    const Transport tr = loopback ? Transport::loopback(7100) : Transport::in_process();

    Domain d;
    auto pa = d.create_participant("a", tr);
    auto pb = d.create_participant("b", tr);
    d.spin_some();
    auto pub = pa->create_publisher(w);
    d.spin_some();
    const bool same_name = w.name == r.name;
    if (same_name && w.type_hash != r.type_hash) {
      EXPECT_EQ(mw_error_of([&] {pb->create_subscriber(r);}), MwErrc::TypeHashMismatch);
      ++rejected;
      continue;
    }
    auto sub = pb->create_subscriber(r);
    d.spin_some();
    const bool expected = same_name && w.type_hash == r.type_hash &&
      static_cast<int>(w.qos.reliability) >= static_cast<int>(r.qos.reliability) &&
      static_cast<int>(w.qos.durability) >= static_cast<int>(r.qos.durability);
    EXPECT_EQ(pub.matched_count(), expected ? 1u : 0u) << trial;
    EXPECT_EQ(sub.matched_count(), expected ? 1u : 0u) << trial;
    pub.publish(mw::to_bytes("z"));
    d.spin_some();
    EXPECT_EQ(sub.take(10).size(), expected ? 1u : 0u) << trial;
    connected += expected ? 1 : 0;
  }
  EXPECT_GT(connected, 20);
  EXPECT_GT(rejected, 20);
}

TEST(Domain, ZeroCopyHandlesShareOneBuffer)
{
  DomainOptions o;
  o.arena_slot_size = 1 << 20;
  Domain d(o);
  auto p = d.create_participant("p", Transport::in_process());
  auto q = d.create_participant("q", Transport::in_process());
  auto t = topic("cam/frame", qos(mw::Reliability::Reliable, mw::History::keep_last(4)));
  auto pub = p->create_publisher(t);
  std::vector<mw::Subscriber> subs = {p->create_subscriber(t), q->create_subscriber(t), q->create_subscriber(t)};
  d.spin_some();
  ASSERT_EQ(pub.matched_count(), 3u);

  auto arena = d.arena_for("cam/frame");
  ASSERT_TRUE(arena);
  mw::Loan loan = pub.loan(4096);
  const std::byte * written = loan.data().data();
  std::memset(loan.data().data(), 0x5A, 4096);
  pub.publish(std::move(loan));
  EXPECT_EQ(arena->slots_in_use(), 1u);

  std::vector<mw::Sample> held;
  for (auto & s : subs) {
    auto got = s.take(1);
    ASSERT_EQ(got.size(), 1u);
    EXPECT_EQ(got[0].payload.data(), written);
    held.push_back(got[0]);
  }
  EXPECT_EQ(held[0].payload.buffer_id(), held[1].payload.buffer_id());
  EXPECT_EQ(held[1].payload.buffer_id(), held[2].payload.buffer_id());

  // The slot stays leased while any reader still holds the handle.
  held.pop_back();
  held.pop_back();
  EXPECT_EQ(arena->slots_in_use(), 1u);
  held.clear();
  EXPECT_EQ(arena->slots_in_use(), 0u);

  // The released slot is the one handed out next.
  mw::Loan again = pub.loan(16);
  EXPECT_EQ(again.data().data(), written);
  EXPECT_EQ(arena->slot_count(), 1u);
}

TEST(Domain, PayloadLargerThanSlotIsRejected)
{
  DomainOptions o;
  o.arena_slot_size = 1024;
  Domain d(o);
  auto p = d.create_participant("p", Transport::in_process());
  auto pub = p->create_publisher(topic("big/blob", qos(mw::Reliability::BestEffort)));
  EXPECT_EQ(mw_error_of([&] {pub.loan(1025);}), MwErrc::PayloadTooLarge);
  EXPECT_EQ(mw_error_of([&] {pub.publish(mw::Bytes(1025));}), MwErrc::PayloadTooLarge);
  EXPECT_NO_THROW(pub.publish(mw::Bytes(1024)));
}

TEST(Domain, KeepLastQueueMatchesRingOracle)
{
  Domain d;
  auto p = d.create_participant("p", Transport::in_process());
  auto t = topic("ring/test", qos(mw::Reliability::Reliable, mw::History::keep_last(8)));
  auto pub = p->create_publisher(t);
  auto sub = p->create_subscriber(t);

  std::mt19937 rng(99);
  std::deque<std::uint64_t> oracle;
  std::uint64_t oracle_dropped = 0;
  for (std::uint64_t i = 0; i < 1000; ++i) {
    pub.publish(as_span(i));
    oracle.push_back(i);
    if (oracle.size() > 8) {
      oracle.pop_front();
      ++oracle_dropped;
    }
    if (rng() % 50 == 0) {
      const std::size_t n = rng() % 5;
      auto got = sub.take(n);
      ASSERT_EQ(got.size(), std::min(n, oracle.size()));
      for (const auto & s : got) {
        EXPECT_EQ(read_u64(s), oracle.front());
        oracle.pop_front();
      }
    }
    ASSERT_LE(sub.queued(), 8u);
  }
  auto rest = sub.take(100);
  ASSERT_EQ(rest.size(), oracle.size());
  for (std::size_t i = 0; i < rest.size(); ++i) {
    EXPECT_EQ(read_u64(rest[i]), oracle[i]);
  }
  EXPECT_EQ(rest.back().seq, 999u);
  EXPECT_EQ(sub.dropped_count(), oracle_dropped);
}

TEST(Domain, InterleavedPublishersKeepPerPublisherOrder)
{
  Domain d;
  auto p = d.create_participant("p", Transport::in_process());
  auto t = topic("multi/pub", qos(mw::Reliability::Reliable, mw::History::keep_all()));
  auto sub = p->create_subscriber(t);
  auto a = p->create_publisher(t);
  auto b = p->create_publisher(t);

  std::thread ta([&] {for (int i = 0; i < 500; ++i) {a.publish(mw::to_bytes("a"));}});
  std::thread tb([&] {for (int i = 0; i < 500; ++i) {b.publish(mw::to_bytes("b"));}});
  ta.join();
  tb.join();

  auto got = sub.take(10000);
  ASSERT_EQ(got.size(), 1000u);
  std::map<std::uint64_t, std::uint64_t> next;
  for (const auto & s : got) {
    EXPECT_EQ(s.seq, next[s.publisher_id]++);
  }
  EXPECT_EQ(next.size(), 2u);
}

TEST(Domain, TransientLocalLateJoinerGetsLatestOnly)
{
  Domain d;
  auto a = d.create_participant("a", Transport::in_process());
  auto b = d.create_participant("b", Transport::in_process());
  auto tl = qos(mw::Reliability::Reliable, mw::History::keep_last(1), mw::Durability::TransientLocal);
  auto pub = a->create_publisher(topic("map/tiles", tl));
  d.spin_some();
  for (std::uint64_t i = 0; i < 5; ++i) {
    pub.publish(as_span(i));
  }
  auto late = b->create_subscriber(topic("map/tiles", tl));
  auto vol = b->create_subscriber(
    topic("map/tiles", qos(mw::Reliability::Reliable, mw::History::keep_last(1))));
  d.spin_some();

  auto got = late.take(10);
  ASSERT_EQ(got.size(), 1u);
  EXPECT_EQ(got[0].seq, 4u);
  EXPECT_EQ(read_u64(got[0]), 4u);
  EXPECT_TRUE(vol.take(10).empty());

  pub.publish(as_span(got[0].seq));
  auto next = vol.take(10);
  ASSERT_EQ(next.size(), 1u);
  EXPECT_EQ(next[0].seq, 5u);
}

TEST(Domain, TransientLocalReplayOverLoopback)
{
  auto clock = std::make_shared<mw::ManualClock>();
  DomainOptions o;
  o.clock = clock;
  Domain d(o);
  auto a = d.create_participant("a", Transport::loopback(7200));
  auto tl = qos(mw::Reliability::Reliable, mw::History::keep_last(3), mw::Durability::TransientLocal);
  auto pub = a->create_publisher(topic("map/tiles", tl));
  for (std::uint64_t i = 0; i < 5; ++i) {
    pub.publish(as_span(i));
  }
  auto b = d.create_participant("b", Transport::loopback(7200));
  auto sub = b->create_subscriber(topic("map/tiles", tl));
  for (int i = 0; i < 3; ++i) {
    d.spin_some();
    clock->advance(o.heartbeat_period_ns);
  }
  d.spin_some();
  auto got = sub.take(10);
  ASSERT_EQ(got.size(), 3u);
  EXPECT_EQ(got[0].seq, 2u);
  EXPECT_EQ(got[2].seq, 4u);
}

TEST(Domain, ReliabilityRequestMustBeCovered)
{
  Domain d;
  auto p = d.create_participant("p", Transport::in_process());
  auto be_pub = p->create_publisher(topic("q/a", qos(mw::Reliability::BestEffort)));
  auto rel_sub = p->create_subscriber(topic("q/a", qos(mw::Reliability::Reliable)));
  EXPECT_EQ(be_pub.matched_count(), 0u);
  EXPECT_EQ(rel_sub.matched_count(), 0u);

  auto rel_pub = p->create_publisher(topic("q/b", qos(mw::Reliability::Reliable)));
  auto be_sub = p->create_subscriber(topic("q/b", qos(mw::Reliability::BestEffort)));
  EXPECT_EQ(rel_pub.matched_count(), 1u);
  EXPECT_EQ(be_sub.matched_count(), 1u);
}

TEST(Domain, LoopbackParticipantsDiscoverEachOther)
{
  Domain d;
  auto a = d.create_participant("a", Transport::loopback(7300));
  auto b = d.create_participant("b", Transport::loopback(7300));
  auto c = d.create_participant("c", Transport::loopback(7301));
  d.spin_some();
  auto names_seen_by = [](const std::shared_ptr<mw::Participant> & p) {
      std::set<std::string> names;
      for (const auto & r : p->discover()) {
        if (r.entity == mw::EntityKind::Participant) {
          names.insert(r.name);
        }
      }
      return names;
    };
  EXPECT_EQ(names_seen_by(a), (std::set<std::string>{"a", "b"}));
  EXPECT_EQ(names_seen_by(b), (std::set<std::string>{"a", "b"}));
  EXPECT_EQ(names_seen_by(c), (std::set<std::string>{"c"}));
  EXPECT_GT(d.link_stats(7300).frames_delivered, 0u);
}

TEST(Domain, DiscoverListsTopicsAndServices)
{
  Domain d;
  auto a = d.create_participant("a", Transport::in_process());
  auto b = d.create_participant("b", Transport::in_process());
  a->create_publisher(topic("a", qos(mw::Reliability::BestEffort)));
  a->register_service({"s", 1, 2}, [](std::span<const std::byte> req) {return mw::Bytes(req.begin(), req.end());});
  d.spin_some();
  auto topics = b->discover(mw::DiscoveryFilter::Topics);
  ASSERT_EQ(topics.size(), 1u);
  EXPECT_EQ(topics[0].name, "a");
  EXPECT_EQ(topics[0].participant_id, a->id());
  auto services = b->discover(mw::DiscoveryFilter::Services);
  ASSERT_EQ(services.size(), 1u);
  EXPECT_EQ(services[0].name, "s");
  EXPECT_EQ(services[0].response_type_hash, 2u);
}

TEST(Domain, LivelinessPresenceFollowsSteppedClock)
{
  auto clock = std::make_shared<mw::ManualClock>();
  DomainOptions o;
  o.clock = clock;
  const std::int64_t period = o.heartbeat_period_ns;
  const std::int64_t step = period / 4;
  Domain d(o);
  auto a = d.create_participant("a", Transport::loopback(7400));
  auto b = d.create_participant("b", Transport::loopback(7400));
  b->register_service({"diag/echo", 1, 1}, [](std::span<const std::byte> r) {return mw::Bytes(r.begin(), r.end());});
  d.spin_some();

  // b heartbeats at every multiple of the period while it runs.
  const std::int64_t shutdown_at = 7 * step;
  std::int64_t last_heard = 0;
  for (int i = 0; i <= 40; ++i) {
    const std::int64_t now = clock->now_ns();
    if (now == shutdown_at) {
      b->shutdown();
    }
    d.spin_some();
    if (!b->is_closed() && now > 0 && now % period == 0) {
      last_heard = now;
    }
    bool present = false;
    for (const auto & r : a->discover(mw::DiscoveryFilter::Services)) {
      present = present || r.name == "diag/echo";
    }
    EXPECT_EQ(present, now - last_heard < 3 * period) << "t=" << now;
    clock->advance(step);
  }
  EXPECT_EQ(a->discover().size(), 1u);
}

TEST(Domain, ServiceEchoNotFoundAndDuplicate)
{
  Domain d;
  auto server = d.create_participant("server", Transport::in_process());
  auto client = d.create_participant("client", Transport::in_process());
  auto h = server->register_service(
    {"diag/echo", 1, 1}, [](std::span<const std::byte> r) {return mw::Bytes(r.begin(), r.end());});
  d.spin_some();
  EXPECT_EQ(mw::to_string(client->call("diag/echo", mw::to_bytes("x"), 1000)), "x");
  EXPECT_EQ(mw::to_string(server->call("diag/echo", mw::to_bytes("self"), 1000)), "self");
  EXPECT_EQ(h.handled_count(), 2u);
  EXPECT_EQ(
    mw_error_of([&] {client->call("diag/nothing", mw::to_bytes("x"), 100);}), MwErrc::ServiceNotFound);
  EXPECT_EQ(
    mw_error_of(
      [&] {
        client->register_service({"diag/echo", 1, 1}, [](std::span<const std::byte>) {return mw::Bytes{};});
      }),
    MwErrc::DuplicateService);
  EXPECT_EQ(
    mw_error_of(
      [&] {
        server->register_service({"diag/echo", 1, 1}, [](std::span<const std::byte>) {return mw::Bytes{};});
      }),
    MwErrc::DuplicateService);
}

TEST(Domain, ServiceTimeoutDiscardsLateResponse)
{
  Domain d;
  auto server = d.create_participant("server", Transport::in_process());
  auto client = d.create_participant("client", Transport::in_process());
  std::atomic<int> calls{0};
  server->register_service(
    {"slow/echo", 1, 1}, [&](std::span<const std::byte> r) {
      if (calls++ == 0) {
        std::this_thread::sleep_for(std::chrono::milliseconds(200));
      }
      return mw::Bytes(r.begin(), r.end());
    });
  d.spin_some();
  EXPECT_EQ(mw_error_of([&] {client->call("slow/echo", mw::to_bytes("first"), 50);}), MwErrc::Timeout);
  EXPECT_EQ(mw::to_string(client->call("slow/echo", mw::to_bytes("second"), 2000)), "second");
  EXPECT_EQ(client->late_responses(), 1u);
}

TEST(Domain, ServiceFaultPropagatesCode)
{
  auto clock = std::make_shared<mw::ManualClock>();
  DomainOptions o;
  o.clock = clock;
  Domain d(o);
  auto server = d.create_participant("server", Transport::loopback(7500));
  auto client = d.create_participant("client", Transport::loopback(7500));
  server->register_service(
    {"cfg/set", 1, 1}, [](std::span<const std::byte>) -> mw::Bytes {throw mw::ServiceFault(7, "bad key");});
  server->register_service(
    {"cfg/crash", 1, 1}, [](std::span<const std::byte>) -> mw::Bytes {throw std::runtime_error("boom");});
  d.spin_some();
  try {
    client->call("cfg/set", mw::to_bytes("k"), 1000);
    FAIL() << "expected RemoteServiceError";
  } catch (const mw::RemoteServiceError & e) {
    EXPECT_EQ(e.code(), MwErrc::RemoteError);
    EXPECT_EQ(e.remote_code(), 7u);
    EXPECT_NE(std::string(e.what()).find("bad key"), std::string::npos);
  }
  try {
    client->call("cfg/crash", mw::to_bytes("k"), 1000);
    FAIL() << "expected RemoteServiceError";
  } catch (const mw::RemoteServiceError & e) {
    EXPECT_EQ(e.remote_code(), 1u);
  }
}

TEST(Domain, ReliableDeliveryOverLossyLoopback)
{
  auto clock = std::make_shared<mw::ManualClock>();
  DomainOptions o;
  o.clock = clock;
  o.loopback_drop_probability = 0.3;
  o.seed = 42;
  Domain d(o);
  auto tx = d.create_participant("tx", Transport::loopback(7600));
  auto rx = d.create_participant("rx", Transport::loopback(7600));
  auto rel = topic("lossy/rel", qos(mw::Reliability::Reliable, mw::History::keep_all()));
  auto be = topic("lossy/be", qos(mw::Reliability::BestEffort, mw::History::keep_all()));
  auto rel_pub = tx->create_publisher(rel);
  auto be_pub = tx->create_publisher(be);
  auto rel_sub = rx->create_subscriber(rel);
  auto be_sub = rx->create_subscriber(be);
  for (int i = 0; i < 50 && (rel_pub.matched_count() == 0 || rel_sub.matched_count() == 0 ||
    be_pub.matched_count() == 0 || be_sub.matched_count() == 0); ++i)
  {
    clock->advance(o.heartbeat_period_ns);
    d.spin_some();
  }
  ASSERT_EQ(rel_sub.matched_count(), 1u);
  ASSERT_EQ(be_sub.matched_count(), 1u);

  for (std::uint64_t i = 0; i < 1000; ++i) {
    rel_pub.publish(as_span(i));
    be_pub.publish(as_span(i));
    if (i % 50 == 0) {
      d.spin_some();
    }
  }
  std::vector<mw::Sample> rel_got;
  std::vector<mw::Sample> be_got;
  for (int round = 0; round < 500 && rel_got.size() < 1000; ++round) {
    clock->advance(o.heartbeat_period_ns);
    d.spin_some();
    for (auto & s : rel_sub.take(2000)) {
      rel_got.push_back(std::move(s));
    }
  }
  for (auto & s : be_sub.take(2000)) {
    be_got.push_back(std::move(s));
  }
  ASSERT_EQ(rel_got.size(), 1000u);
  for (std::uint64_t i = 0; i < 1000; ++i) {
    EXPECT_EQ(rel_got[i].seq, i);
    EXPECT_EQ(read_u64(rel_got[i]), i);
  }
  // Acknowledgements eventually release the whole resend buffer.
  for (int round = 0; round < 50 && rel_pub.retained_count() > 0; ++round) {
    clock->advance(o.heartbeat_period_ns);
    d.spin_some();
  }
  EXPECT_EQ(rel_pub.retained_count(), 0u);
  EXPECT_TRUE(rel_sub.take(10).empty());

  EXPECT_LT(be_got.size(), 1000u);
  EXPECT_GT(be_got.size(), 500u);
  for (std::size_t i = 1; i < be_got.size(); ++i) {
    EXPECT_LT(be_got[i - 1].seq, be_got[i].seq);
  }
  EXPECT_GT(d.link_stats(7600).frames_dropped, 0u);
}

TEST(Domain, DeadlineMissesAreCounted)
{
  auto clock = std::make_shared<mw::ManualClock>();
  DomainOptions o;
  o.clock = clock;
  Domain d(o);
  auto p = d.create_participant("p", Transport::in_process());
  auto q = qos(mw::Reliability::BestEffort);
  q.deadline_ms = 50;
  auto pub = p->create_publisher(topic("dl/x", q));
  auto sub = p->create_subscriber(topic("dl/x", q));
  for (int i = 0; i < 4; ++i) {
    clock->advance(20'000'000);
    pub.publish(mw::to_bytes("k"));
    d.spin_some();
  }
  EXPECT_EQ(sub.deadline_missed_count(), 0u);
  clock->advance(60'000'000);
  d.spin_some();
  EXPECT_EQ(sub.deadline_missed_count(), 1u);
}

TEST(Domain, ShutdownClosesEndpoints)
{
  Domain d;
  auto p = d.create_participant("p", Transport::in_process());
  auto pub = p->create_publisher(topic("x/y", qos(mw::Reliability::BestEffort)));
  p->shutdown();
  EXPECT_TRUE(p->is_closed());
  EXPECT_EQ(mw_error_of([&] {pub.publish(mw::to_bytes("a"));}), MwErrc::ParticipantClosed);
  EXPECT_EQ(
    mw_error_of([&] {p->create_subscriber(topic("x/y", qos(mw::Reliability::BestEffort)));}),
    MwErrc::ParticipantClosed);
}
