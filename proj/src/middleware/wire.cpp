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

#include "dfp/middleware/wire.hpp"

#include <algorithm>
#include <array>
#include <cstring>

namespace dfp::middleware
{

namespace
{

constexpr std::array<std::byte, 4> kMagic = {
  std::byte{0x44}, std::byte{0x46}, std::byte{0x50}, std::byte{0x31}};

class Writer
{
public:
  explicit Writer(Bytes & out) : out_(out) {}

  template<typename T>
  void be(T v)
  {
    for (int shift = (sizeof(T) - 1) * 8; shift >= 0; shift -= 8) {
      out_.push_back(static_cast<std::byte>((static_cast<std::uint64_t>(v) >> shift) & 0xFF));
    }
  }

  void raw(std::span<const std::byte> b) {out_.insert(out_.end(), b.begin(), b.end());}

private:
  Bytes & out_;
};

class Reader
{
public:
  Reader(std::span<const std::byte> in, WireErrc on_short)
  : in_(in), on_short_(on_short) {}

  template<typename T>
  T be()
  {
    need(sizeof(T));
    std::uint64_t v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) {
      v = (v << 8) | static_cast<std::uint8_t>(in_[pos_ + i]);
    }
    pos_ += sizeof(T);
    return static_cast<T>(v);
  }

  std::span<const std::byte> raw(std::size_t n)
  {
    need(n);
    auto s = in_.subspan(pos_, n);
    pos_ += n;
    return s;
  }

  std::size_t remaining() const {return in_.size() - pos_;}

private:
  void need(std::size_t n) const
  {
    if (in_.size() - pos_ < n) {
      throw FramingError(on_short_, "buffer too short");
    }
  }

  std::span<const std::byte> in_;
  std::size_t pos_ = 0;
  WireErrc on_short_;
};

void expect_consumed(const Reader & r, const char * what)
{
  if (r.remaining() != 0) {
    throw FramingError(WireErrc::BadControlPayload, std::string("trailing bytes in ") + what);
  }
}

}  // namespace

Bytes to_bytes(std::string_view s)
{
  Bytes b(s.size());
  std::memcpy(b.data(), s.data(), s.size());
  return b;
}

std::string to_string(std::span<const std::byte> bytes)
{
  return std::string(reinterpret_cast<const char *>(bytes.data()), bytes.size());
}

std::string_view to_string(MsgType t)
{
  switch (t) {
    case MsgType::Data: return "DATA";
    case MsgType::Announce: return "ANNOUNCE";
    case MsgType::Subscribe: return "SUBSCRIBE";
    case MsgType::Request: return "REQUEST";
    case MsgType::Response: return "RESPONSE";
    case MsgType::Heartbeat: return "HEARTBEAT";
    case MsgType::Nack: return "NACK";
  }
  return "?";
}

std::string_view to_string(EntityKind k)
{
  switch (k) {
    case EntityKind::Participant: return "Participant";
    case EntityKind::Publisher: return "Publisher";
    case EntityKind::Subscriber: return "Subscriber";
    case EntityKind::Service: return "Service";
  }
  return "?";
}

void check_wire_payload_size(std::uint64_t size)
{
  if (size > kMaxWirePayload) {
    throw FramingError(
      WireErrc::PayloadTooLarge,
      "payload of " + std::to_string(size) + " bytes exceeds the 32-bit wire length field");
  }
}

Bytes encode_frame(const Frame & frame)
{
  check_wire_payload_size(frame.payload.size());
  Bytes out;
  out.reserve(kHeaderSize + frame.payload.size());
  Writer w(out);
  w.raw(kMagic);
  w.be<std::uint8_t>(kWireVersion);
  w.be<std::uint8_t>(static_cast<std::uint8_t>(frame.type));
  w.be<std::uint8_t>(frame.flags);
  w.be<std::uint8_t>(0);
  w.be<std::uint64_t>(frame.participant_id);
  w.be<std::uint32_t>(frame.entity_id);
  w.be<std::uint64_t>(frame.seq);
  w.be<std::uint32_t>(static_cast<std::uint32_t>(frame.payload.size()));
  w.raw(frame.payload);
  return out;
}

Frame decode_frame(std::span<const std::byte> bytes)
{
  Reader r(bytes, WireErrc::Truncated);
  auto magic = r.raw(4);
  if (!std::equal(magic.begin(), magic.end(), kMagic.begin())) {
    throw FramingError(WireErrc::BadMagic, "bad magic");
  }
  if (r.be<std::uint8_t>() != kWireVersion) {
    throw FramingError(WireErrc::BadVersion, "unsupported version");
  }
  const auto type = r.be<std::uint8_t>();
  if (type > static_cast<std::uint8_t>(MsgType::Nack)) {
    throw FramingError(WireErrc::BadMsgType, "unknown msg_type " + std::to_string(type));
  }
  Frame f;
  f.type = static_cast<MsgType>(type);
  f.flags = r.be<std::uint8_t>();
  if ((f.flags & kFlagsReservedMask) != 0) {
    throw FramingError(WireErrc::ReservedBits, "reserved flag bits set");
  }
  if (r.be<std::uint8_t>() != 0) {
    throw FramingError(WireErrc::ReservedBits, "reserved byte not zero");
  }
  f.participant_id = r.be<std::uint64_t>();
  f.entity_id = r.be<std::uint32_t>();
  f.seq = r.be<std::uint64_t>();
  const auto len = r.be<std::uint32_t>();
  if (r.remaining() != len) {
    throw FramingError(
      WireErrc::LengthMismatch,
      "payload_len " + std::to_string(len) + " but " + std::to_string(r.remaining()) + " bytes follow");
  }
  auto payload = r.raw(len);
  f.payload.assign(payload.begin(), payload.end());
  return f;
}

Bytes encode_announcement(const Announcement & a)
{
  if (a.name.size() > 0xFFFF) {
    throw FramingError(WireErrc::BadControlPayload, "announced name too long");
  }
  Bytes out;
  Writer w(out);
  w.be<std::uint8_t>(static_cast<std::uint8_t>(a.kind));
  w.be<std::uint16_t>(static_cast<std::uint16_t>(a.name.size()));
  w.raw(to_bytes(a.name));
  w.be<std::uint64_t>(a.type_hash);
  w.be<std::uint64_t>(a.response_type_hash);
  w.be<std::uint8_t>(static_cast<std::uint8_t>(a.qos.reliability));
  w.be<std::uint8_t>(static_cast<std::uint8_t>(a.qos.history.kind));
  w.be<std::uint32_t>(a.qos.history.depth);
  w.be<std::uint8_t>(static_cast<std::uint8_t>(a.qos.durability));
  w.be<std::uint32_t>(a.qos.deadline_ms.value_or(0));
  return out;
}

Announcement decode_announcement(std::span<const std::byte> bytes)
{
  Reader r(bytes, WireErrc::BadControlPayload);
  Announcement a;
  const auto kind = r.be<std::uint8_t>();
  if (kind > static_cast<std::uint8_t>(EntityKind::Service)) {
    throw FramingError(WireErrc::BadControlPayload, "unknown entity kind");
  }
  a.kind = static_cast<EntityKind>(kind);
  const auto name_len = r.be<std::uint16_t>();
  a.name = to_string(r.raw(name_len));
  a.type_hash = r.be<std::uint64_t>();
  a.response_type_hash = r.be<std::uint64_t>();
  const auto rel = r.be<std::uint8_t>();
  const auto hist = r.be<std::uint8_t>();
  const auto depth = r.be<std::uint32_t>();
  const auto dur = r.be<std::uint8_t>();
  const auto deadline = r.be<std::uint32_t>();
  if (rel > 1 || hist > 1 || dur > 1) {
    throw FramingError(WireErrc::BadControlPayload, "bad QoS encoding");
  }
  a.qos.reliability = static_cast<Reliability>(rel);
  a.qos.history = {static_cast<HistoryKind>(hist), depth};
  a.qos.durability = static_cast<Durability>(dur);
  if (deadline != 0) {
    a.qos.deadline_ms = deadline;
  }
  expect_consumed(r, "announcement");
  return a;
}

Bytes encode_writer_heartbeat(const WriterHeartbeat & hb)
{
  Bytes out;
  Writer w(out);
  w.be<std::uint32_t>(hb.reader_entity_id);
  w.be<std::uint64_t>(hb.first_seq);
  return out;
}

WriterHeartbeat decode_writer_heartbeat(std::span<const std::byte> bytes)
{
  Reader r(bytes, WireErrc::BadControlPayload);
  WriterHeartbeat hb;
  hb.reader_entity_id = r.be<std::uint32_t>();
  hb.first_seq = r.be<std::uint64_t>();
  expect_consumed(r, "heartbeat");
  return hb;
}

Bytes encode_acknack(const AckNack & an)
{
  Bytes out;
  Writer w(out);
  w.be<std::uint32_t>(an.writer_entity_id);
  w.be<std::uint64_t>(an.ack_base);
  w.be<std::uint32_t>(static_cast<std::uint32_t>(an.missing.size()));
  for (auto s : an.missing) {
    w.be<std::uint64_t>(s);
  }
  return out;
}

AckNack decode_acknack(std::span<const std::byte> bytes)
{
  Reader r(bytes, WireErrc::BadControlPayload);
  AckNack an;
  an.writer_entity_id = r.be<std::uint32_t>();
  an.ack_base = r.be<std::uint64_t>();
  const auto n = r.be<std::uint32_t>();
  if (r.remaining() != static_cast<std::size_t>(n) * 8) {
    throw FramingError(WireErrc::BadControlPayload, "nack count does not match payload");
  }
  an.missing.reserve(n);
  for (std::uint32_t i = 0; i < n; ++i) {
    an.missing.push_back(r.be<std::uint64_t>());
  }
  return an;
}

Bytes encode_response(const ResponseBody & resp)
{
  Bytes out;
  Writer w(out);
  w.be<std::uint32_t>(resp.status);
  w.raw(resp.body);
  return out;
}

ResponseBody decode_response(std::span<const std::byte> bytes)
{
  Reader r(bytes, WireErrc::BadControlPayload);
  ResponseBody resp;
  resp.status = r.be<std::uint32_t>();
  auto rest = r.raw(r.remaining());
  resp.body.assign(rest.begin(), rest.end());
  return resp;
}

}  // namespace dfp::middleware
