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

#ifndef DFP__MIDDLEWARE__WIRE_HPP_
#define DFP__MIDDLEWARE__WIRE_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dfp/common/error.hpp"
#include "dfp/middleware/qos.hpp"

namespace dfp::middleware
{

using Bytes = std::vector<std::byte>;

Bytes to_bytes(std::string_view s);
std::string to_string(std::span<const std::byte> bytes);

/// DFP1 frame layout, all integers big-endian:
///
///   offset size field
///   0      4    magic "DFP1" (44 46 50 31)
///   4      1    version (0x01)
///   5      1    msg_type
///   6      1    flags (bit0 reliable, bit1 transient_local, rest 0)
///   7      1    reserved (0x00)
///   8      8    participant_id
///   16     4    entity_id
///   20     8    seq
///   28     4    payload_len
///   32     n    payload
inline constexpr std::size_t kHeaderSize = 32;
inline constexpr std::uint8_t kWireVersion = 0x01;
inline constexpr std::uint64_t kMaxWirePayload = 0xFFFFFFFFULL;

inline constexpr std::uint8_t kFlagReliable = 0x01;
inline constexpr std::uint8_t kFlagTransientLocal = 0x02;
inline constexpr std::uint8_t kFlagsReservedMask = 0xFC;

enum class MsgType : std::uint8_t
{
  Data = 0,
  Announce = 1,
  Subscribe = 2,
  Request = 3,
  Response = 4,
  Heartbeat = 5,
  Nack = 6,
};

std::string_view to_string(MsgType t);

enum class WireErrc
{
  Truncated,
  BadMagic,
  BadVersion,
  BadMsgType,
  ReservedBits,
  LengthMismatch,
  PayloadTooLarge,
  BadControlPayload,
};

using FramingError = Error<WireErrc>;

struct Frame
{
  MsgType type = MsgType::Data;
  std::uint8_t flags = 0;
  std::uint64_t participant_id = 0;
  std::uint32_t entity_id = 0;
  std::uint64_t seq = 0;
  Bytes payload;

  bool operator==(const Frame &) const = default;
};

/// Throws FramingError{PayloadTooLarge} above kMaxWirePayload.
void check_wire_payload_size(std::uint64_t size);
Bytes encode_frame(const Frame & frame);
/// Strict: the buffer must hold exactly one frame.
Frame decode_frame(std::span<const std::byte> bytes);

// Control payloads carried inside ANNOUNCE/SUBSCRIBE, HEARTBEAT, NACK and
// RESPONSE frames.

enum class EntityKind : std::uint8_t
{
  Participant = 0,
  Publisher = 1,
  Subscriber = 2,
  Service = 3,
};

std::string_view to_string(EntityKind k);

/// Announcement body. For participants `name` is the participant name, for
/// endpoints the topic, for services the service name. Services carry the
/// request type in `type_hash` and the response type in `response_type_hash`.
struct Announcement
{
  EntityKind kind = EntityKind::Participant;
  std::string name;
  std::uint64_t type_hash = 0;
  std::uint64_t response_type_hash = 0;
  QoSProfile qos;

  bool operator==(const Announcement &) const = default;
};

Bytes encode_announcement(const Announcement & a);
Announcement decode_announcement(std::span<const std::byte> bytes);

/// Writer heartbeat, addressed to one reader. The frame's seq is the writer's
/// next sequence number; [first_seq, seq) is what the writer still holds for
/// this reader.
struct WriterHeartbeat
{
  std::uint32_t reader_entity_id = 0;
  std::uint64_t first_seq = 0;

  bool operator==(const WriterHeartbeat &) const = default;
};

Bytes encode_writer_heartbeat(const WriterHeartbeat & hb);
WriterHeartbeat decode_writer_heartbeat(std::span<const std::byte> bytes);

/// Reader acknowledgement: everything below ack_base arrived; `missing`
/// lists the gaps at or above it.
struct AckNack
{
  std::uint32_t writer_entity_id = 0;
  std::uint64_t ack_base = 0;
  std::vector<std::uint64_t> missing;

  bool operator==(const AckNack &) const = default;
};

Bytes encode_acknack(const AckNack & an);
AckNack decode_acknack(std::span<const std::byte> bytes);

/// status 0 carries the handler response; otherwise `body` is the error text.
struct ResponseBody
{
  std::uint32_t status = 0;
  Bytes body;

  bool operator==(const ResponseBody &) const = default;
};

Bytes encode_response(const ResponseBody & r);
ResponseBody decode_response(std::span<const std::byte> bytes);

}  // namespace dfp::middleware

#endif  // DFP__MIDDLEWARE__WIRE_HPP_
