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

#include "dfp/hal/device.hpp"

#include <cmath>
#include <string>

namespace dfp::hal
{

namespace
{

constexpr const char * kDeviceKey = "@device_id";
constexpr const char * kSourceKey = "@source_id";
constexpr const char * kKindKey = "@kind";
constexpr const char * kSeqKey = "@seq";
constexpr const char * kStampKey = "@timestamp_ns";

void put_meta(Attributes & a, DeviceKind kind, std::uint64_t seq, std::int64_t stamp)
{
  a[kKindKey] = std::string(to_string(kind));
  a[kSeqKey] = static_cast<std::int64_t>(seq);
  a[kStampKey] = stamp;
}

template<typename T>
const T & require(const Attributes & a, const char * key)
{
  auto it = a.find(key);
  if (it == a.end() || !std::holds_alternative<T>(it->second)) {
    throw HalError(HalErrc::MalformedFrame, std::string("frame attribute missing or mistyped: ") + key);
  }
  return std::get<T>(it->second);
}

DeviceKind require_kind(const Attributes & a)
{
  const auto & name = require<std::string>(a, kKindKey);
  auto kind = parse_device_kind(name);
  if (!kind) {
    throw HalError(HalErrc::UnsupportedKind, "unsupported device kind: " + name);
  }
  return *kind;
}

Attributes strip_meta(const Attributes & a)
{
  Attributes out;
  for (const auto & [k, v] : a) {
    if (k.empty() || k.front() != '@') {
      out.emplace(k, v);
    }
  }
  return out;
}

}  // namespace

std::string_view to_string(DeviceKind kind)
{
  switch (kind) {
    case DeviceKind::Camera: return "Camera";
    case DeviceKind::Radar: return "Radar";
    case DeviceKind::Lidar: return "Lidar";
    case DeviceKind::Gps: return "GPS";
    case DeviceKind::Imu: return "IMU";
    case DeviceKind::HdMap: return "HDMap";
    case DeviceKind::V2x: return "V2X";
  }
  return "?";
}

std::optional<DeviceKind> parse_device_kind(std::string_view name)
{
  for (auto k : kAllDeviceKinds) {
    if (to_string(k) == name) {
      return k;
    }
  }
  return std::nullopt;
}

std::int64_t frame_timestamp_ns(std::uint64_t seq, double rate_hz)
{
  return std::llround(static_cast<double>(seq) * 1e9 / rate_hz);
}

Attributes to_attributes(const SensorFrame & frame)
{
  Attributes a = frame.raw;
  a[kDeviceKey] = frame.device_id;
  put_meta(a, frame.kind, frame.seq, frame.timestamp_ns);
  return a;
}

Attributes to_attributes(const AbstractFrame & frame)
{
  Attributes a = frame.normalized;
  a[kSourceKey] = frame.source_id;
  put_meta(a, frame.kind, frame.seq, frame.timestamp_ns);
  return a;
}

SensorFrame sensor_frame_from_attributes(const Attributes & attrs)
{
  SensorFrame f;
  f.device_id = require<std::string>(attrs, kDeviceKey);
  f.kind = require_kind(attrs);
  f.seq = static_cast<std::uint64_t>(require<std::int64_t>(attrs, kSeqKey));
  f.timestamp_ns = require<std::int64_t>(attrs, kStampKey);
  f.raw = strip_meta(attrs);
  return f;
}

AbstractFrame abstract_frame_from_attributes(const Attributes & attrs)
{
  AbstractFrame f;
  f.source_id = require<std::string>(attrs, kSourceKey);
  f.kind = require_kind(attrs);
  f.seq = static_cast<std::uint64_t>(require<std::int64_t>(attrs, kSeqKey));
  f.timestamp_ns = require<std::int64_t>(attrs, kStampKey);
  f.normalized = strip_meta(attrs);
  return f;
}

}  // namespace dfp::hal
