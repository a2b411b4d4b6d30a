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

#ifndef DFP__HAL__DEVICE_HPP_
#define DFP__HAL__DEVICE_HPP_

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "dfp/common/attributes.hpp"
#include "dfp/common/error.hpp"

namespace dfp::hal
{

enum class DeviceKind : std::uint8_t
{
  Camera,
  Radar,
  Lidar,
  Gps,
  Imu,
  HdMap,
  V2x,
};

inline constexpr std::array<DeviceKind, 7> kAllDeviceKinds = {
  DeviceKind::Camera, DeviceKind::Radar, DeviceKind::Lidar, DeviceKind::Gps,
  DeviceKind::Imu, DeviceKind::HdMap, DeviceKind::V2x,
};

/// Canonical names: "Camera", "Radar", "Lidar", "GPS", "IMU", "HDMap", "V2X".
std::string_view to_string(DeviceKind kind);
std::optional<DeviceKind> parse_device_kind(std::string_view name);

enum class HalErrc
{
  DuplicateDeviceId,
  InvalidRate,
  InvalidDescriptor,
  UnknownDevice,
  UnsupportedKind,
  MalformedFrame,
};

using HalError = Error<HalErrc>;

inline constexpr double kMaxRateHz = 1000.0;

struct DeviceDescriptor
{
  std::string device_id;
  DeviceKind kind = DeviceKind::Camera;
  double rate_hz = 0.0;
  std::uint64_t seed = 0;
  /// Compute-unit affinity hint ("ai-unit", "compute-unit", "control-unit").
  std::string binding_label;
};

/// Vendor-format frame as produced by a device. `raw` keys depend on kind.
struct SensorFrame
{
  std::string device_id;
  DeviceKind kind = DeviceKind::Camera;
  std::uint64_t seq = 0;
  std::int64_t timestamp_ns = 0;
  Attributes raw;

  bool operator==(const SensorFrame &) const = default;
};

/// Device-independent frame; `normalized` follows the per-kind SI schema.
struct AbstractFrame
{
  std::string source_id;
  DeviceKind kind = DeviceKind::Camera;
  std::uint64_t seq = 0;
  std::int64_t timestamp_ns = 0;
  Attributes normalized;

  bool operator==(const AbstractFrame &) const = default;
};

/// round(seq * 1e9 / rate_hz)
std::int64_t frame_timestamp_ns(std::uint64_t seq, double rate_hz);

// Frames travel through the pipeline as flat attribute maps. Frame metadata
// uses reserved "@"-prefixed keys next to the payload attributes.
Attributes to_attributes(const SensorFrame & frame);
Attributes to_attributes(const AbstractFrame & frame);
SensorFrame sensor_frame_from_attributes(const Attributes & attrs);
AbstractFrame abstract_frame_from_attributes(const Attributes & attrs);

}  // namespace dfp::hal

#endif  // DFP__HAL__DEVICE_HPP_
