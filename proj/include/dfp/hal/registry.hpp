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

#ifndef DFP__HAL__REGISTRY_HPP_
#define DFP__HAL__REGISTRY_HPP_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string_view>
#include <vector>

#include "dfp/hal/device.hpp"

namespace dfp::hal
{

class DeviceHandle
{
public:
  constexpr DeviceHandle() = default;
  constexpr explicit DeviceHandle(std::size_t index) : index_(index) {}
  constexpr std::size_t index() const {return index_;}
  constexpr bool operator==(const DeviceHandle &) const = default;

private:
  std::size_t index_ = static_cast<std::size_t>(-1);
};

/// Ground truth seen by a simulated radar at a given instant.
struct RadarTarget
{
  double range_m = 0.0;
  double range_rate_mps = 0.0;
  double azimuth_rad = 0.0;
};

/// Supplies the radar's view of the world; nullopt means no target.
using RadarScene = std::function<std::optional<RadarTarget>(std::int64_t timestamp_ns)>;

/// Registry of simulated devices.
///
/// Registration happens from a single context before ticking starts. After
/// that, distinct handles may be ticked concurrently; one handle must not be
/// ticked from two contexts at once.
///
/// Frame content is a pure function of (seed, device_id, kind, seq), except
/// for radars with an attached scene, whose target comes from the scene.
class DeviceRegistry
{
public:
  DeviceRegistry();
  ~DeviceRegistry();
  DeviceRegistry(DeviceRegistry &&) noexcept;
  DeviceRegistry & operator=(DeviceRegistry &&) noexcept;

  /// Throws HalError{DuplicateDeviceId | InvalidRate | InvalidDescriptor}.
  DeviceHandle register_device(DeviceDescriptor desc);

  /// Next `n` frames for the device. Throws HalError{UnknownDevice}.
  std::vector<SensorFrame> tick(DeviceHandle handle, std::size_t n);

  /// Throws HalError{UnknownDevice}, or HalError{UnsupportedKind} when the
  /// device is not a radar.
  void attach_radar_scene(DeviceHandle handle, RadarScene scene);

  std::optional<DeviceHandle> find(std::string_view device_id) const;
  const DeviceDescriptor & descriptor(DeviceHandle handle) const;
  std::uint64_t next_seq(DeviceHandle handle) const;
  std::int64_t next_timestamp_ns(DeviceHandle handle) const;
  std::vector<DeviceHandle> handles() const;
  std::size_t size() const;

private:
  struct Device;
  Device & device(DeviceHandle handle) const;

  std::vector<std::unique_ptr<Device>> devices_;
};

}  // namespace dfp::hal

#endif  // DFP__HAL__REGISTRY_HPP_
