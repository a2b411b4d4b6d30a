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

#include "dfp/hal/registry.hpp"

#include <string>
#include <utility>

#include "generator.hpp"

namespace dfp::hal
{

struct DeviceRegistry::Device
{
  Device(DeviceDescriptor d)
  : desc(std::move(d)), generator(desc.seed, desc.device_id) {}

  DeviceDescriptor desc;
  detail::FrameGenerator generator;
  std::uint64_t next_seq = 0;
  RadarScene scene;
};

DeviceRegistry::DeviceRegistry() = default;
DeviceRegistry::~DeviceRegistry() = default;
DeviceRegistry::DeviceRegistry(DeviceRegistry &&) noexcept = default;
DeviceRegistry & DeviceRegistry::operator=(DeviceRegistry &&) noexcept = default;

DeviceHandle DeviceRegistry::register_device(DeviceDescriptor desc)
{
  if (desc.device_id.empty()) {
    throw HalError(HalErrc::InvalidDescriptor, "device_id must not be empty");
  }
  // Written so that NaN fails too.
  if (!(desc.rate_hz > 0.0 && desc.rate_hz <= kMaxRateHz)) {
    throw HalError(
      HalErrc::InvalidRate,
      "rate_hz out of range (0, 1000] for device " + desc.device_id);
  }
  if (find(desc.device_id)) {
    throw HalError(HalErrc::DuplicateDeviceId, "duplicate device id: " + desc.device_id);
  }
  devices_.push_back(std::make_unique<Device>(std::move(desc)));
  return DeviceHandle(devices_.size() - 1);
}

DeviceRegistry::Device & DeviceRegistry::device(DeviceHandle handle) const
{
  if (handle.index() >= devices_.size()) {
    throw HalError(HalErrc::UnknownDevice, "unknown device handle " + std::to_string(handle.index()));
  }
  return *devices_[handle.index()];
}

std::vector<SensorFrame> DeviceRegistry::tick(DeviceHandle handle, std::size_t n)
{
  Device & dev = device(handle);
  std::vector<SensorFrame> frames;
  frames.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    SensorFrame f;
    f.device_id = dev.desc.device_id;
    f.kind = dev.desc.kind;
    f.seq = dev.next_seq++;
    f.timestamp_ns = frame_timestamp_ns(f.seq, dev.desc.rate_hz);
    if (dev.scene) {
      f.raw = detail::radar_raw(dev.scene(f.timestamp_ns));
    } else {
      f.raw = dev.generator.raw(f.kind, f.seq);
    }
    frames.push_back(std::move(f));
  }
  return frames;
}

void DeviceRegistry::attach_radar_scene(DeviceHandle handle, RadarScene scene)
{
  Device & dev = device(handle);
  if (dev.desc.kind != DeviceKind::Radar) {
    throw HalError(HalErrc::UnsupportedKind, "scene attach requires a radar: " + dev.desc.device_id);
  }
  dev.scene = std::move(scene);
}

std::optional<DeviceHandle> DeviceRegistry::find(std::string_view device_id) const
{
  for (std::size_t i = 0; i < devices_.size(); ++i) {
    if (devices_[i]->desc.device_id == device_id) {
      return DeviceHandle(i);
    }
  }
  return std::nullopt;
}

const DeviceDescriptor & DeviceRegistry::descriptor(DeviceHandle handle) const
{
  return device(handle).desc;
}

std::uint64_t DeviceRegistry::next_seq(DeviceHandle handle) const
{
  return device(handle).next_seq;
}

std::int64_t DeviceRegistry::next_timestamp_ns(DeviceHandle handle) const
{
  const Device & dev = device(handle);
  return frame_timestamp_ns(dev.next_seq, dev.desc.rate_hz);
}

std::vector<DeviceHandle> DeviceRegistry::handles() const
{
  std::vector<DeviceHandle> out;
  out.reserve(devices_.size());
  for (std::size_t i = 0; i < devices_.size(); ++i) {
    out.emplace_back(i);
  }
  return out;
}

std::size_t DeviceRegistry::size() const
{
  return devices_.size();
}

}  // namespace dfp::hal
