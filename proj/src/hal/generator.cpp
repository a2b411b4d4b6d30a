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

#include "generator.hpp"

#include <array>
#include <numbers>
#include <string>

#include "dfp/common/hash.hpp"

namespace dfp::hal::detail
{

FrameGenerator::FrameGenerator(std::uint64_t seed, std::string_view device_id)
: key_(hash_combine(mix64(seed), fnv1a64(device_id)))
{
}

std::uint64_t FrameGenerator::bits(std::uint64_t seq, std::string_view field) const
{
  return hash_combine(hash_combine(key_, seq), fnv1a64(field));
}

double FrameGenerator::unit(std::uint64_t seq, std::string_view field) const
{
  return static_cast<double>(bits(seq, field) >> 11) * 0x1.0p-53;
}

double FrameGenerator::uniform(std::uint64_t seq, std::string_view field, double lo, double hi) const
{
  return lo + (hi - lo) * unit(seq, field);
}

std::int64_t FrameGenerator::integer(
  std::uint64_t seq, std::string_view field, std::int64_t lo, std::int64_t hi) const
{
  const auto span = static_cast<std::uint64_t>(hi - lo + 1);
  return lo + static_cast<std::int64_t>(bits(seq, field) % span);
}

Attributes FrameGenerator::raw(DeviceKind kind, std::uint64_t seq) const
{
  Attributes a;
  switch (kind) {
    case DeviceKind::Camera:
      a["width"] = integer(seq, "width", 0, 1) ? std::int64_t{1920} : std::int64_t{1280};
      a["height"] = std::get<std::int64_t>(a["width"]) == 1920 ? std::int64_t{1080} : std::int64_t{720};
      a["checksum"] = static_cast<std::int64_t>(bits(seq, "checksum") >> 33);
      a["exposure_us"] = integer(seq, "exposure_us", 100, 20000);
      break;
    case DeviceKind::Radar: {
        std::optional<RadarTarget> target;
        if (unit(seq, "target_present") < 0.8) {
          target = RadarTarget{
            uniform(seq, "range", 5.0, 200.0),
            uniform(seq, "range_rate", -8.0, 8.0),
            uniform(seq, "azimuth", -0.17, 0.17)};
        }
        a = radar_raw(target);
        break;
      }
    case DeviceKind::Lidar:
      a["point_count"] = integer(seq, "point_count", 50000, 120000);
      a["max_range_cm"] = uniform(seq, "max_range_cm", 5000.0, 20000.0);
      break;
    case DeviceKind::Gps:
      a["lat_deg"] = uniform(seq, "lat_deg", 30.0, 31.0);
      a["lon_deg"] = uniform(seq, "lon_deg", 120.0, 121.0);
      a["alt_m"] = uniform(seq, "alt_m", 0.0, 100.0);
      break;
    case DeviceKind::Imu:
      a["accel_x_g"] = uniform(seq, "accel_x_g", -0.3, 0.3);
      a["accel_y_g"] = uniform(seq, "accel_y_g", -0.2, 0.2);
      a["yaw_rate_dps"] = uniform(seq, "yaw_rate_dps", -5.0, 5.0);
      break;
    case DeviceKind::HdMap: {
        static const std::array<const char *, 3> classes = {"highway", "urban", "rural"};
        static const std::array<double, 4> limits = {60.0, 80.0, 100.0, 120.0};
        a["road_class"] = std::string(classes[static_cast<std::size_t>(integer(seq, "road_class", 0, 2))]);
        a["lane_count"] = integer(seq, "lane_count", 1, 4);
        a["speed_limit_kph"] = limits[static_cast<std::size_t>(integer(seq, "speed_limit", 0, 3))];
        a["tunnel"] = unit(seq, "tunnel") < 0.2;
        break;
      }
    case DeviceKind::V2x: {
        static const std::array<const char *, 3> events = {"weather", "roadworks", "accident"};
        a["event_type"] = std::string(events[static_cast<std::size_t>(integer(seq, "event_type", 0, 2))]);
        a["rain"] = unit(seq, "rain") < 0.3;
        a["visibility_km"] = uniform(seq, "visibility_km", 0.1, 10.0);
        break;
      }
  }
  return a;
}

Attributes radar_raw(const std::optional<RadarTarget> & target)
{
  Attributes a;
  a["target_present"] = target.has_value();
  a["range_km"] = target ? target->range_m / 1000.0 : 0.0;
  a["range_rate_kmh"] = target ? target->range_rate_mps * 3.6 : 0.0;
  a["azimuth_deg"] = target ? target->azimuth_rad * 180.0 / std::numbers::pi : 0.0;
  return a;
}

}  // namespace dfp::hal::detail
