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

#include "dfp/hal/normalize.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace dfp::hal
{

namespace
{

constexpr double kDegToRad = std::numbers::pi / 180.0;
constexpr double kKphToMps = 1.0 / 3.6;
constexpr double kStandardGravity = 9.80665;

const std::vector<SchemaField> kCamera = {
  {"width_px", FieldType::Int, "width", 1.0},
  {"height_px", FieldType::Int, "height", 1.0},
  {"checksum", FieldType::Int, "checksum", 1.0},
  {"exposure_s", FieldType::Double, "exposure_us", 1e-6},
};
const std::vector<SchemaField> kRadar = {
  {"target_present", FieldType::Bool, "target_present", 1.0},
  {"range_m", FieldType::Double, "range_km", 1000.0},
  {"range_rate_mps", FieldType::Double, "range_rate_kmh", kKphToMps},
  {"azimuth_rad", FieldType::Double, "azimuth_deg", kDegToRad},
};
const std::vector<SchemaField> kLidar = {
  {"point_count", FieldType::Int, "point_count", 1.0},
  {"max_range_m", FieldType::Double, "max_range_cm", 0.01},
};
const std::vector<SchemaField> kGps = {
  {"lat_rad", FieldType::Double, "lat_deg", kDegToRad},
  {"lon_rad", FieldType::Double, "lon_deg", kDegToRad},
  {"alt_m", FieldType::Double, "alt_m", 1.0},
};
const std::vector<SchemaField> kImu = {
  {"accel_x_mps2", FieldType::Double, "accel_x_g", kStandardGravity},
  {"accel_y_mps2", FieldType::Double, "accel_y_g", kStandardGravity},
  {"yaw_rate_radps", FieldType::Double, "yaw_rate_dps", kDegToRad},
};
const std::vector<SchemaField> kHdMap = {
  {"road_class", FieldType::String, "road_class", 1.0},
  {"lane_count", FieldType::Int, "lane_count", 1.0},
  {"speed_limit_mps", FieldType::Double, "speed_limit_kph", kKphToMps},
  {"tunnel", FieldType::Bool, "tunnel", 1.0},
};
const std::vector<SchemaField> kV2x = {
  {"event_type", FieldType::String, "event_type", 1.0},
  {"rain", FieldType::Bool, "rain", 1.0},
  {"visibility_m", FieldType::Double, "visibility_km", 1000.0},
};

[[noreturn]] void malformed(const AbstractFrame & out, const std::string & key)
{
  throw HalError(
    HalErrc::MalformedFrame,
    std::string(to_string(out.kind)) + " frame from " + out.source_id +
    ": missing or mistyped field " + key);
}

bool has_type(const AttrValue & v, FieldType t)
{
  switch (t) {
    case FieldType::Bool: return std::holds_alternative<bool>(v);
    case FieldType::Int: return std::holds_alternative<std::int64_t>(v);
    case FieldType::Double: return std::holds_alternative<double>(v);
    case FieldType::String: return std::holds_alternative<std::string>(v);
  }
  return false;
}

AttrValue convert(const SchemaField & field, const AttrValue & raw, bool already_normalized)
{
  switch (field.type) {
    case FieldType::Bool:
      if (const auto * b = std::get_if<bool>(&raw)) {
        return *b;
      }
      break;
    case FieldType::String:
      if (const auto * s = std::get_if<std::string>(&raw)) {
        return *s;
      }
      break;
    case FieldType::Int:
      if (const auto * i = std::get_if<std::int64_t>(&raw)) {
        return *i;
      }
      break;
    case FieldType::Double:
      if (auto n = as_number(raw)) {
        return already_normalized ? *n : *n * field.factor;
      }
      break;
  }
  throw HalError(HalErrc::MalformedFrame, "mistyped field " + field.key);
}

}  // namespace

const std::vector<SchemaField> & normalized_schema(DeviceKind kind)
{
  switch (kind) {
    case DeviceKind::Camera: return kCamera;
    case DeviceKind::Radar: return kRadar;
    case DeviceKind::Lidar: return kLidar;
    case DeviceKind::Gps: return kGps;
    case DeviceKind::Imu: return kImu;
    case DeviceKind::HdMap: return kHdMap;
    case DeviceKind::V2x: return kV2x;
  }
  throw HalError(HalErrc::UnsupportedKind, "no schema for device kind");
}

AbstractFrame normalize(const SensorFrame & frame)
{
  AbstractFrame out;
  out.source_id = frame.device_id;
  out.kind = frame.kind;
  out.seq = frame.seq;
  out.timestamp_ns = frame.timestamp_ns;

  for (const auto & field : normalized_schema(frame.kind)) {
    bool already = true;
    auto it = frame.raw.find(field.key);
    if (it == frame.raw.end()) {
      already = false;
      it = frame.raw.find(field.raw_key);
    }
    if (it == frame.raw.end()) {
      malformed(out, field.raw_key);
    }
    // Integer and string fields have no unit; the raw value must already
    // carry the schema type.
    const bool numeric = field.type == FieldType::Double;
    if ((!numeric && !has_type(it->second, field.type)) || (numeric && !as_number(it->second))) {
      malformed(out, it->first);
    }
    out.normalized.emplace(field.key, convert(field, it->second, already));
  }
  return out;
}

bool conforms_to_schema(const AbstractFrame & frame)
{
  const auto & schema = normalized_schema(frame.kind);
  if (frame.normalized.size() != schema.size()) {
    return false;
  }
  for (const auto & field : schema) {
    auto it = frame.normalized.find(field.key);
    if (it == frame.normalized.end() || !has_type(it->second, field.type)) {
      return false;
    }
    if (field.type == FieldType::Double && !std::isfinite(std::get<double>(it->second))) {
      return false;
    }
  }
  return true;
}

}  // namespace dfp::hal
