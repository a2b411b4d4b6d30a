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

#ifndef DFP__HAL__NORMALIZE_HPP_
#define DFP__HAL__NORMALIZE_HPP_

#include <string>
#include <vector>

#include "dfp/hal/device.hpp"

namespace dfp::hal
{

enum class FieldType
{
  Bool,
  Int,
  Double,
  String,
};

/// One entry of a normalized schema. `raw_key` is the vendor field the value
/// is converted from by multiplying with `factor` (numeric fields only).
struct SchemaField
{
  std::string key;
  FieldType type;
  std::string raw_key;
  double factor;
};

/// Normalized schema of a kind, in key order.
///
///   Camera  width_px:int height_px:int checksum:int exposure_s:double
///   Radar   target_present:bool range_m range_rate_mps azimuth_rad
///   Lidar   point_count:int max_range_m
///   GPS     lat_rad lon_rad alt_m
///   IMU     accel_x_mps2 accel_y_mps2 yaw_rate_radps
///   HDMap   road_class:string lane_count:int speed_limit_mps tunnel:bool
///   V2X     event_type:string rain:bool visibility_m
const std::vector<SchemaField> & normalized_schema(DeviceKind kind);

/// Converts a vendor frame to SI units. A field already present under its
/// normalized key is taken as-is, so normalizing a normalized map is the
/// identity. Throws HalError{MalformedFrame} on a missing or mistyped field.
AbstractFrame normalize(const SensorFrame & frame);

/// True when the frame carries exactly its kind's schema keys with the
/// declared types.
bool conforms_to_schema(const AbstractFrame & frame);

}  // namespace dfp::hal

#endif  // DFP__HAL__NORMALIZE_HPP_
