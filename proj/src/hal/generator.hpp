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

#ifndef HAL__GENERATOR_HPP_
#define HAL__GENERATOR_HPP_

#include <cstdint>
#include <optional>
#include <string_view>

#include "dfp/common/attributes.hpp"
#include "dfp/hal/device.hpp"
#include "dfp/hal/registry.hpp"

namespace dfp::hal::detail
{

/// Counter-based generator: every field is hash(seed, device_id, seq, field).
class FrameGenerator
{
public:
  FrameGenerator(std::uint64_t seed, std::string_view device_id);

  /// Uniform in [0, 1).
  double unit(std::uint64_t seq, std::string_view field) const;
  double uniform(std::uint64_t seq, std::string_view field, double lo, double hi) const;
  std::int64_t integer(std::uint64_t seq, std::string_view field, std::int64_t lo, std::int64_t hi) const;
  std::uint64_t bits(std::uint64_t seq, std::string_view field) const;

  Attributes raw(DeviceKind kind, std::uint64_t seq) const;

private:
  std::uint64_t key_;
};

/// Vendor radar encoding of a target (km, km/h, degrees).
Attributes radar_raw(const std::optional<RadarTarget> & target);

}  // namespace dfp::hal::detail

#endif  // HAL__GENERATOR_HPP_
