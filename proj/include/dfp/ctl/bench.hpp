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

#ifndef DFP__CTL__BENCH_HPP_
#define DFP__CTL__BENCH_HPP_

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace dfp::ctl
{

struct LatencyStats
{
  double median_ns = 0.0;
  double p99_ns = 0.0;
};

struct BenchRow
{
  std::size_t size = 0;
  std::size_t samples = 0;
  /// Loaned buffer handed to the subscriber.
  LatencyStats zero_copy;
  /// Bytes copied into the sample and copied out again on receipt.
  LatencyStats copying;
};

/// Slot size of the bench arena; larger payloads throw
/// MwError{PayloadTooLarge}.
inline constexpr std::size_t kBenchSlotSize = 8u << 20;

/// Publish-to-take latency over an in-process topic, wall clock.
std::vector<BenchRow> run_bench(const std::vector<std::size_t> & sizes, std::size_t samples);

/// "4MiB", "64KiB", "512" ... Throws std::invalid_argument.
std::size_t parse_size(std::string_view text);

nlohmann::json to_json(const std::vector<BenchRow> & rows);
/// Fixed-width text table.
std::string format_table(const std::vector<BenchRow> & rows);

}  // namespace dfp::ctl

#endif  // DFP__CTL__BENCH_HPP_
