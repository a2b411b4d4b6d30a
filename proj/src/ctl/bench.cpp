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

#include "dfp/ctl/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <stdexcept>

#include "dfp/middleware/domain.hpp"

namespace dfp::ctl
{

namespace mw = middleware;

namespace
{

using Clock = std::chrono::steady_clock;

LatencyStats summarize(std::vector<double> v)
{
  std::sort(v.begin(), v.end());
  if (v.empty()) {
    return {};
  }
  const std::size_t n = v.size();
  const double median = n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
  const std::size_t i99 = std::min(n - 1, static_cast<std::size_t>(std::ceil(0.99 * static_cast<double>(n))) - 1);
  return {median, v[i99]};
}

double elapsed_ns(Clock::time_point a, Clock::time_point b)
{
  return static_cast<double>(std::chrono::duration_cast<std::chrono::nanoseconds>(b - a).count());
}

}  // namespace

std::vector<BenchRow> run_bench(const std::vector<std::size_t> & sizes, std::size_t samples)
{
  for (std::size_t s : sizes) {
    if (s > kBenchSlotSize) {
      throw mw::MwError(mw::MwErrc::PayloadTooLarge,
        "payload of " + std::to_string(s) + " bytes exceeds the arena slot of " + std::to_string(kBenchSlotSize));
    }
  }
  mw::Domain domain(mw::DomainOptions{nullptr, mw::kDefaultHeartbeatPeriodNs, kBenchSlotSize, 0.0, 0, {}});
  auto pub_side = domain.create_participant("bench_pub", mw::Transport::in_process());
  auto sub_side = domain.create_participant("bench_sub", mw::Transport::in_process());
  const mw::QoSProfile qos{mw::Reliability::Reliable, mw::History::keep_last(1), mw::Durability::Volatile,
    std::nullopt};

  std::vector<BenchRow> rows;
  for (std::size_t size : sizes) {
    const std::string name = "bench/s" + std::to_string(size);
    const mw::TopicDescriptor topic{name, mw::type_hash_of("bench.bytes"), qos};
    auto pub = pub_side->create_publisher(topic);
    auto sub = sub_side->create_subscriber(topic);
    domain.spin_some();

    // Producer data lives in its own buffer for the copying path.
    std::vector<std::byte> source(size, std::byte{0x5a});
    std::vector<std::byte> sink;
    sink.reserve(size);
    std::vector<double> zc;
    std::vector<double> cp;
    zc.reserve(samples);
    cp.reserve(samples);
    volatile std::uint8_t seen = 0;
    const std::size_t warmup = std::min<std::size_t>(samples, 16);

    for (std::size_t i = 0; i < samples + warmup; ++i) {
      mw::Loan loan = pub.loan(size);
      if (size > 0) {
        loan.data()[0] = static_cast<std::byte>(i);
      }
      const auto t0 = Clock::now();
      pub.publish(std::move(loan));
      auto got = sub.take(1);
      if (got.size() == 1 && size > 0) {
        seen = static_cast<std::uint8_t>(got.front().payload.data()[0]);
      }
      const auto t1 = Clock::now();
      got.clear();
      if (i >= warmup) {
        zc.push_back(elapsed_ns(t0, t1));
      }
    }

    for (std::size_t i = 0; i < samples + warmup; ++i) {
      if (size > 0) {
        source[0] = static_cast<std::byte>(i);
      }
      const auto t0 = Clock::now();
      pub.publish(std::span<const std::byte>(source.data(), source.size()));
      auto got = sub.take(1);
      if (got.size() == 1) {
        const auto bytes = got.front().payload.bytes();
        sink.assign(bytes.begin(), bytes.end());
        if (size > 0) {
          seen = static_cast<std::uint8_t>(sink[0]);
        }
      }
      const auto t1 = Clock::now();
      got.clear();
      if (i >= warmup) {
        cp.push_back(elapsed_ns(t0, t1));
      }
    }
    (void)seen;
    rows.push_back({size, samples, summarize(std::move(zc)), summarize(std::move(cp))});
  }
  return rows;
}

std::size_t parse_size(std::string_view text)
{
  std::size_t i = 0;
  while (i < text.size() && text[i] >= '0' && text[i] <= '9') {
    ++i;
  }
  if (i == 0 || i > 12) {
    throw std::invalid_argument("bad size '" + std::string(text) + "'");
  }
  const std::size_t n = std::stoull(std::string(text.substr(0, i)));
  const std::string_view unit = text.substr(i);
  if (unit.empty() || unit == "B") {
    return n;
  }
  if (unit == "KiB" || unit == "K" || unit == "k") {
    return n << 10;
  }
  if (unit == "MiB" || unit == "M") {
    return n << 20;
  }
  throw std::invalid_argument("bad size unit in '" + std::string(text) + "'");
}

nlohmann::json to_json(const std::vector<BenchRow> & rows)
{
  nlohmann::json j = nlohmann::json::array();
  for (const auto & r : rows) {
    j.push_back({{"size", r.size}, {"samples", r.samples},
        {"zero_copy", {{"median_ns", r.zero_copy.median_ns}, {"p99_ns", r.zero_copy.p99_ns}}},
        {"copying", {{"median_ns", r.copying.median_ns}, {"p99_ns", r.copying.p99_ns}}}});
  }
  return j;
}

std::string format_table(const std::vector<BenchRow> & rows)
{
  std::string out;
  char line[160];
  std::snprintf(line, sizeof(line), "%12s %9s %14s %14s %14s %14s\n", "size_bytes", "samples", "zc_median_ns",
    "zc_p99_ns", "copy_median_ns", "copy_p99_ns");
  out += line;
  for (const auto & r : rows) {
    std::snprintf(line, sizeof(line), "%12zu %9zu %14.0f %14.0f %14.0f %14.0f\n", r.size, r.samples,
      r.zero_copy.median_ns, r.zero_copy.p99_ns, r.copying.median_ns, r.copying.p99_ns);
    out += line;
  }
  return out;
}

}  // namespace dfp::ctl
