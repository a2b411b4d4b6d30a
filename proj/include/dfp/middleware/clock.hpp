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

#ifndef DFP__MIDDLEWARE__CLOCK_HPP_
#define DFP__MIDDLEWARE__CLOCK_HPP_

#include <atomic>
#include <chrono>
#include <cstdint>

namespace dfp::middleware
{

class Clock
{
public:
  virtual ~Clock() = default;
  virtual std::int64_t now_ns() const = 0;
};

/// Monotonic wall time since construction.
class SteadyClock : public Clock
{
public:
  std::int64_t now_ns() const override
  {
    return std::chrono::duration_cast<std::chrono::nanoseconds>(
      std::chrono::steady_clock::now() - origin_).count();
  }

private:
  std::chrono::steady_clock::time_point origin_ = std::chrono::steady_clock::now();
};

/// Simulated time, stepped explicitly.
class ManualClock : public Clock
{
public:
  explicit ManualClock(std::int64_t start_ns = 0) : now_(start_ns) {}

  std::int64_t now_ns() const override {return now_.load(std::memory_order_acquire);}
  void set(std::int64_t ns) {now_.store(ns, std::memory_order_release);}
  void advance(std::int64_t ns) {now_.fetch_add(ns, std::memory_order_acq_rel);}

private:
  std::atomic<std::int64_t> now_;
};

}  // namespace dfp::middleware

#endif  // DFP__MIDDLEWARE__CLOCK_HPP_
