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

#ifndef DFP__CTL__RUNNER_HPP_
#define DFP__CTL__RUNNER_HPP_

#include <cstdint>
#include <optional>
#include <string>

#include "json.hpp"

#include "dfp/ctl/config.hpp"

namespace dfp::ctl
{

struct RunOptions
{
  /// Overrides acc.duration; required when there is no acc section.
  std::optional<double> duration_s;
  /// Overrides the config seed.
  std::optional<std::uint64_t> seed;
};

struct RunOutcome
{
  /// "ok", "collision", "cascade_overflow" or "runtime_error".
  std::string status = "ok";
  std::string message;
  /// MetricsReport; written even when the run stopped early.
  nlohmann::json report;
  /// JSON lines.
  std::string trajectory;
  std::string firing_reports;
  std::string fsm_trace;
  /// Records of the env store as JSON lines, readable by query-env.
  std::string env_records;

  int exit_code() const {return status == "ok" ? 0 : 1;}
};

/// Assembles every layer from a validated config and runs it. Without an
/// acc section the platform steps for the requested duration (default 10 s).
RunOutcome run_system(const SystemConfig & cfg, const RunOptions & options);

/// Report text as written to disk: 2-space indent, trailing newline.
std::string report_text(const nlohmann::json & report);

}  // namespace dfp::ctl

#endif  // DFP__CTL__RUNNER_HPP_
