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

#ifndef DFP__FUNCSW__CONFIG_HPP_
#define DFP__FUNCSW__CONFIG_HPP_

#include "json.hpp"

#include "dfp/funcsw/types.hpp"

namespace dfp::funcsw
{

/// Parses a `pipeline` object:
///
///   {"external_topics": [...],
///    "groups": {"<id>": {"binding": "...", "restart": "never" | {"up_to": n}}},
///    "nodes": [{"id", "stage", "group", "algorithm", "version",
///               "inputs", "outputs", "config", "dynamic_keys", "watchdog_ms"}]}
///
/// Unknown keys are rejected. Throws FswError{InvalidGraph}.
GraphSpec graph_spec_from_json(const nlohmann::json & j);

nlohmann::json to_json(const GraphSpec & spec);

}  // namespace dfp::funcsw

#endif  // DFP__FUNCSW__CONFIG_HPP_
