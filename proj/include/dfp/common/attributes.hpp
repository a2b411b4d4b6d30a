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
#ifndef DFP__COMMON__ATTRIBUTES_HPP_
#define DFP__COMMON__ATTRIBUTES_HPP_

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>

#include "json.hpp"

namespace dfp
{

/// A flat attribute value. Integers and doubles are kept distinct so that
/// counters and checksums survive a JSON round trip exactly.
using AttrValue = std::variant<bool, std::int64_t, double, std::string>;

/// Ordered so that iteration and serialization are deterministic.
using Attributes = std::map<std::string, AttrValue>;

std::optional<double> as_number(const AttrValue & v);
std::optional<double> get_number(const Attributes & attrs, const std::string & key);
std::optional<bool> get_bool(const Attributes & attrs, const std::string & key);
std::optional<std::string> get_string(const Attributes & attrs, const std::string & key);

nlohmann::json to_json(const AttrValue & v);
nlohmann::json to_json(const Attributes & attrs);

/// Throws std::invalid_argument on nested objects/arrays or null.
AttrValue attr_from_json(const nlohmann::json & j);
Attributes attributes_from_json(const nlohmann::json & j);

/// Name of the held alternative: "bool", "int", "double" or "string".
const char * type_name(const AttrValue & v);

}  // namespace dfp

#endif  // DFP__COMMON__ATTRIBUTES_HPP_
