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
#include "dfp/common/attributes.hpp"

#include <stdexcept>

namespace dfp
{

std::optional<double> as_number(const AttrValue & v)
{
  if (const auto * d = std::get_if<double>(&v)) {
    return *d;
  }
  if (const auto * i = std::get_if<std::int64_t>(&v)) {
    return static_cast<double>(*i);
  }
  return std::nullopt;
}

std::optional<double> get_number(const Attributes & attrs, const std::string & key)
{
  auto it = attrs.find(key);
  if (it == attrs.end()) {
    return std::nullopt;
  }
  return as_number(it->second);
}

std::optional<bool> get_bool(const Attributes & attrs, const std::string & key)
{
  auto it = attrs.find(key);
  if (it == attrs.end()) {
    return std::nullopt;
  }
  if (const auto * b = std::get_if<bool>(&it->second)) {
    return *b;
  }
  return std::nullopt;
}

std::optional<std::string> get_string(const Attributes & attrs, const std::string & key)
{
  auto it = attrs.find(key);
  if (it == attrs.end()) {
    return std::nullopt;
  }
  if (const auto * s = std::get_if<std::string>(&it->second)) {
    return *s;
  }
  return std::nullopt;
}

nlohmann::json to_json(const AttrValue & v)
{
  return std::visit([](const auto & x) {return nlohmann::json(x);}, v);
}

nlohmann::json to_json(const Attributes & attrs)
{
  nlohmann::json j = nlohmann::json::object();
  for (const auto & [k, v] : attrs) {
    j[k] = to_json(v);
  }
  return j;
}

AttrValue attr_from_json(const nlohmann::json & j)
{
  switch (j.type()) {
    case nlohmann::json::value_t::boolean:
      return j.get<bool>();
    case nlohmann::json::value_t::number_integer:
      return j.get<std::int64_t>();
    case nlohmann::json::value_t::number_unsigned:
      return static_cast<std::int64_t>(j.get<std::uint64_t>());
    case nlohmann::json::value_t::number_float:
      return j.get<double>();
    case nlohmann::json::value_t::string:
      return j.get<std::string>();
    default:
      throw std::invalid_argument("attribute values must be scalar, got " + std::string(j.type_name()));
  }
}

Attributes attributes_from_json(const nlohmann::json & j)
{
  if (!j.is_object()) {
    throw std::invalid_argument("attributes must be a JSON object");
  }
  Attributes out;
  for (const auto & [k, v] : j.items()) {
    out.emplace(k, attr_from_json(v));
  }
  return out;
}

const char * type_name(const AttrValue & v)
{
  switch (v.index()) {
    case 0: return "bool";
    case 1: return "int";
    case 2: return "double";
    default: return "string";
  }
}

}  // namespace dfp
