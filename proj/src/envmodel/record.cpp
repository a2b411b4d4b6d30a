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

#include "dfp/envmodel/record.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <numeric>

namespace dfp::envmodel
{

namespace
{

constexpr std::array<std::string_view, 6> kClassNames = {
  "Object", "Lane", "RoadFeature", "Weather", "Localization", "V2XEvent"};
constexpr std::array<std::string_view, 5> kSourceNames = {
  "Perception", "Localization", "Fusion", "V2X", "Cloud"};
constexpr std::array<std::string_view, 9> kStopwords = {
  "on", "in", "at", "the", "a", "an", "of", "and", "with"};

bool valid_tag(std::string_view t)
{
  return !t.empty() && std::all_of(t.begin(), t.end(), [](char c) {
             return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_';
           });
}

}  // namespace

std::string_view to_string(RecordClass c)
{
  return kClassNames.at(static_cast<std::size_t>(c));
}

std::string_view to_string(Source s)
{
  return kSourceNames.at(static_cast<std::size_t>(s));
}

RecordClass parse_record_class(std::string_view s)
{
  for (std::size_t i = 0; i < kClassNames.size(); ++i) {
    if (kClassNames[i] == s) {
      return RecordClass(i);
    }
  }
  throw EnvError(EnvErrc::InvalidRecord, "unknown record class '" + std::string(s) + "'");
}

Source parse_source(std::string_view s)
{
  for (std::size_t i = 0; i < kSourceNames.size(); ++i) {
    if (kSourceNames[i] == s) {
      return Source(i);
    }
  }
  throw EnvError(EnvErrc::InvalidRecord, "unknown source '" + std::string(s) + "'");
}

bool is_stopword(std::string_view token)
{
  return std::find(kStopwords.begin(), kStopwords.end(), token) != kStopwords.end();
}

std::string normalize_token(std::string_view raw)
{
  auto is_space = [](char c) {return std::isspace(static_cast<unsigned char>(c)) != 0;};
  while (!raw.empty() && is_space(raw.front())) {
    raw.remove_prefix(1);
  }
  while (!raw.empty() && is_space(raw.back())) {
    raw.remove_suffix(1);
  }
  std::string out(raw);
  for (char & c : out) {
    c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  return out;
}

std::set<std::string> normalize_tags(const std::set<std::string> & raw)
{
  std::set<std::string> out;
  for (const auto & t : raw) {
    std::string n = normalize_token(t);
    if (is_stopword(n)) {
      continue;
    }
    if (!valid_tag(n)) {
      throw EnvError(EnvErrc::InvalidRecord, "tag '" + t + "' is not of the form [a-z0-9_]+");
    }
    out.insert(std::move(n));
  }
  if (out.empty()) {
    throw EnvError(EnvErrc::InvalidRecord, "record needs at least one tag");
  }
  return out;
}

std::vector<std::string> effective_tokens(const OddQuery & q)
{
  std::vector<std::string> out;
  for (const auto & t : q.tokens) {
    std::string n = normalize_token(t);
    if (!n.empty() && !is_stopword(n)) {
      out.push_back(std::move(n));
    }
  }
  return out;
}

std::size_t levenshtein(std::string_view a, std::string_view b)
{
  std::vector<std::size_t> row(b.size() + 1);
  std::iota(row.begin(), row.end(), std::size_t{0});
  for (std::size_t i = 1; i <= a.size(); ++i) {
    std::size_t diag = row[0];
    row[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t up = row[j];
      row[j] = std::min({row[j] + 1, row[j - 1] + 1, diag + (a[i - 1] == b[j - 1] ? 0 : 1)});
      diag = up;
    }
  }
  return row[b.size()];
}

bool fuzzy_match(std::string_view token, std::string_view tag)
{
  if (token == tag) {
    return true;
  }
  if (token.size() < 4) {
    return false;
  }
  const std::size_t gap = token.size() > tag.size() ? token.size() - tag.size() : tag.size() - token.size();
  return gap <= 1 && levenshtein(token, tag) <= 1;
}

nlohmann::json to_json(const EnvRecord & r)
{
  nlohmann::json j{
    {"record_id", r.record_id},
    {"class", to_string(r.record_class)},
    {"tags", r.tags},
    {"timestamp_ns", r.timestamp_ns},
    {"position", nullptr},
    {"attributes", dfp::to_json(r.attributes)},
    {"source", to_string(r.source)},
  };
  if (r.position) {
    j["position"] = {{"x", r.position->x_m}, {"y", r.position->y_m}};
  }
  return j;
}

EnvRecord record_from_json(const nlohmann::json & j)
{
  try {
    if (!j.is_object()) {
      throw EnvError(EnvErrc::InvalidRecord, "record must be an object");
    }
    for (const auto & [k, v] : j.items()) {
      static const std::set<std::string> keys = {
        "record_id", "class", "tags", "timestamp_ns", "position", "attributes", "source"};
      if (!keys.contains(k)) {
        throw EnvError(EnvErrc::InvalidRecord, "unknown record field '" + k + "'");
      }
    }
    EnvRecord r;
    r.record_id = j.at("record_id").get<std::uint64_t>();
    r.record_class = parse_record_class(j.at("class").get<std::string>());
    r.tags = j.at("tags").get<std::set<std::string>>();
    r.timestamp_ns = j.at("timestamp_ns").get<std::int64_t>();
    if (j.contains("position") && !j.at("position").is_null()) {
      r.position = Position{j.at("position").at("x").get<double>(), j.at("position").at("y").get<double>()};
    }
    if (j.contains("attributes")) {
      r.attributes = attributes_from_json(j.at("attributes"));
    }
    r.source = parse_source(j.at("source").get<std::string>());
    return r;
  } catch (const nlohmann::json::exception & e) {
    throw EnvError(EnvErrc::InvalidRecord, std::string("malformed record: ") + e.what());
  } catch (const std::invalid_argument & e) {
    throw EnvError(EnvErrc::InvalidRecord, std::string("malformed record: ") + e.what());
  }
}

nlohmann::json to_json(const OddQuery & q)
{
  nlohmann::json j{{"tokens", q.tokens}};
  if (q.class_filter) {
    j["class"] = to_string(*q.class_filter);
  }
  if (q.time_range) {
    j["time_range"] = {q.time_range->first, q.time_range->second};
  }
  return j;
}

OddQuery query_from_json(const nlohmann::json & j)
{
  try {
    OddQuery q;
    q.tokens = j.at("tokens").get<std::vector<std::string>>();
    if (j.contains("class")) {
      q.class_filter = parse_record_class(j.at("class").get<std::string>());
    }
    if (j.contains("time_range")) {
      const auto & tr = j.at("time_range");
      if (!tr.is_array() || tr.size() != 2) {
        throw EnvError(EnvErrc::InvalidQuery, "time_range must be [t0, t1]");
      }
      q.time_range = std::pair{tr[0].get<std::int64_t>(), tr[1].get<std::int64_t>()};
    }
    return q;
  } catch (const nlohmann::json::exception & e) {
    throw EnvError(EnvErrc::InvalidQuery, std::string("malformed query: ") + e.what());
  } catch (const EnvError & e) {
    throw EnvError(EnvErrc::InvalidQuery, e.what());
  }
}

}  // namespace dfp::envmodel
