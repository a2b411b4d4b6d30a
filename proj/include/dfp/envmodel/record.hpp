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

#ifndef DFP__ENVMODEL__RECORD_HPP_
#define DFP__ENVMODEL__RECORD_HPP_

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"

#include "dfp/common/attributes.hpp"
#include "dfp/common/error.hpp"

namespace dfp::envmodel
{

enum class EnvErrc
{
  DuplicateId,
  NotFound,
  InvalidRecord,
  EmptyQuery,
  InvalidQuery,
  DuplicateOddName,
  OddNotFound,
  CorruptLog,
};

using EnvError = Error<EnvErrc>;

enum class RecordClass
{
  Object,
  Lane,
  RoadFeature,
  Weather,
  Localization,
  V2XEvent,
};

enum class Source
{
  Perception,
  Localization,
  Fusion,
  V2X,
  Cloud,
};

std::string_view to_string(RecordClass c);
std::string_view to_string(Source s);
/// Throw EnvError{InvalidRecord} on an unknown name.
RecordClass parse_record_class(std::string_view s);
Source parse_source(std::string_view s);

struct Position
{
  double x_m = 0.0;
  double y_m = 0.0;

  bool operator==(const Position &) const = default;
};

struct EnvRecord
{
  std::uint64_t record_id = 0;
  RecordClass record_class = RecordClass::Object;
  std::set<std::string> tags;
  std::int64_t timestamp_ns = 0;
  std::optional<Position> position;
  Attributes attributes;
  Source source = Source::Perception;

  bool operator==(const EnvRecord &) const = default;
};

/// Fields to replace; absent fields stay as they are. Changing the class
/// is rejected.
struct RecordPatch
{
  std::optional<RecordClass> record_class = std::nullopt;
  std::optional<std::set<std::string>> tags = std::nullopt;
  std::optional<std::int64_t> timestamp_ns = std::nullopt;
  std::optional<std::optional<Position>> position = std::nullopt;
  std::optional<Attributes> attributes = std::nullopt;
  std::optional<Source> source = std::nullopt;
};

struct OddQuery
{
  std::vector<std::string> tokens;
  std::optional<RecordClass> class_filter;
  /// Inclusive [t0, t1].
  std::optional<std::pair<std::int64_t, std::int64_t>> time_range;
};

struct OddDefinition
{
  std::string name;
  OddQuery query;
};

/// Connector words dropped from tags and queries.
bool is_stopword(std::string_view token);

/// Lowercase with surrounding whitespace removed.
std::string normalize_token(std::string_view raw);

/// Normalizes every tag, drops stopwords and checks the tag alphabet
/// [a-z0-9_]. Throws EnvError{InvalidRecord} if nothing valid remains or a
/// tag has other characters.
std::set<std::string> normalize_tags(const std::set<std::string> & raw);

/// Query tokens after normalization with stopwords removed.
std::vector<std::string> effective_tokens(const OddQuery & q);

std::size_t levenshtein(std::string_view a, std::string_view b);

/// Exact equality, or edit distance <= 1 when the token has >= 4 characters.
bool fuzzy_match(std::string_view token, std::string_view tag);

nlohmann::json to_json(const EnvRecord & r);
/// Throws EnvError{InvalidRecord} on a malformed object.
EnvRecord record_from_json(const nlohmann::json & j);

nlohmann::json to_json(const OddQuery & q);
/// Throws EnvError{InvalidQuery}.
OddQuery query_from_json(const nlohmann::json & j);

}  // namespace dfp::envmodel

#endif  // DFP__ENVMODEL__RECORD_HPP_
