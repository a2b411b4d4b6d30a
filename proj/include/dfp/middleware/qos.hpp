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

#ifndef DFP__MIDDLEWARE__QOS_HPP_
#define DFP__MIDDLEWARE__QOS_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace dfp::middleware
{

// Enumerators are ordered weakest to strongest; matching compares ranks.
enum class Reliability : std::uint8_t
{
  BestEffort = 0,
  Reliable = 1,
};

enum class Durability : std::uint8_t
{
  Volatile = 0,
  TransientLocal = 1,
};

enum class HistoryKind : std::uint8_t
{
  KeepLast = 0,
  KeepAll = 1,
};

struct History
{
  HistoryKind kind = HistoryKind::KeepLast;
  /// Only meaningful for KeepLast; must be >= 1.
  std::uint32_t depth = 1;

  static History keep_last(std::uint32_t n) {return {HistoryKind::KeepLast, n};}
  static History keep_all() {return {HistoryKind::KeepAll, 0};}

  bool operator==(const History &) const = default;
};

struct QoSProfile
{
  Reliability reliability = Reliability::BestEffort;
  History history = History::keep_last(1);
  Durability durability = Durability::Volatile;
  std::optional<std::uint32_t> deadline_ms;

  bool operator==(const QoSProfile &) const = default;
};

/// Empty when valid, otherwise a description of the violated invariant.
std::optional<std::string> validate(const QoSProfile & qos);

/// Offered (writer) must cover requested (reader) on reliability and
/// durability. History and deadline never block a match.
bool qos_compatible(const QoSProfile & offered, const QoSProfile & requested);

struct TopicDescriptor
{
  std::string name;
  std::uint64_t type_hash = 0;
  QoSProfile qos;
};

/// [a-z0-9_/]+
bool is_valid_topic_name(std::string_view name);

/// Content hash of a declared payload schema string.
std::uint64_t type_hash_of(std::string_view schema);

/// Writer/reader pair connectivity: equal names, equal type hashes and
/// compatible QoS.
bool endpoints_match(const TopicDescriptor & writer, const TopicDescriptor & reader);

std::string_view to_string(Reliability r);
std::string_view to_string(Durability d);
std::string to_string(const History & h);

}  // namespace dfp::middleware

#endif  // DFP__MIDDLEWARE__QOS_HPP_
