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

#include "dfp/middleware/qos.hpp"

#include "dfp/common/hash.hpp"

namespace dfp::middleware
{

std::optional<std::string> validate(const QoSProfile & qos)
{
  if (qos.history.kind == HistoryKind::KeepLast && qos.history.depth < 1) {
    return "KeepLast depth must be >= 1";
  }
  if (qos.deadline_ms && *qos.deadline_ms == 0) {
    return "deadline_ms must be > 0";
  }
  return std::nullopt;
}

bool qos_compatible(const QoSProfile & offered, const QoSProfile & requested)
{
  return offered.reliability >= requested.reliability &&
         offered.durability >= requested.durability;
}

bool is_valid_topic_name(std::string_view name)
{
  if (name.empty()) {
    return false;
  }
  for (char c : name) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_' || c == '/';
    if (!ok) {
      return false;
    }
  }
  return true;
}

std::uint64_t type_hash_of(std::string_view schema)
{
  return fnv1a64(schema);
}

bool endpoints_match(const TopicDescriptor & writer, const TopicDescriptor & reader)
{
  return writer.name == reader.name && writer.type_hash == reader.type_hash &&
         qos_compatible(writer.qos, reader.qos);
}

std::string_view to_string(Reliability r)
{
  return r == Reliability::Reliable ? "Reliable" : "BestEffort";
}

std::string_view to_string(Durability d)
{
  return d == Durability::TransientLocal ? "TransientLocal" : "Volatile";
}

std::string to_string(const History & h)
{
  if (h.kind == HistoryKind::KeepAll) {
    return "KeepAll";
  }
  return "KeepLast(" + std::to_string(h.depth) + ")";
}

}  // namespace dfp::middleware
