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

#include "dfp/envmodel/store.hpp"

#include <algorithm>
#include <mutex>

namespace dfp::envmodel
{

EnvStore::EnvStore() = default;

EnvStore::EnvStore(const std::filesystem::path & log_path)
{
  std::ifstream in(log_path);
  std::string line;
  std::size_t lineno = 0;
  while (in && std::getline(in, line)) {
    ++lineno;
    if (line.empty()) {
      continue;
    }
    const std::string where = log_path.string() + ":" + std::to_string(lineno);
    try {
      const auto j = nlohmann::json::parse(line);
      if (j.contains("deleted")) {
        const auto id = j.at("record_id").get<std::uint64_t>();
        if (records_.erase(id) == 0) {
          throw EnvError(EnvErrc::CorruptLog, where + ": tombstone for unknown record " + std::to_string(id));
        }
      } else {
        EnvRecord r = record_from_json(j);
        r.tags = normalize_tags(r.tags);
        next_id_ = std::max(next_id_, r.record_id + 1);
        records_[r.record_id] = std::move(r);
      }
    } catch (const EnvError & e) {
      if (e.code() == EnvErrc::CorruptLog) {
        throw;
      }
      throw EnvError(EnvErrc::CorruptLog, where + ": " + e.what());
    } catch (const nlohmann::json::exception & e) {
      throw EnvError(EnvErrc::CorruptLog, where + ": " + e.what());
    }
  }
  log_.emplace(log_path, std::ios::app);
  if (!*log_) {
    throw EnvError(EnvErrc::CorruptLog, "cannot open " + log_path.string() + " for appending");
  }
}

void EnvStore::append_locked(const nlohmann::json & line)
{
  if (log_) {
    *log_ << line.dump() << '\n';
    log_->flush();
  }
}

void EnvStore::create_locked(EnvRecord record)
{
  if (records_.contains(record.record_id)) {
    throw EnvError(EnvErrc::DuplicateId, "record " + std::to_string(record.record_id) + " already exists");
  }
  record.tags = normalize_tags(record.tags);
  append_locked(to_json(record));
  next_id_ = std::max(next_id_, record.record_id + 1);
  records_.emplace(record.record_id, std::move(record));
}

void EnvStore::create(EnvRecord record)
{
  std::unique_lock lock(mutex_);
  create_locked(std::move(record));
}

EnvRecord EnvStore::read(std::uint64_t id) const
{
  std::shared_lock lock(mutex_);
  auto it = records_.find(id);
  if (it == records_.end()) {
    throw EnvError(EnvErrc::NotFound, "no record " + std::to_string(id));
  }
  return it->second;
}

void EnvStore::update(std::uint64_t id, const RecordPatch & patch)
{
  std::unique_lock lock(mutex_);
  auto it = records_.find(id);
  if (it == records_.end()) {
    throw EnvError(EnvErrc::NotFound, "no record " + std::to_string(id));
  }
  EnvRecord next = it->second;
  if (patch.record_class && *patch.record_class != next.record_class) {
    throw EnvError(
      EnvErrc::InvalidRecord, "record " + std::to_string(id) + ": class " + std::string(to_string(next.record_class)) +
      " cannot change");
  }
  if (patch.tags) {
    next.tags = normalize_tags(*patch.tags);
  }
  if (patch.timestamp_ns) {
    next.timestamp_ns = *patch.timestamp_ns;
  }
  if (patch.position) {
    next.position = *patch.position;
  }
  if (patch.attributes) {
    next.attributes = *patch.attributes;
  }
  if (patch.source) {
    next.source = *patch.source;
  }
  append_locked(to_json(next));
  it->second = std::move(next);
}

void EnvStore::remove(std::uint64_t id)
{
  std::unique_lock lock(mutex_);
  if (records_.erase(id) == 0) {
    throw EnvError(EnvErrc::NotFound, "no record " + std::to_string(id));
  }
  append_locked({{"record_id", id}, {"deleted", true}});
}

std::size_t EnvStore::size() const
{
  std::shared_lock lock(mutex_);
  return records_.size();
}

std::vector<EnvRecord> EnvStore::records() const
{
  std::shared_lock lock(mutex_);
  std::vector<EnvRecord> out;
  out.reserve(records_.size());
  for (const auto & [id, r] : records_) {
    out.push_back(r);
  }
  return out;
}

std::uint64_t EnvStore::next_id() const
{
  std::shared_lock lock(mutex_);
  return next_id_;
}

std::vector<EnvRecord> EnvStore::query_locked(const OddQuery & q) const
{
  const auto tokens = effective_tokens(q);
  if (tokens.empty()) {
    throw EnvError(EnvErrc::EmptyQuery, "query has no tokens besides connector words");
  }
  if (q.time_range && q.time_range->first > q.time_range->second) {
    throw EnvError(EnvErrc::InvalidQuery, "time_range is reversed");
  }
  std::vector<EnvRecord> out;
  for (const auto & [id, r] : records_) {
    if (q.class_filter && r.record_class != *q.class_filter) {
      continue;
    }
    if (q.time_range && (r.timestamp_ns < q.time_range->first || r.timestamp_ns > q.time_range->second)) {
      continue;
    }
    const bool all = std::all_of(tokens.begin(), tokens.end(), [&](const std::string & t) {
          return std::any_of(r.tags.begin(), r.tags.end(), [&](const std::string & tag) {return fuzzy_match(t, tag);});
        });
    if (all) {
      out.push_back(r);
    }
  }
  std::stable_sort(out.begin(), out.end(), [](const EnvRecord & a, const EnvRecord & b) {
      return a.timestamp_ns > b.timestamp_ns;
    });
  return out;
}

std::vector<EnvRecord> EnvStore::query(const OddQuery & q) const
{
  std::shared_lock lock(mutex_);
  return query_locked(q);
}

void EnvStore::save_odd(const std::string & name, const OddQuery & q)
{
  if (effective_tokens(q).empty()) {
    throw EnvError(EnvErrc::EmptyQuery, "ODD '" + name + "' has no tokens besides connector words");
  }
  std::unique_lock lock(mutex_);
  if (!odds_.emplace(name, q).second) {
    throw EnvError(EnvErrc::DuplicateOddName, "ODD '" + name + "' already exists");
  }
}

std::vector<EnvRecord> EnvStore::run_odd(const std::string & name) const
{
  std::shared_lock lock(mutex_);
  auto it = odds_.find(name);
  if (it == odds_.end()) {
    throw EnvError(EnvErrc::OddNotFound, "no ODD named '" + name + "'");
  }
  return query_locked(it->second);
}

std::vector<OddDefinition> EnvStore::odds() const
{
  std::shared_lock lock(mutex_);
  std::vector<OddDefinition> out;
  for (const auto & [name, q] : odds_) {
    out.push_back({name, q});
  }
  return out;
}

std::uint64_t EnvStore::ingest(const hal::AbstractFrame & frame)
{
  EnvRecord r = ingest_record(frame);
  std::unique_lock lock(mutex_);
  const std::uint64_t id = next_id_;
  r.record_id = id;
  create_locked(std::move(r));
  return id;
}

EnvRecord ingest_record(const hal::AbstractFrame & frame)
{
  const Attributes & a = frame.normalized;
  auto need_string = [&](const char * key) {
      auto v = get_string(a, key);
      if (!v) {
        throw EnvError(EnvErrc::InvalidRecord, "frame from '" + frame.source_id + "' lacks '" + key + "'");
      }
      return normalize_token(*v);
    };
  auto need_bool = [&](const char * key) {
      auto v = get_bool(a, key);
      if (!v) {
        throw EnvError(EnvErrc::InvalidRecord, "frame from '" + frame.source_id + "' lacks '" + key + "'");
      }
      return *v;
    };
  auto need_number = [&](const char * key) {
      auto v = get_number(a, key);
      if (!v) {
        throw EnvError(EnvErrc::InvalidRecord, "frame from '" + frame.source_id + "' lacks '" + key + "'");
      }
      return *v;
    };

  EnvRecord r;
  r.timestamp_ns = frame.timestamp_ns;
  r.attributes = a;
  r.attributes["source_id"] = frame.source_id;
  r.attributes["seq"] = static_cast<std::int64_t>(frame.seq);
  using hal::DeviceKind;
  switch (frame.kind) {
    case DeviceKind::Camera:
      r.record_class = RecordClass::Object;
      r.tags = {"camera", "frame"};
      r.source = Source::Perception;
      break;
    case DeviceKind::Radar:
      r.record_class = RecordClass::Object;
      r.tags = need_bool("target_present") ? std::set<std::string>{"vehicle", "lead"} :
        std::set<std::string>{"radar", "clear"};
      r.source = Source::Perception;
      break;
    case DeviceKind::Lidar:
      r.record_class = RecordClass::Object;
      r.tags = {"lidar", "pointcloud"};
      r.source = Source::Perception;
      break;
    case DeviceKind::Gps:
      r.record_class = RecordClass::Localization;
      r.tags = {"gps", "position"};
      r.source = Source::Localization;
      break;
    case DeviceKind::Imu:
      r.record_class = RecordClass::Localization;
      r.tags = {"imu", "motion"};
      r.source = Source::Localization;
      break;
    case DeviceKind::HdMap:
      r.record_class = RecordClass::RoadFeature;
      r.tags = {need_string("road_class"),
        "lanes_" + std::to_string(static_cast<std::int64_t>(need_number("lane_count")))};
      if (need_bool("tunnel")) {
        r.tags.insert("tunnel");
      }
      r.source = Source::Cloud;
      break;
    case DeviceKind::V2x: {
        const std::string event = need_string("event_type");
        const bool rain = need_bool("rain");
        r.source = Source::V2X;
        if (event == "weather") {
          r.record_class = RecordClass::Weather;
          r.tags = {rain ? "rain" : "dry"};
          if (need_number("visibility_m") < 1000.0) {
            r.tags.insert("fog");
          }
        } else {
          r.record_class = RecordClass::V2XEvent;
          r.tags = {"v2x", event};
          if (rain) {
            r.tags.insert("rain");
          }
        }
        break;
      }
  }
  r.tags = normalize_tags(r.tags);
  return r;
}

}  // namespace dfp::envmodel
