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

#ifndef DFP__ENVMODEL__STORE_HPP_
#define DFP__ENVMODEL__STORE_HPP_

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include "dfp/envmodel/record.hpp"
#include "dfp/hal/device.hpp"

namespace dfp::envmodel
{

/// Record store. Mutations are serialized; queries share a read lock and
/// see a consistent snapshot.
///
/// With a log path, every mutation is appended as one JSON line: a full
/// record after create/update, or {"record_id": n, "deleted": true} after a
/// delete. Opening replays the log.
class EnvStore
{
public:
  EnvStore();
  /// Throws EnvError{CorruptLog} when a line cannot be replayed.
  explicit EnvStore(const std::filesystem::path & log_path);

  EnvStore(const EnvStore &) = delete;
  EnvStore & operator=(const EnvStore &) = delete;

  /// Tags are normalized before storing. Throws EnvError{DuplicateId |
  /// InvalidRecord}.
  void create(EnvRecord record);
  EnvRecord read(std::uint64_t id) const;
  void update(std::uint64_t id, const RecordPatch & patch);
  /// A second delete of the same id throws NotFound.
  void remove(std::uint64_t id);

  std::size_t size() const;
  /// All records by ascending id.
  std::vector<EnvRecord> records() const;
  /// One past the largest id ever stored.
  std::uint64_t next_id() const;

  /// Ordered by (timestamp_ns desc, record_id asc). Throws
  /// EnvError{EmptyQuery | InvalidQuery}.
  std::vector<EnvRecord> query(const OddQuery & q) const;

  void save_odd(const std::string & name, const OddQuery & q);
  std::vector<EnvRecord> run_odd(const std::string & name) const;
  std::vector<OddDefinition> odds() const;

  /// Maps a normalized frame to a new record (see ingest_record) and stores
  /// it under next_id().
  std::uint64_t ingest(const hal::AbstractFrame & frame);

private:
  void create_locked(EnvRecord record);
  void append_locked(const nlohmann::json & line);
  std::vector<EnvRecord> query_locked(const OddQuery & q) const;

  std::map<std::uint64_t, EnvRecord> records_;
  std::map<std::string, OddQuery> odds_;
  std::uint64_t next_id_ = 1;
  std::optional<std::ofstream> log_;
  mutable std::shared_mutex mutex_;
};

/// The frame-to-record table, with record_id left at 0:
///
///   Camera  Object        {camera, frame}                     Perception
///   Radar   Object        {vehicle, lead} with a target,
///                         {radar, clear} without              Perception
///   Lidar   Object        {lidar, pointcloud}                 Perception
///   GPS     Localization  {gps, position}                     Localization
///   IMU     Localization  {imu, motion}                       Localization
///   HDMap   RoadFeature   {<road_class>, lanes_<n>} + tunnel  Cloud
///   V2X     event "weather": Weather {rain | dry}, + fog when
///           visibility_m < 1000; otherwise V2XEvent
///           {v2x, <event_type>} + rain                        V2X
///
/// Attributes are the normalized payload plus "source_id" and "seq".
/// Throws EnvError{InvalidRecord} when a required field is missing.
EnvRecord ingest_record(const hal::AbstractFrame & frame);

}  // namespace dfp::envmodel

#endif  // DFP__ENVMODEL__STORE_HPP_
