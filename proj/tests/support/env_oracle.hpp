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

#ifndef SUPPORT__ENV_ORACLE_HPP_
#define SUPPORT__ENV_ORACLE_HPP_

// Corpus and query generators plus a brute-force query scan that shares no
// code with the store.

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <tuple>
#include <vector>

#include "dfp/envmodel/record.hpp"

namespace oracle
{

namespace env = dfp::envmodel;

/// Memoized recursion over suffixes.
inline std::size_t edit_distance(const std::string & a, const std::string & b)
{
  std::map<std::pair<std::size_t, std::size_t>, std::size_t> memo;
  auto go = [&](auto && self, std::size_t i, std::size_t j) -> std::size_t {
      if (i == a.size()) {
        return b.size() - j;
      }
      if (j == b.size()) {
        return a.size() - i;
      }
      auto it = memo.find({i, j});
      if (it != memo.end()) {
        return it->second;
      }
      std::size_t best;
      if (a[i] == b[j]) {
        best = self(self, i + 1, j + 1);
      } else {
        best = 1 + std::min({self(self, i + 1, j), self(self, i, j + 1), self(self, i + 1, j + 1)});
      }
      memo[{i, j}] = best;
      return best;
    };
  return go(go, 0, 0);
}

inline const std::vector<std::string> & env_vocabulary()
{
  static const std::vector<std::string> v = {
    "tunnel", "highway", "rain", "night", "fog", "urban", "rural", "bridge", "snow", "dry",
    "vehicle", "lead", "pedestrian", "lane", "merge", "exit", "work", "ice", "dusk", "glare"};
  return v;
}

inline std::vector<env::EnvRecord> env_corpus(std::mt19937_64 & rng, std::size_t n)
{
  const auto & vocab = env_vocabulary();
  std::vector<env::EnvRecord> out;
  for (std::size_t i = 0; i < n; ++i) {
    env::EnvRecord r;
    r.record_id = 1 + i;
    r.record_class = env::RecordClass(rng() % 6);
    r.source = env::Source(rng() % 5);
    // Few distinct timestamps so that the id tie-break matters.
    r.timestamp_ns = static_cast<std::int64_t>(rng() % 10) * 1000;
    const auto k = 1 + rng() % 4;
    while (r.tags.size() < k) {
      r.tags.insert(vocab[rng() % vocab.size()]);
    }
    r.attributes["i"] = static_cast<std::int64_t>(i);
    out.push_back(std::move(r));
  }
  return out;
}

/// Random words from the vocabulary, some with a one-letter typo, some in
/// upper case, plus connector words and optional filters.
inline env::OddQuery random_query(std::mt19937_64 & rng)
{
  static const std::vector<std::string> connectors = {"on", "in", "at", "the", "a", "of", "and", "with"};
  const auto & vocab = env_vocabulary();
  env::OddQuery q;
  const auto k = rng() % 4;
  for (std::uint64_t i = 0; i < k; ++i) {
    std::string w = vocab[rng() % vocab.size()];
    switch (rng() % 6) {
      case 0:
        w.erase(rng() % w.size(), 1);
        break;
      case 1:
        w[rng() % w.size()] = static_cast<char>('a' + rng() % 26);
        break;
      case 2:
        w.insert(rng() % (w.size() + 1), 1, 'x');
        break;
      case 3:
        w[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(w[0])));
        break;
      default:
        break;
    }
    q.tokens.push_back(w);
    if (rng() % 3 == 0) {
      q.tokens.push_back(connectors[rng() % connectors.size()]);
    }
  }
  if (q.tokens.empty()) {
    q.tokens.push_back(connectors[rng() % connectors.size()]);
  }
  if (rng() % 4 == 0) {
    q.class_filter = env::RecordClass(rng() % 6);
  }
  if (rng() % 4 == 0) {
    const auto t0 = static_cast<std::int64_t>(rng() % 10) * 1000;
    q.time_range = std::pair{t0, t0 + static_cast<std::int64_t>(rng() % 5) * 1000};
  }
  return q;
}

/// nullopt when the query has nothing but connector words.
inline std::optional<std::vector<std::uint64_t>> brute_force_query(
  const std::vector<env::EnvRecord> & corpus, const env::OddQuery & q)
{
  static const std::vector<std::string> stop = {"on", "in", "at", "the", "a", "an", "of", "and", "with"};
  std::vector<std::string> tokens;
  for (auto t : q.tokens) {
    std::string low;
    for (char c : t) {
      if (c != ' ' && c != '\t') {
        low += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
      }
    }
    if (!low.empty() && std::find(stop.begin(), stop.end(), low) == stop.end()) {
      tokens.push_back(low);
    }
  }
  if (tokens.empty()) {
    return std::nullopt;
  }
  std::vector<std::tuple<std::int64_t, std::uint64_t>> hits;
  for (const auto & r : corpus) {
    if (q.class_filter && *q.class_filter != r.record_class) {
      continue;
    }
    if (q.time_range && !(q.time_range->first <= r.timestamp_ns && r.timestamp_ns <= q.time_range->second)) {
      continue;
    }
    bool every = true;
    for (const auto & t : tokens) {
      bool any = false;
      for (const auto & tag : r.tags) {
        if (t == tag || (t.size() >= 4 && edit_distance(t, tag) <= 1)) {
          any = true;
        }
      }
      every = every && any;
    }
    if (every) {
      hits.emplace_back(-r.timestamp_ns, r.record_id);
    }
  }
  std::sort(hits.begin(), hits.end());
  std::vector<std::uint64_t> out;
  for (const auto & [neg_ts, id] : hits) {
    out.push_back(id);
  }
  return out;
}

}  // namespace oracle

#endif  // SUPPORT__ENV_ORACLE_HPP_
