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

#include "dfp/funcsw/registry.hpp"

#include <string>
#include <utility>
#include <vector>

namespace dfp::funcsw
{

void AlgorithmRegistry::register_algorithm(AlgorithmDescriptor descriptor, StepFactory factory)
{
  if (descriptor.name.empty() || descriptor.version.empty() || !factory) {
    throw FswError(FswErrc::InvalidGraph, "algorithm needs a name, a version and a factory");
  }
  auto key = std::make_pair(descriptor.name, descriptor.version);
  if (entries_.contains(key)) {
    throw FswError(
      FswErrc::DuplicateAlgorithm, "algorithm " + descriptor.name + "@" + descriptor.version + " already registered");
  }
  entries_.emplace(std::move(key), Entry{std::move(descriptor), std::move(factory)});
}

const AlgorithmRegistry::Entry & AlgorithmRegistry::find(
  const std::string & name, const std::string & version) const
{
  auto it = entries_.find({name, version});
  if (it == entries_.end()) {
    throw FswError(FswErrc::AlgorithmNotFound, "algorithm " + name + "@" + version + " not registered");
  }
  return it->second;
}

const StepFactory & AlgorithmRegistry::resolve(const std::string & name, const std::string & version) const
{
  return find(name, version).factory;
}

const AlgorithmDescriptor & AlgorithmRegistry::descriptor(
  const std::string & name, const std::string & version) const
{
  return find(name, version).descriptor;
}

bool AlgorithmRegistry::contains(const std::string & name, const std::string & version) const
{
  return entries_.contains({name, version});
}

std::vector<AlgorithmDescriptor> AlgorithmRegistry::list() const
{
  std::vector<AlgorithmDescriptor> out;
  out.reserve(entries_.size());
  for (const auto & [key, e] : entries_) {
    out.push_back(e.descriptor);
  }
  return out;
}

}  // namespace dfp::funcsw
