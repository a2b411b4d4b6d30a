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

#ifndef DFP__FUNCSW__REGISTRY_HPP_
#define DFP__FUNCSW__REGISTRY_HPP_

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "dfp/funcsw/types.hpp"

namespace dfp::funcsw
{

class AlgorithmRegistry
{
public:
  /// Throws FswError{DuplicateAlgorithm} for a repeated (name, version) and
  /// FswError{InvalidGraph} for an empty name, version or factory.
  void register_algorithm(AlgorithmDescriptor descriptor, StepFactory factory);

  /// Exact (name, version) match. Throws FswError{AlgorithmNotFound}.
  const StepFactory & resolve(const std::string & name, const std::string & version) const;
  const AlgorithmDescriptor & descriptor(const std::string & name, const std::string & version) const;

  bool contains(const std::string & name, const std::string & version) const;
  std::vector<AlgorithmDescriptor> list() const;

private:
  struct Entry
  {
    AlgorithmDescriptor descriptor;
    StepFactory factory;
  };

  const Entry & find(const std::string & name, const std::string & version) const;

  std::map<std::pair<std::string, std::string>, Entry> entries_;
};

}  // namespace dfp::funcsw

#endif  // DFP__FUNCSW__REGISTRY_HPP_
