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
#ifndef DFP__COMMON__ERROR_HPP_
#define DFP__COMMON__ERROR_HPP_

#include <stdexcept>
#include <string>

namespace dfp
{

/// Exception carrying a module-specific error code.
template<typename Code>
class Error : public std::runtime_error
{
public:
  Error(Code code, const std::string & what)
  : std::runtime_error(what), code_(code) {}

  Code code() const noexcept {return code_;}

private:
  Code code_;
};

}  // namespace dfp

#endif  // DFP__COMMON__ERROR_HPP_
