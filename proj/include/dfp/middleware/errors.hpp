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

#ifndef DFP__MIDDLEWARE__ERRORS_HPP_
#define DFP__MIDDLEWARE__ERRORS_HPP_

#include <cstdint>
#include <string>

#include "dfp/common/error.hpp"

namespace dfp::middleware
{

enum class MwErrc
{
  InvalidArgument,
  TransportUnavailable,
  TypeHashMismatch,
  PayloadTooLarge,
  DuplicateService,
  ServiceNotFound,
  Timeout,
  RemoteError,
  ParticipantClosed,
};

using MwError = Error<MwErrc>;

/// A service handler failed on the serving side; `remote_code` is the status
/// it reported.
class RemoteServiceError : public MwError
{
public:
  RemoteServiceError(std::uint32_t remote_code, const std::string & what)
  : MwError(MwErrc::RemoteError, what), remote_code_(remote_code) {}

  std::uint32_t remote_code() const noexcept {return remote_code_;}

private:
  std::uint32_t remote_code_;
};

/// Thrown by service handlers to report a failure with a specific code.
class ServiceFault : public std::runtime_error
{
public:
  ServiceFault(std::uint32_t code, const std::string & what)
  : std::runtime_error(what), code_(code) {}

  std::uint32_t code() const noexcept {return code_;}

private:
  std::uint32_t code_;
};

}  // namespace dfp::middleware

#endif  // DFP__MIDDLEWARE__ERRORS_HPP_
