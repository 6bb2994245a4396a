// Copyright 2026 The dlaperf Authors
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

#include "dlaperf/error.hpp"

namespace dlaperf {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InvalidScalar: return "InvalidScalar";
    case ErrorKind::InvalidFlag: return "InvalidFlag";
    case ErrorKind::InvalidLeadingDimension: return "InvalidLeadingDimension";
    case ErrorKind::InvalidSignature: return "InvalidSignature";
    case ErrorKind::UnknownKernel: return "UnknownKernel";
    case ErrorKind::BackendError: return "BackendError";
    case ErrorKind::ResourceError: return "ResourceError";
    case ErrorKind::DegenerateBox: return "DegenerateBox";
    case ErrorKind::FitError: return "FitError";
    case ErrorKind::OutOfDomain: return "OutOfDomain";
    case ErrorKind::UnknownVariant: return "UnknownVariant";
    case ErrorKind::VersionError: return "VersionError";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::InvalidOperand: return "InvalidOperand";
    case ErrorKind::NoOperands: return "NoOperands";
    case ErrorKind::InvalidSpec: return "InvalidSpec";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

}  // namespace dlaperf
