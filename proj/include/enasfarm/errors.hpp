// Copyright 2026 The enasfarm Authors.
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

#pragma once

#include <stdexcept>
#include <string>

namespace enasfarm {

/// Root of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define ENASFARM_DEFINE_ERROR(Name, Base) \
  class Name : public Base {              \
   public:                                \
    using Base::Base;                     \
  };

// arch-model
ENASFARM_DEFINE_ERROR(InvariantViolation, Error)
ENASFARM_DEFINE_ERROR(DecodeError, Error)
ENASFARM_DEFINE_ERROR(ParseError, Error)

// evo-engine
ENASFARM_DEFINE_ERROR(ConfigError, Error)
ENASFARM_DEFINE_ERROR(EvaluationOrderError, Error)
ENASFARM_DEFINE_ERROR(SchemeError, Error)
ENASFARM_DEFINE_ERROR(MutationStuckError, Error)

// runner / persistence
ENASFARM_DEFINE_ERROR(PersistError, Error)
ENASFARM_DEFINE_ERROR(RestartError, Error)
ENASFARM_DEFINE_ERROR(CorruptLogError, RestartError)

// evaluator / backends / dispatch
ENASFARM_DEFINE_ERROR(CacheMismatchError, Error)
ENASFARM_DEFINE_ERROR(LookupMiss, Error)
ENASFARM_DEFINE_ERROR(JobFailed, Error)
ENASFARM_DEFINE_ERROR(WorkerLostError, Error)
ENASFARM_DEFINE_ERROR(ProtocolError, Error)
ENASFARM_DEFINE_ERROR(BusError, Error)
ENASFARM_DEFINE_ERROR(InterruptedError, Error)

// reporting
ENASFARM_DEFINE_ERROR(ReportError, Error)
ENASFARM_DEFINE_ERROR(MixedSettingsError, ReportError)

#undef ENASFARM_DEFINE_ERROR

}  // namespace enasfarm
