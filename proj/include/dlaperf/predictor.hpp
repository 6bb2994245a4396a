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

#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string_view>
#include <vector>

#include "dlaperf/modelstore.hpp"
#include "dlaperf/timing.hpp"
#include "dlaperf/trace.hpp"

namespace dlaperf {

enum class PredictionMode { Blended, AllInCache, AllOutOfCache };
std::string_view to_string(PredictionMode m) noexcept;
/// "blended", "ic", "oc".
PredictionMode parse_mode(std::string_view text);

/// tanh(4r) for r >= 0, tanh(2r) otherwise.
double smooth(double r) noexcept;

/// (c - d) / c.
double relative_distance(std::int64_t d, std::int64_t c);

struct OperandLoad {
  std::int64_t d = 0;  // access distance, bytes
  std::int64_t s = 0;  // operand size, bytes
};

/// sum f(r_i) s_i / sum s_i. Throws NoOperands for an empty list.
double call_alpha(std::span<const OperandLoad> operands, std::int64_t c);

/// (1 + alpha)/2 t_ic + (1 - alpha)/2 t_oc.
double blend(double t_ic, double t_oc, double alpha) noexcept;

struct OperandPrediction {
  std::int64_t d = 0;
  std::int64_t s = 0;
  double r = 0;
  double f = 0;
  Termination terminated_by = Termination::TraceStart;
};

struct CallPrediction {
  std::size_t index = 0;
  std::vector<OperandPrediction> operands;
  double alpha = 0;
  double t_ic = 0;
  double t_oc = 0;
  double t = 0;
};

struct Prediction {
  PredictionMode mode = PredictionMode::Blended;
  double total = 0;
  double total_ic = 0;
  double total_oc = 0;
  std::vector<CallPrediction> calls;
};

/// Per-call estimates summed over the trace. Model errors are rethrown with
/// the offending call index in the message.
Prediction predict_trace(const Trace& trace, ModelSource& models,
                         const MachineProfile& profile,
                         PredictionMode mode = PredictionMode::Blended);

/// index,kernel,sizes,d,alpha,t_ic,t_oc,t then a "total" row. sizes and d
/// are ';'-separated lists.
void write_prediction_csv(std::ostream& out, const Trace& trace,
                          const Prediction& p);

}  // namespace dlaperf
