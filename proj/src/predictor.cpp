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

#include "dlaperf/predictor.hpp"

#include <cmath>
#include <ostream>

#include "dlaperf/error.hpp"
#include "dlaperf/format.hpp"

namespace dlaperf {

std::string_view to_string(PredictionMode m) noexcept {
  switch (m) {
    case PredictionMode::Blended: return "blended";
    case PredictionMode::AllInCache: return "ic";
    case PredictionMode::AllOutOfCache: return "oc";
  }
  return "?";
}

PredictionMode parse_mode(std::string_view t) {
  if (t == "blended") return PredictionMode::Blended;
  if (t == "ic" || t == "in-cache") return PredictionMode::AllInCache;
  if (t == "oc" || t == "out-of-cache") return PredictionMode::AllOutOfCache;
  fail(ErrorKind::InvalidArgument,
       "mode must be blended, ic or oc, got '" + std::string(t) + "'");
}

double smooth(double r) noexcept {
  return r >= 0 ? std::tanh(4.0 * r) : std::tanh(2.0 * r);
}

double relative_distance(std::int64_t d, std::int64_t c) {
  if (c <= 0) fail(ErrorKind::InvalidArgument, "cache size must be positive");
  return static_cast<double>(c - d) / static_cast<double>(c);
}

double call_alpha(std::span<const OperandLoad> operands, std::int64_t c) {
  if (operands.empty()) fail(ErrorKind::NoOperands, "alpha of a call without operands");
  double num = 0;
  double den = 0;
  for (const auto& op : operands) {
    if (op.s <= 0) fail(ErrorKind::InvalidArgument, "operand sizes must be positive");
    num += smooth(relative_distance(op.d, c)) * static_cast<double>(op.s);
    den += static_cast<double>(op.s);
  }
  return num / den;
}

double blend(double t_ic, double t_oc, double alpha) noexcept {
  return (1.0 + alpha) / 2.0 * t_ic + (1.0 - alpha) / 2.0 * t_oc;
}

Prediction predict_trace(const Trace& trace, ModelSource& models,
                         const MachineProfile& profile, PredictionMode mode) {
  profile.validate();
  const std::int64_t c = profile.largest_cache_bytes;
  Prediction out;
  out.mode = mode;
  out.calls.reserve(trace.size());
  for (std::size_t i = 0; i < trace.size(); ++i) {
    const KernelCall& call = trace[i];
    CallPrediction cp;
    cp.index = i;
    try {
      cp.t_ic = models.estimate(call.kernel, call.variant, CacheCondition::InCache, call.sizes);
      cp.t_oc = models.estimate(call.kernel, call.variant, CacheCondition::OutOfCache, call.sizes);
    } catch (const Error& e) {
      throw Error(e.kind(), std::string(e.what()) + " [call " + std::to_string(i) + ": " +
                                call.kernel + "]");
    }
    switch (mode) {
      case PredictionMode::AllInCache:
        cp.alpha = 1;
        cp.t = cp.t_ic;
        break;
      case PredictionMode::AllOutOfCache:
        cp.alpha = -1;
        cp.t = cp.t_oc;
        break;
      case PredictionMode::Blended: {
        std::vector<OperandLoad> loads;
        for (std::size_t k = 0; k < call.operands.size(); ++k) {
          const AccessDistance ad = access_distance(trace, i, k, c);
          OperandPrediction op;
          op.d = ad.bytes;
          op.s = call.operands[k].region.measure();
          op.r = relative_distance(op.d, c);
          op.f = smooth(op.r);
          op.terminated_by = ad.terminated_by;
          cp.operands.push_back(op);
          loads.push_back({op.d, op.s});
        }
        try {
          cp.alpha = call_alpha(loads, c);
        } catch (const Error& e) {
          throw Error(e.kind(), std::string(e.what()) + " [call " + std::to_string(i) + "]");
        }
        cp.t = blend(cp.t_ic, cp.t_oc, cp.alpha);
        break;
      }
    }
    out.total += cp.t;
    out.total_ic += cp.t_ic;
    out.total_oc += cp.t_oc;
    out.calls.push_back(std::move(cp));
  }
  return out;
}

void write_prediction_csv(std::ostream& out, const Trace& trace, const Prediction& p) {
  out << "index,kernel,sizes,d,alpha,t_ic,t_oc,t\n";
  for (const CallPrediction& c : p.calls) {
    const KernelCall& call = trace[c.index];
    out << c.index << ',' << call.kernel << ',';
    for (std::size_t k = 0; k < call.sizes.size(); ++k) out << (k ? ";" : "") << call.sizes[k];
    out << ',';
    for (std::size_t k = 0; k < c.operands.size(); ++k) out << (k ? ";" : "") << c.operands[k].d;
    out << ',' << format_number(c.alpha) << ',' << format_number(c.t_ic) << ','
        << format_number(c.t_oc) << ',' << format_number(c.t) << '\n';
  }
  out << "total,,,,," << format_number(p.total_ic) << ',' << format_number(p.total_oc) << ','
      << format_number(p.total) << '\n';
}

}  // namespace dlaperf
