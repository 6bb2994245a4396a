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
#include <string>
#include <vector>

#include "dlaperf/algorithms.hpp"
#include "dlaperf/modelstore.hpp"
#include "dlaperf/predictor.hpp"

namespace dlaperf {

struct BlockRange {
  std::int64_t lo = 8;
  std::int64_t hi = 8;
  std::int64_t step = 8;

  std::vector<std::int64_t> values() const;
  /// "LO:HI:STEP" or "LO:HI" (step 8) or a single value.
  static BlockRange parse(std::string_view text);
};

struct CurvePoint {
  std::int64_t b = 0;
  double cycles = 0;
};

struct TuneResult {
  std::int64_t best_b = 0;
  double best_cycles = 0;
  std::vector<CurvePoint> curve;
};

/// Exhaustive sweep; ties go to the smaller b.
TuneResult tune_blocksize(const std::string& algorithm, std::int64_t m,
                          std::int64_t n, const BlockRange& range,
                          ModelSource& models, const MachineProfile& profile,
                          PredictionMode mode = PredictionMode::Blended);

/// True iff result.best_cycles is <= every curve value, the curve value at
/// best_b equals best_cycles, and no smaller b attains it.
bool verify_argmin(const TuneResult& result);

struct RankEntry {
  AlgorithmSpec spec;
  double cycles = 0;
  double flops = 0;
  double efficiency = 0;
};

/// Ascending by predicted cycles; equal cycles keep the input order.
std::vector<RankEntry> rank_algorithms(const std::vector<AlgorithmSpec>& specs,
                                       ModelSource& models,
                                       const MachineProfile& profile,
                                       PredictionMode mode = PredictionMode::Blended);

/// b,cycles
void write_curve_csv(std::ostream& out, std::span<const CurvePoint> curve);
/// algorithm,cycles,efficiency
void write_ranking_csv(std::ostream& out, std::span<const RankEntry> ranking);

}  // namespace dlaperf
