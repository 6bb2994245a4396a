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

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "dlaperf/kernelspec.hpp"
#include "dlaperf/regionset.hpp"

namespace dlaperf {

struct CallOperand {
  std::string name;   // signature operand name (A, B, C, x, ...)
  std::string label;  // what the algorithm passes in (A11, W2, tau1, ...)
  RegionSet region;
  /// Storage of the operand: first byte and leading dimension (elements;
  /// the increment for vectors). Zero when the trace was built from raw
  /// regions.
  std::int64_t offset = 0;
  std::int64_t ld = 0;

  friend bool operator==(const CallOperand&, const CallOperand&) = default;
};

/// One kernel invocation with concrete operand regions.
struct KernelCall {
  std::string kernel;
  VariantKey variant;
  /// Every flag the call was issued with, including excluded ones.
  std::map<std::string, std::string> flags;
  std::vector<std::int64_t> sizes;
  std::vector<CallOperand> operands;

  RegionSet region() const;
  /// Index of the operand with this signature name or label.
  std::size_t operand_index(std::string_view name) const;

  friend bool operator==(const KernelCall&, const KernelCall&) = default;
};

/// Ordered calls of one algorithm execution. The footprint is the union of
/// every operand region seen so far.
class Trace {
 public:
  Trace() = default;
  explicit Trace(std::string algorithm) : algorithm_(std::move(algorithm)) {}

  void add(KernelCall call);

  const std::string& algorithm() const noexcept { return algorithm_; }
  const std::vector<KernelCall>& calls() const noexcept { return calls_; }
  std::size_t size() const noexcept { return calls_.size(); }
  const KernelCall& operator[](std::size_t i) const { return calls_[i]; }

  /// Union of the operand regions of call i.
  const RegionSet& call_region(std::size_t i) const { return call_regions_[i]; }
  const RegionSet& footprint() const noexcept { return footprint_; }
  std::int64_t total_footprint() const noexcept { return footprint_.measure(); }

 private:
  std::string algorithm_;
  std::vector<KernelCall> calls_;
  std::vector<RegionSet> call_regions_;
  RegionSet footprint_;
};

enum class Termination { FoundOperand, ExceededCache, TraceStart };
std::string_view to_string(Termination t) noexcept;

struct AccessDistance {
  std::int64_t bytes = 0;
  Termination terminated_by = Termination::TraceStart;
  /// Call at which the operand was fully found (FoundOperand only).
  std::size_t found_at = 0;
  /// The accumulated region set M.
  RegionSet regions;
};

/// Backward scan from call_index - 1. Every scanned call contributes all of
/// its operand regions to M. The scan stops once the scanned calls cover
/// the operand's region, once measure(M) > cache_bytes, or at the start of
/// the trace, where the whole footprint is united into M.
AccessDistance access_distance(const Trace& trace, std::size_t call_index,
                               std::size_t operand, std::int64_t cache_bytes);
AccessDistance access_distance(const Trace& trace, std::size_t call_index,
                               std::string_view operand,
                               std::int64_t cache_bytes);

/// How the simulated cache is populated before the prefix is replayed.
enum class LruWarmup {
  /// Empty cache at the start of the trace.
  Cold,
  /// The whole trace ran once before (the algorithm's data has been touched,
  /// as the artificial start region assumes).
  RepeatedExecution,
};

/// Fully associative LRU cache of floor(cache_bytes / line_bytes) lines.
/// Each call touches every line of the union of its operand regions in
/// ascending address order. Returns whether all lines of the operand are
/// resident right before call_index executes.
bool lru_oracle(const Trace& trace, std::size_t call_index, std::size_t operand,
                std::int64_t cache_bytes, std::int64_t line_bytes = 64,
                LruWarmup warmup = LruWarmup::RepeatedExecution);

/// lru_oracle for every (call, operand) of the trace in one simulation.
std::vector<std::vector<bool>> lru_residency(
    const Trace& trace, std::int64_t cache_bytes, std::int64_t line_bytes = 64,
    LruWarmup warmup = LruWarmup::RepeatedExecution);

/// Line-delimited JSON, one record per call:
/// {"index","kernel","variant","flags","sizes","operands":[{"name","label",
/// "regions":[[offset,length],...]}]}
void write_trace(std::ostream& out, const Trace& trace);
/// Reads write_trace output; the footprint is recomputed from the records.
Trace read_trace(std::istream& in, const KernelRegistry& registry);

}  // namespace dlaperf
