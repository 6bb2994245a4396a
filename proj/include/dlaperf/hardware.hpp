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
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "dlaperf/kernelspec.hpp"
#include "dlaperf/timing.hpp"
#include "dlaperf/trace.hpp"

namespace dlaperf {

/// Column-major storage for one operand. Owns `data` unless `view` points
/// into memory shared with other operands (trace execution).
struct OperandBuffer {
  std::vector<double> data;
  std::int64_t rows = 0;
  std::int64_t cols = 0;
  std::int64_t ld = 1;
  double* view = nullptr;

  double* ptr() noexcept { return view ? view : data.data(); }
};

/// Executes one kernel call on prepared buffers. Implementations resolve
/// excluded flags missing from the key to their first allowed value and scalars to
/// representative_value().
class KernelExecutor {
 public:
  virtual ~KernelExecutor() = default;
  virtual std::string id() const = 0;
  virtual void run(const KernelSignature& sig, const VariantKey& variant,
                   std::span<const std::int64_t> sizes,
                   std::span<OperandBuffer> operands) = 0;
};

/// Plain loop nests for every shipped kernel.
std::unique_ptr<KernelExecutor> make_reference_executor();

/// Loads a shared library exposing the Fortran BLAS/LAPACK ABI
/// (dgemm_, dtrsm_, ...). DLAPERF_BLAS_LIBRARY overrides `path`.
struct ExternalLibraryConfig {
  std::string path;
  /// kernel id -> symbol name; defaults to "<id>_".
  std::map<std::string, std::string> symbols;
};
std::unique_ptr<KernelExecutor> make_external_executor(
    const ExternalLibraryConfig& config);

/// Cycles per second of the timestamp counter, measured against the
/// monotonic clock (1e9 where no counter is available).
double calibrate_cycles_per_second();

/// Times real executions. In-cache: two untimed warm-up runs, then the timed
/// repetitions back to back. Out-of-cache: an eviction buffer of twice the
/// largest cache is streamed before every timed repetition.
class HardwareBackend : public Backend {
 public:
  HardwareBackend(std::unique_ptr<KernelExecutor> executor,
                  MachineProfile profile, double cycles_per_second = 0);

  std::string id() const override;
  std::vector<double> time(const KernelSignature& sig,
                           const VariantKey& variant,
                           std::span<const std::int64_t> sizes,
                           CacheCondition condition, int reps) override;
  std::int64_t cache_bytes() const override {
    return profile_.largest_cache_bytes;
  }

  std::int64_t eviction_bytes() const noexcept {
    return static_cast<std::int64_t>(evict_.size() * sizeof(double));
  }
  double cycles_per_second() const noexcept { return cycles_per_second_; }

 private:
  void evict();

  std::unique_ptr<KernelExecutor> executor_;
  MachineProfile profile_;
  double cycles_per_second_;
  std::vector<double> evict_;
  double sink_ = 0;
};

/// Allocates and fills operand buffers for one call. Triangular and SPD
/// inputs are set to the identity so repeated in-place execution stays
/// numerically stable.
std::vector<OperandBuffer> allocate_operands(const KernelSignature& sig,
                                             const VariantKey& variant,
                                             std::span<const std::int64_t> sizes);

/// Executes every call of a generated trace in order on `memory`, which holds
/// the trace's whole address space (element i at byte offset 8i). Returns the
/// wall time in seconds.
double run_trace(const Trace& trace, KernelExecutor& executor,
                 std::span<double> memory,
                 const KernelRegistry& registry = KernelRegistry::builtin());

}  // namespace dlaperf
