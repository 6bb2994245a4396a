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
#include <string>
#include <string_view>
#include <vector>

#include "dlaperf/kernelspec.hpp"
#include "dlaperf/timing.hpp"
#include "dlaperf/trace.hpp"

namespace dlaperf {

/// Algorithm ids: qr_blocked, chol_alg1, chol_alg2, dpotrf, chol_alg3,
/// chol_recursive. dgeqrf and chol_alg2_dpotrf are accepted as aliases.
struct AlgorithmSpec {
  std::string algorithm;
  std::int64_t m = 0;
  std::int64_t n = 0;
  std::int64_t b = 0;  // 0 selects the algorithm's default
};

const std::vector<std::string>& algorithm_ids();
const std::vector<std::string>& cholesky_ids();
/// Resolves aliases; throws InvalidSpec for unknown names.
std::string canonical_algorithm(std::string_view name);
bool is_cholesky(std::string_view algorithm);
/// 24 for chol_recursive, 256 for the blocked Cholesky variants, 32 for QR.
std::int64_t default_block_size(std::string_view algorithm);

/// Blocked Householder QR of an m x n matrix (m >= n). Layout: A (m x n,
/// ld m) at offset 0, tau (min(m,n)) after it, workspace W (n x b, ld n)
/// after tau when b < n.
Trace qr_trace(std::int64_t m, std::int64_t n, std::int64_t b,
               const KernelRegistry& registry = KernelRegistry::builtin());

/// Lower Cholesky of an n x n matrix (ld n) at offset 0.
Trace chol_trace(std::string_view variant, std::int64_t n, std::int64_t b,
                 const KernelRegistry& registry = KernelRegistry::builtin());

Trace make_trace(const AlgorithmSpec& spec,
                 const KernelRegistry& registry = KernelRegistry::builtin());

/// Sum of the kernel flop formulas over the trace.
double trace_flops(const Trace& trace,
                   const KernelRegistry& registry = KernelRegistry::builtin());

/// flops / (cycles * flops_per_cycle).
double efficiency(double cycles, double flops, const MachineProfile& profile);

}  // namespace dlaperf
