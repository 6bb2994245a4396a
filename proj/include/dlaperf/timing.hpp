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

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dlaperf/kernelspec.hpp"

namespace dlaperf {

/// The two extreme cache preconditions a kernel is timed under.
enum class CacheCondition { InCache, OutOfCache };

/// "ic" / "oc".
std::string_view to_string(CacheCondition c) noexcept;
CacheCondition parse_condition(std::string_view text);

struct MachineProfile {
  /// Only the largest cache level is tracked.
  std::int64_t largest_cache_bytes = 6 * 1024 * 1024;
  double flops_per_cycle = 8.0;
  std::int64_t element_bytes = 8;

  void validate() const;
  friend bool operator==(const MachineProfile&, const MachineProfile&) = default;
};

struct Sample {
  std::vector<std::int64_t> point;
  int repetitions = 0;
  std::vector<double> cycles_per_rep;
  double median_cycles = 0;
  /// Set for in-cache requests whose operands cannot all fit the cache; the
  /// point is still measured.
  bool footprint_exceeds_cache = false;
};

/// Exact median; for even lengths the mean of the two middle elements.
double median(std::span<const double> values);

/// Plugin contract: (variant, condition, sizes, reps) -> cycles per rep.
class Backend {
 public:
  virtual ~Backend() = default;
  virtual std::string id() const = 0;
  virtual std::vector<double> time(const KernelSignature& sig,
                                   const VariantKey& variant,
                                   std::span<const std::int64_t> sizes,
                                   CacheCondition condition, int reps) = 0;
  /// Size of the cache the backend's in-cache precondition targets; zero if
  /// the backend has no such notion.
  virtual std::int64_t cache_bytes() const { return 0; }
};

/// Holds the process-wide measurement lock. A second concurrent session
/// throws ResourceError instead of blocking.
class MeasurementSession {
 public:
  MeasurementSession();
  ~MeasurementSession();
  MeasurementSession(const MeasurementSession&) = delete;
  MeasurementSession& operator=(const MeasurementSession&) = delete;

 private:
  std::unique_lock<std::mutex> lock_;
};

Sample measure(Backend& backend, const KernelSignature& sig,
               const VariantKey& variant, std::span<const std::int64_t> sizes,
               CacheCondition condition, int reps);

/// Pins the calling thread to one core (Linux only; throws ResourceError
/// elsewhere or on failure).
void pin_to_core(int core);

// --- synthetic backend ------------------------------------------------------

/// Noise-free cycle count of one kernel execution.
using CostFunction = std::function<double(
    const KernelSignature&, const VariantKey&, CacheCondition,
    std::span<const std::int64_t>)>;

/// Closed-form per-kernel cost used by the JSON-configured synthetic
/// backend:
///   oc = (per_call + sum(terms) + flops / flops_per_cycle) * prod(steps)
///   ic = in_cache_factor * oc
struct SyntheticKernelCost {
  struct Monomial {
    double coeff = 0;
    std::array<int, 3> powers{};
  };
  struct Step {
    std::size_t dim = 0;
    std::int64_t at = 0;
    double factor = 1;
  };

  double per_call = 0;
  std::vector<Monomial> terms;
  double flops_per_cycle = 0;  // 0 disables the flop term
  std::vector<Step> steps;
  double in_cache_factor = 1;

  double evaluate(const KernelSignature& sig, const VariantKey& variant,
                  CacheCondition condition,
                  std::span<const std::int64_t> sizes) const;
};

struct SyntheticSpec {
  SyntheticKernelCost fallback;
  std::map<std::string, SyntheticKernelCost> kernels;
  /// Keyed by "<kernel>/<variant string>".
  std::map<std::string, SyntheticKernelCost> variants;
  double noise = 0;
  std::uint64_t seed = 0;

  /// Parses the "synthetic" backend block of a config file.
  static SyntheticSpec from_json(std::string_view text,
                                 const KernelRegistry& registry);
  CostFunction cost_function() const;
};

/// Analytic stand-in for hardware: returns cost * (1 + u) with u uniform in
/// [-noise, +noise], bit-reproducible for a fixed seed.
class SyntheticBackend : public Backend {
 public:
  SyntheticBackend(CostFunction cost, double noise, std::uint64_t seed);
  explicit SyntheticBackend(const SyntheticSpec& spec);

  std::string id() const override;
  std::vector<double> time(const KernelSignature& sig,
                           const VariantKey& variant,
                           std::span<const std::int64_t> sizes,
                           CacheCondition condition, int reps) override;

  double cost(const KernelSignature& sig, const VariantKey& variant,
              CacheCondition condition,
              std::span<const std::int64_t> sizes) const;
  void reseed(std::uint64_t seed);

 private:
  double next_unit();

  CostFunction cost_;
  double noise_;
  std::uint64_t seed_;
  std::mt19937_64 rng_;
};

}  // namespace dlaperf
