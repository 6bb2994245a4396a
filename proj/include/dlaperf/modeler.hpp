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
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dlaperf/kernelspec.hpp"
#include "dlaperf/timing.hpp"

namespace dlaperf {

enum class GridKind { GaussianPoints, Regular, BoundaryRefined };
enum class ErrorMetric { MaxRelative, MedianRelative, AvgRelative };

std::string_view to_string(GridKind k) noexcept;
std::string_view to_string(ErrorMetric m) noexcept;
GridKind parse_grid_kind(std::string_view text);
ErrorMetric parse_error_metric(std::string_view text);

struct RefinementConfig {
  std::int64_t min_width = 8;
  GridKind grid_kind = GridKind::GaussianPoints;
  double target_error = 0.05;
  std::int64_t min_box_side = 32;
  int degree = 3;
  int oversample = 1;
  ErrorMetric error_metric = ErrorMetric::MaxRelative;
  int max_depth = 8;
  /// Timed repetitions per grid point (median taken).
  int repetitions = 15;

  int points_per_dim() const noexcept { return degree + 1 + oversample; }
  void validate() const;
  friend bool operator==(const RefinementConfig&, const RefinementConfig&) = default;
};

/// Closed integer box [lo_d, hi_d] per dimension.
struct Box {
  std::vector<std::int64_t> lo;
  std::vector<std::int64_t> hi;

  std::size_t dims() const noexcept { return lo.size(); }
  std::int64_t side(std::size_t d) const { return hi[d] - lo[d]; }
  bool contains(std::span<const std::int64_t> point) const;
  bool contains(const Box& other) const;
  std::string str() const;

  friend bool operator==(const Box&, const Box&) = default;
};

/// Tensor-product polynomial over one box. Coordinates are mapped affinely
/// to [-1, 1]; coefficient of prod_d x_d^e_d sits at sum_d e_d (degree+1)^d.
struct PolyPatch {
  Box box;
  int degree = 0;
  std::vector<double> coeffs;
  double fit_error = 0;
  std::int64_t sample_count = 0;

  double evaluate(std::span<const double> point) const;
  double evaluate(std::span<const std::int64_t> point) const;

  friend bool operator==(const PolyPatch&, const PolyPatch&) = default;
};

/// Abscissae in [0, 1]: (1 - cos(k pi / (p-1))) / 2 for GaussianPoints,
/// k / (p-1) for Regular, and smoothstep of the regular points for
/// BoundaryRefined.
std::vector<double> grid_abscissae(GridKind kind, int points);

/// One axis of the grid mapped onto [lo, hi]. With min_width > 0 each
/// coordinate is rounded to the nearest multiple of min_width and clamped
/// into [lo, hi]; duplicates are dropped. min_width == 0 keeps them exact.
std::vector<double> grid_axis(double lo, double hi, int points,
                              std::int64_t min_width,
                              GridKind kind = GridKind::GaussianPoints);

/// Cartesian product of grid_axis over every dimension (dimension 0 varies
/// fastest). Throws DegenerateBox if a side is shorter than min_width.
std::vector<std::vector<std::int64_t>> gaussian_grid(
    const Box& box, int points_per_dim, std::int64_t min_width,
    GridKind kind = GridKind::GaussianPoints);

struct SamplePoint {
  std::vector<std::int64_t> point;
  double cycles = 0;
};

/// Relative error |p - y| / |y| (|y| = 0 uses an absolute error).
std::vector<double> relative_errors(const PolyPatch& patch,
                                    std::span<const SamplePoint> samples);
double aggregate_error(std::span<const double> errors, ErrorMetric metric);

/// Least-squares fit of a degree-`cfg.degree` tensor polynomial. Throws
/// FitError when the system is rank deficient.
PolyPatch fit_patch(std::span<const SamplePoint> samples, const Box& box,
                    const RefinementConfig& cfg);

/// Splits at per-dimension midpoints (rounded to min_width, ties toward lo).
/// Empty when any resulting side would fall below min_box_side.
std::vector<Box> split_box(const Box& box, const RefinementConfig& cfg);

/// Returns the median cycles at one point; must include `reps` timings.
using Sampler = std::function<double(std::span<const std::int64_t> point)>;

struct RefinementResult {
  std::vector<PolyPatch> patches;
  /// Timed repetitions spent: sum over visited boxes of reps * grid points.
  std::int64_t total_samples = 0;
  std::int64_t boxes_visited = 0;
};

RefinementResult refine(const std::vector<Box>& domain,
                        const RefinementConfig& cfg, const Sampler& sampler);

/// Measures through `backend` for one (kernel, variant, condition).
RefinementResult refine(Backend& backend, const KernelSignature& sig,
                        const VariantKey& variant, CacheCondition condition,
                        const std::vector<Box>& domain,
                        const RefinementConfig& cfg);

/// Patches over a set of domain boxes with the ownership rule: a point
/// belongs to a patch if lo <= x < hi in every dimension, where x == hi
/// also counts when hi is the upper bound of the enclosing domain box.
class PiecewisePolynomial {
 public:
  PiecewisePolynomial() = default;
  PiecewisePolynomial(std::vector<Box> domain, std::vector<PolyPatch> patches);

  const std::vector<Box>& domain() const noexcept { return domain_; }
  const std::vector<PolyPatch>& patches() const noexcept { return patches_; }

  /// Owning patch, or nullptr outside the domain.
  const PolyPatch* find(std::span<const std::int64_t> point) const;
  /// Throws OutOfDomain (naming the domain boxes) outside the domain.
  double evaluate(std::span<const std::int64_t> point) const;

  friend bool operator==(const PiecewisePolynomial&, const PiecewisePolynomial&) = default;

 private:
  std::vector<Box> domain_;
  std::vector<PolyPatch> patches_;
  std::vector<std::size_t> owner_domain_;
};

struct AccuracyReport {
  double avg_error = 0;
  double max_error = 0;
  std::int64_t sample_count = 0;
};

using PointFunction = std::function<double(std::span<const std::int64_t>)>;

/// Relative errors of `model` against `oracle` at every domain point whose
/// coordinates are multiples of `stride`.
AccuracyReport accuracy_report(const PointFunction& model,
                               const PointFunction& oracle,
                               const std::vector<Box>& domain,
                               std::int64_t stride = 8);

struct SweepRow {
  std::string label;
  RefinementConfig config;
  std::int64_t total_samples = 0;
  std::size_t patches = 0;
  AccuracyReport accuracy;
};

/// Builds one model per config and scores it: the accuracy-vs-samples table.
std::vector<SweepRow> sweep_configs(
    const std::vector<std::pair<std::string, RefinementConfig>>& configs,
    const std::vector<Box>& domain, const Sampler& sampler,
    const PointFunction& oracle, std::int64_t stride = 8);

/// label,samples,patches,avg_error,max_error
void write_sweep_csv(std::ostream& out, std::span<const SweepRow> rows);

/// One row per patch: <dim>_lo,<dim>_hi,...,fit_error,samples
void write_partition_csv(std::ostream& out, std::span<const PolyPatch> patches,
                         std::span<const std::string> dim_names);

}  // namespace dlaperf
