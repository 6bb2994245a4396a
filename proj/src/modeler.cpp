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

#include "dlaperf/modeler.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <sstream>

#include "dlaperf/error.hpp"
#include "dlaperf/format.hpp"

namespace dlaperf {

std::string_view to_string(GridKind k) noexcept {
  switch (k) {
    case GridKind::GaussianPoints: return "gaussian";
    case GridKind::Regular: return "regular";
    case GridKind::BoundaryRefined: return "boundary";
  }
  return "?";
}

std::string_view to_string(ErrorMetric m) noexcept {
  switch (m) {
    case ErrorMetric::MaxRelative: return "max";
    case ErrorMetric::MedianRelative: return "median";
    case ErrorMetric::AvgRelative: return "avg";
  }
  return "?";
}

GridKind parse_grid_kind(std::string_view t) {
  if (t == "gaussian" || t == "GaussianPoints" || t == "chebyshev") {
    return GridKind::GaussianPoints;
  }
  if (t == "regular" || t == "Regular") return GridKind::Regular;
  if (t == "boundary" || t == "BoundaryRefined") return GridKind::BoundaryRefined;
  fail(ErrorKind::InvalidArgument, "unknown grid kind '" + std::string(t) + "'");
}

ErrorMetric parse_error_metric(std::string_view t) {
  if (t == "max" || t == "MaxRelative") return ErrorMetric::MaxRelative;
  if (t == "median" || t == "MedianRelative") return ErrorMetric::MedianRelative;
  if (t == "avg" || t == "AvgRelative") return ErrorMetric::AvgRelative;
  fail(ErrorKind::InvalidArgument, "unknown error metric '" + std::string(t) + "'");
}

void RefinementConfig::validate() const {
  auto bad = [](const std::string& m) { fail(ErrorKind::InvalidArgument, m); };
  if (min_width < 1) bad("min_width must be >= 1");
  if (!(target_error > 0 && target_error < 1)) bad("target_error must be in (0, 1)");
  if (degree < 1) bad("degree must be >= 1");
  if (oversample < 0) bad("oversample must be >= 0");
  if (min_box_side < min_width) bad("min_box_side must be >= min_width");
  if (max_depth < 0) bad("max_depth must be >= 0");
  if (repetitions < 1) bad("repetitions must be >= 1");
}

bool Box::contains(std::span<const std::int64_t> p) const {
  if (p.size() != dims()) return false;
  for (std::size_t d = 0; d < dims(); ++d) {
    if (p[d] < lo[d] || p[d] > hi[d]) return false;
  }
  return true;
}

bool Box::contains(const Box& o) const {
  if (o.dims() != dims()) return false;
  for (std::size_t d = 0; d < dims(); ++d) {
    if (o.lo[d] < lo[d] || o.hi[d] > hi[d]) return false;
  }
  return true;
}

std::string Box::str() const {
  std::string s;
  for (std::size_t d = 0; d < dims(); ++d) {
    if (d) s += " x ";
    s += "[" + std::to_string(lo[d]) + "," + std::to_string(hi[d]) + "]";
  }
  return s;
}

namespace {

double normalize(double x, std::int64_t lo, std::int64_t hi) {
  if (hi == lo) return 0.0;
  return 2.0 * (x - static_cast<double>(lo)) / static_cast<double>(hi - lo) - 1.0;
}

// Values of x^0..x^degree.
void powers(double x, int degree, double* out) {
  out[0] = 1.0;
  for (int e = 1; e <= degree; ++e) out[e] = out[e - 1] * x;
}

double evaluate_normalized(const PolyPatch& p, std::span<const double> x) {
  const std::size_t dims = p.box.dims();
  const int k = p.degree + 1;
  std::vector<double> pw(dims * static_cast<std::size_t>(k));
  for (std::size_t d = 0; d < dims; ++d) powers(x[d], p.degree, &pw[d * k]);
  double sum = 0;
  for (std::size_t c = 0; c < p.coeffs.size(); ++c) {
    double term = p.coeffs[c];
    std::size_t idx = c;
    for (std::size_t d = 0; d < dims; ++d) {
      term *= pw[d * k + idx % k];
      idx /= k;
    }
    sum += term;
  }
  return sum;
}

std::int64_t round_to_multiple(double x, std::int64_t w) {
  return static_cast<std::int64_t>(std::floor(x / static_cast<double>(w) + 0.5)) * w;
}

}  // namespace

double PolyPatch::evaluate(std::span<const double> point) const {
  if (point.size() != box.dims()) {
    fail(ErrorKind::InvalidArgument, "point has the wrong number of dimensions");
  }
  std::vector<double> x(point.size());
  for (std::size_t d = 0; d < x.size(); ++d) x[d] = normalize(point[d], box.lo[d], box.hi[d]);
  return evaluate_normalized(*this, x);
}

double PolyPatch::evaluate(std::span<const std::int64_t> point) const {
  std::vector<double> p(point.begin(), point.end());
  return evaluate(std::span<const double>(p));
}

std::vector<double> grid_abscissae(GridKind kind, int points) {
  if (points < 2) fail(ErrorKind::InvalidArgument, "a grid needs >= 2 points per dimension");
  std::vector<double> t(static_cast<std::size_t>(points));
  const double last = points - 1;
  for (int k = 0; k < points; ++k) {
    const double r = k / last;
    switch (kind) {
      case GridKind::GaussianPoints:
        t[k] = (1.0 - std::cos(k * std::numbers::pi / last)) / 2.0;
        break;
      case GridKind::Regular:
        t[k] = r;
        break;
      case GridKind::BoundaryRefined:
        t[k] = r * r * (3.0 - 2.0 * r);
        break;
    }
  }
  t.front() = 0.0;
  t.back() = 1.0;
  return t;
}

std::vector<double> grid_axis(double lo, double hi, int points,
                              std::int64_t min_width, GridKind kind) {
  if (min_width < 0) fail(ErrorKind::InvalidArgument, "min_width must be >= 0");
  if (hi < lo || (min_width > 0 && hi - lo < static_cast<double>(min_width))) {
    fail(ErrorKind::DegenerateBox,
         "side [" + format_number(lo) + "," + format_number(hi) +
             "] is shorter than the minimum width " + std::to_string(min_width));
  }
  std::vector<double> out;
  for (double t : grid_abscissae(kind, points)) {
    double x = lo + t * (hi - lo);
    if (min_width > 0) {
      x = static_cast<double>(round_to_multiple(x, min_width));
      x = std::clamp(x, lo, hi);
    }
    if (out.empty() || out.back() != x) out.push_back(x);
  }
  return out;
}

std::vector<std::vector<std::int64_t>> gaussian_grid(const Box& box,
                                                     int points_per_dim,
                                                     std::int64_t min_width,
                                                     GridKind kind) {
  std::vector<std::vector<std::int64_t>> axes;
  for (std::size_t d = 0; d < box.dims(); ++d) {
    std::vector<std::int64_t> axis;
    for (double x : grid_axis(static_cast<double>(box.lo[d]),
                              static_cast<double>(box.hi[d]), points_per_dim,
                              min_width, kind)) {
      const auto v = static_cast<std::int64_t>(std::llround(x));
      if (axis.empty() || axis.back() != v) axis.push_back(v);
    }
    axes.push_back(std::move(axis));
  }
  std::vector<std::vector<std::int64_t>> out;
  if (axes.empty()) return out;
  std::vector<std::size_t> idx(axes.size(), 0);
  while (true) {
    std::vector<std::int64_t> p(axes.size());
    for (std::size_t d = 0; d < axes.size(); ++d) p[d] = axes[d][idx[d]];
    out.push_back(std::move(p));
    std::size_t d = 0;
    while (d < axes.size() && ++idx[d] == axes[d].size()) idx[d++] = 0;
    if (d == axes.size()) break;
  }
  return out;
}

std::vector<double> relative_errors(const PolyPatch& patch,
                                    std::span<const SamplePoint> samples) {
  std::vector<double> errs;
  errs.reserve(samples.size());
  for (const auto& s : samples) {
    const double p = patch.evaluate(std::span<const std::int64_t>(s.point));
    const double denom = s.cycles != 0 ? std::fabs(s.cycles) : 1.0;
    errs.push_back(std::fabs(p - s.cycles) / denom);
  }
  return errs;
}

double aggregate_error(std::span<const double> errors, ErrorMetric metric) {
  if (errors.empty()) return 0.0;
  switch (metric) {
    case ErrorMetric::MaxRelative:
      return *std::max_element(errors.begin(), errors.end());
    case ErrorMetric::MedianRelative:
      return median(errors);
    case ErrorMetric::AvgRelative: {
      double s = 0;
      for (double e : errors) s += e;
      return s / static_cast<double>(errors.size());
    }
  }
  return 0.0;
}

PolyPatch fit_patch(std::span<const SamplePoint> samples, const Box& box,
                    const RefinementConfig& cfg) {
  const std::size_t dims = box.dims();
  const int k = cfg.degree + 1;
  std::size_t ncoef = 1;
  for (std::size_t d = 0; d < dims; ++d) ncoef *= static_cast<std::size_t>(k);
  if (samples.size() < ncoef) {
    fail(ErrorKind::FitError, "box " + box.str() + ": " + std::to_string(samples.size()) +
                                  " samples for " + std::to_string(ncoef) + " coefficients");
  }

  Eigen::MatrixXd V(static_cast<Eigen::Index>(samples.size()),
                    static_cast<Eigen::Index>(ncoef));
  Eigen::VectorXd y(static_cast<Eigen::Index>(samples.size()));
  std::vector<double> pw(dims * static_cast<std::size_t>(k));
  for (std::size_t r = 0; r < samples.size(); ++r) {
    const auto& s = samples[r];
    if (s.point.size() != dims) {
      fail(ErrorKind::FitError, "sample dimension does not match the box");
    }
    for (std::size_t d = 0; d < dims; ++d) {
      powers(normalize(static_cast<double>(s.point[d]), box.lo[d], box.hi[d]),
             cfg.degree, &pw[d * k]);
    }
    for (std::size_t c = 0; c < ncoef; ++c) {
      double v = 1.0;
      std::size_t idx = c;
      for (std::size_t d = 0; d < dims; ++d) {
        v *= pw[d * k + idx % k];
        idx /= k;
      }
      V(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = v;
    }
    y(static_cast<Eigen::Index>(r)) = s.cycles;
  }

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(V);
  if (qr.rank() < static_cast<Eigen::Index>(ncoef)) {
    fail(ErrorKind::FitError, "box " + box.str() + ": rank-deficient sample grid (rank " +
                                  std::to_string(qr.rank()) + " < " +
                                  std::to_string(ncoef) + ")");
  }
  const Eigen::VectorXd c = qr.solve(y);

  PolyPatch patch;
  patch.box = box;
  patch.degree = cfg.degree;
  patch.coeffs.assign(c.data(), c.data() + c.size());
  patch.sample_count = static_cast<std::int64_t>(samples.size());
  const auto errs = relative_errors(patch, samples);
  patch.fit_error = aggregate_error(errs, cfg.error_metric);
  return patch;
}

std::vector<Box> split_box(const Box& box, const RefinementConfig& cfg) {
  const std::size_t dims = box.dims();
  std::vector<std::int64_t> mid(dims);
  for (std::size_t d = 0; d < dims; ++d) {
    const double m = (static_cast<double>(box.lo[d]) + static_cast<double>(box.hi[d])) / 2.0;
    const double w = static_cast<double>(cfg.min_width);
    const auto below = static_cast<std::int64_t>(std::floor(m / w)) * cfg.min_width;
    const std::int64_t above = below + cfg.min_width;
    mid[d] = (m - static_cast<double>(below) <= static_cast<double>(above) - m) ? below : above;
    if (mid[d] - box.lo[d] < cfg.min_box_side || box.hi[d] - mid[d] < cfg.min_box_side) {
      return {};
    }
  }
  std::vector<Box> children;
  for (std::size_t mask = 0; mask < (std::size_t{1} << dims); ++mask) {
    Box c = box;
    for (std::size_t d = 0; d < dims; ++d) {
      if (mask & (std::size_t{1} << d)) {
        c.lo[d] = mid[d];
      } else {
        c.hi[d] = mid[d];
      }
    }
    children.push_back(std::move(c));
  }
  return children;
}

namespace {

void check_domain(const std::vector<Box>& domain) {
  if (domain.empty()) fail(ErrorKind::InvalidArgument, "empty model domain");
  for (std::size_t i = 0; i < domain.size(); ++i) {
    const Box& b = domain[i];
    if (b.dims() == 0 || b.lo.size() != b.hi.size() || b.dims() != domain[0].dims()) {
      fail(ErrorKind::InvalidArgument, "domain boxes must share one positive dimension");
    }
    for (std::size_t d = 0; d < b.dims(); ++d) {
      if (b.lo[d] > b.hi[d]) fail(ErrorKind::DegenerateBox, "box " + b.str() + " has lo > hi");
    }
    for (std::size_t j = 0; j < i; ++j) {
      bool overlap = true;
      for (std::size_t d = 0; d < b.dims(); ++d) {
        if (b.hi[d] <= domain[j].lo[d] || domain[j].hi[d] <= b.lo[d]) overlap = false;
      }
      if (overlap) {
        fail(ErrorKind::InvalidArgument,
             "domain boxes " + domain[j].str() + " and " + b.str() + " overlap");
      }
    }
  }
}

void refine_box(const Box& box, int depth, const RefinementConfig& cfg,
                const Sampler& sampler, RefinementResult& out) {
  const auto grid = gaussian_grid(box, cfg.points_per_dim(), cfg.min_width, cfg.grid_kind);
  std::vector<SamplePoint> samples;
  samples.reserve(grid.size());
  for (const auto& p : grid) samples.push_back({p, sampler(p)});
  const std::int64_t spent = static_cast<std::int64_t>(grid.size()) * cfg.repetitions;
  out.total_samples += spent;
  ++out.boxes_visited;

  PolyPatch patch = fit_patch(samples, box, cfg);
  patch.sample_count = spent;
  if (patch.fit_error > cfg.target_error && depth < cfg.max_depth) {
    const auto children = split_box(box, cfg);
    if (!children.empty()) {
      for (const Box& c : children) refine_box(c, depth + 1, cfg, sampler, out);
      return;
    }
  }
  out.patches.push_back(std::move(patch));
}

}  // namespace

RefinementResult refine(const std::vector<Box>& domain,
                        const RefinementConfig& cfg, const Sampler& sampler) {
  cfg.validate();
  check_domain(domain);
  RefinementResult out;
  for (const Box& b : domain) refine_box(b, 0, cfg, sampler, out);
  return out;
}

RefinementResult refine(Backend& backend, const KernelSignature& sig,
                        const VariantKey& variant, CacheCondition condition,
                        const std::vector<Box>& domain,
                        const RefinementConfig& cfg) {
  for (const Box& b : domain) {
    if (b.dims() != sig.dims()) {
      fail(ErrorKind::InvalidArgument, sig.id + " has " + std::to_string(sig.dims()) +
                                           " size arguments but the domain box " +
                                           b.str() + " does not");
    }
  }
  return refine(domain, cfg, [&](std::span<const std::int64_t> p) {
    return measure(backend, sig, variant, p, condition, cfg.repetitions).median_cycles;
  });
}

PiecewisePolynomial::PiecewisePolynomial(std::vector<Box> domain,
                                         std::vector<PolyPatch> patches)
    : domain_(std::move(domain)), patches_(std::move(patches)) {
  owner_domain_.reserve(patches_.size());
  for (const PolyPatch& p : patches_) {
    std::size_t owner = domain_.size();
    for (std::size_t i = 0; i < domain_.size(); ++i) {
      if (domain_[i].contains(p.box)) {
        owner = i;
        break;
      }
    }
    if (owner == domain_.size()) {
      fail(ErrorKind::InvalidArgument, "patch " + p.box.str() + " lies outside the domain");
    }
    owner_domain_.push_back(owner);
  }
}

const PolyPatch* PiecewisePolynomial::find(std::span<const std::int64_t> x) const {
  for (std::size_t i = 0; i < patches_.size(); ++i) {
    const Box& b = patches_[i].box;
    const Box& dom = domain_[owner_domain_[i]];
    if (x.size() != b.dims()) return nullptr;
    bool inside = true;
    for (std::size_t d = 0; d < b.dims() && inside; ++d) {
      inside = x[d] >= b.lo[d] &&
               (x[d] < b.hi[d] || (x[d] == b.hi[d] && b.hi[d] == dom.hi[d]));
    }
    if (inside) return &patches_[i];
  }
  return nullptr;
}

double PiecewisePolynomial::evaluate(std::span<const std::int64_t> x) const {
  const PolyPatch* p = find(x);
  if (!p) {
    std::string where;
    for (std::size_t d = 0; d < x.size(); ++d) {
      where += (d ? "," : "") + std::to_string(x[d]);
    }
    std::string dom;
    for (const Box& b : domain_) dom += (dom.empty() ? "" : ", ") + b.str();
    fail(ErrorKind::OutOfDomain, "point (" + where + ") is outside the model domain " + dom);
  }
  return std::max(0.0, p->evaluate(x));
}

AccuracyReport accuracy_report(const PointFunction& model,
                               const PointFunction& oracle,
                               const std::vector<Box>& domain,
                               std::int64_t stride) {
  if (stride < 1) fail(ErrorKind::InvalidArgument, "stride must be >= 1");
  AccuracyReport r;
  double sum = 0;
  for (const Box& b : domain) {
    std::vector<std::int64_t> first(b.dims()), p(b.dims());
    bool empty = false;
    for (std::size_t d = 0; d < b.dims(); ++d) {
      first[d] = (b.lo[d] + stride - 1) / stride * stride;
      if (first[d] > b.hi[d]) empty = true;
    }
    if (empty) continue;
    p = first;
    while (true) {
      bool owned = true;
      // Points on a shared face belong to the earlier domain box only.
      for (const Box& prev : domain) {
        if (&prev == &b) break;
        if (prev.contains(p)) owned = false;
      }
      if (owned) {
        const double truth = oracle(p);
        const double est = model(p);
        const double e = std::fabs(est - truth) / (truth != 0 ? std::fabs(truth) : 1.0);
        sum += e;
        r.max_error = std::max(r.max_error, e);
        ++r.sample_count;
      }
      std::size_t d = 0;
      while (d < b.dims()) {
        p[d] += stride;
        if (p[d] <= b.hi[d]) break;
        p[d] = first[d];
        ++d;
      }
      if (d == b.dims()) break;
    }
  }
  if (r.sample_count > 0) r.avg_error = sum / static_cast<double>(r.sample_count);
  return r;
}

std::vector<SweepRow> sweep_configs(
    const std::vector<std::pair<std::string, RefinementConfig>>& configs,
    const std::vector<Box>& domain, const Sampler& sampler,
    const PointFunction& oracle, std::int64_t stride) {
  std::vector<SweepRow> rows;
  for (const auto& [label, cfg] : configs) {
    RefinementResult res = refine(domain, cfg, sampler);
    SweepRow row;
    row.label = label;
    row.config = cfg;
    row.total_samples = res.total_samples;
    row.patches = res.patches.size();
    const PiecewisePolynomial model(domain, std::move(res.patches));
    row.accuracy = accuracy_report(
        [&](std::span<const std::int64_t> p) { return model.evaluate(p); }, oracle,
        domain, stride);
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_sweep_csv(std::ostream& out, std::span<const SweepRow> rows) {
  out << "label,samples,patches,avg_error,max_error\n";
  for (const auto& r : rows) {
    out << r.label << ',' << r.total_samples << ',' << r.patches << ','
        << format_number(r.accuracy.avg_error) << ','
        << format_number(r.accuracy.max_error) << '\n';
  }
}

void write_partition_csv(std::ostream& out, std::span<const PolyPatch> patches,
                         std::span<const std::string> dim_names) {
  for (const auto& n : dim_names) out << n << "_lo," << n << "_hi,";
  out << "fit_error,samples\n";
  for (const auto& p : patches) {
    for (std::size_t d = 0; d < p.box.dims(); ++d) {
      out << p.box.lo[d] << ',' << p.box.hi[d] << ',';
    }
    out << format_number(p.fit_error) << ',' << p.sample_count << '\n';
  }
}

}  // namespace dlaperf
