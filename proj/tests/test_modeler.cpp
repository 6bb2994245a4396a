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

#include <cmath>
#include <numbers>
#include <random>
#include <set>
#include <sstream>

#include "catch_amalgamated.hpp"
#include "dlaperf/error.hpp"
#include "dlaperf/modeler.hpp"
#include "support.hpp"

using namespace dlaperf;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;
using dlaperf::testing::square_box;

namespace {

Sampler from_function(std::function<double(double, double)> f) {
  return [f = std::move(f)](std::span<const std::int64_t> p) {
    return f(static_cast<double>(p[0]), static_cast<double>(p[1]));
  };
}

// Every stride point of the domain is owned by exactly one patch under the
// half-open rule, checked by brute force.
void require_tiling(const std::vector<PolyPatch>& patches, const Box& domain, std::int64_t stride) {
  for (std::int64_t x = domain.lo[0]; x <= domain.hi[0]; x += stride) {
    for (std::int64_t y = domain.lo[1]; y <= domain.hi[1]; y += stride) {
      int owners = 0;
      for (const auto& p : patches) {
        const bool inx = x >= p.box.lo[0] && (x < p.box.hi[0] || (x == p.box.hi[0] && x == domain.hi[0]));
        const bool iny = y >= p.box.lo[1] && (y < p.box.hi[1] || (y == p.box.hi[1] && y == domain.hi[1]));
        owners += inx && iny;
      }
      REQUIRE(owners == 1);
    }
  }
}

}  // namespace

TEST_CASE("Chebyshev-Lobatto abscissae on the unit interval") {
  const auto x = grid_axis(0.0, 1.0, 5, 0);
  REQUIRE(x.size() == 5);
  CHECK(x[0] == 0.0);
  CHECK_THAT(x[1], WithinAbs(0.1464466094067262, 1e-15));
  CHECK_THAT(x[2], WithinAbs(0.5, 1e-15));
  CHECK_THAT(x[3], WithinAbs(0.8535533905932737, 1e-15));
  CHECK(x[4] == 1.0);
  for (int k = 0; k < 5; ++k) {
    CHECK_THAT(x[k], WithinAbs((1 - std::cos(k * std::numbers::pi / 4)) / 2, 1e-15));
  }
}

TEST_CASE("grid coordinates snap to multiples of the minimum width") {
  const auto pts = gaussian_grid(square_box(1, 8, 1024), 5, 8);
  std::set<std::int64_t> xs;
  for (const auto& p : pts) {
    CHECK(p[0] % 8 == 0);
    xs.insert(p[0]);
  }
  CHECK(xs.count(8) == 1);
  CHECK(xs.count(1024) == 1);
  CHECK(xs.size() == 5);
}

TEST_CASE("two points per dimension are the box corners") {
  const Box b{{16, 40}, {96, 200}};
  const auto pts = gaussian_grid(b, 2, 8);
  REQUIRE(pts.size() == 4);
  const std::set<std::vector<std::int64_t>> got(pts.begin(), pts.end());
  const std::set<std::vector<std::int64_t>> want = {{16, 40}, {96, 40}, {16, 200}, {96, 200}};
  CHECK(got == want);
}

TEST_CASE("grid kinds") {
  const auto r = grid_abscissae(GridKind::Regular, 5);
  CHECK(r == std::vector<double>{0, 0.25, 0.5, 0.75, 1});
  const auto b = grid_abscissae(GridKind::BoundaryRefined, 5);
  CHECK(b.front() == 0);
  CHECK(b.back() == 1);
  CHECK(b[1] < 0.25);
  CHECK(b[2] == 0.5);
  CHECK_THROWS_AS(grid_abscissae(GridKind::Regular, 1), Error);
}

TEST_CASE("duplicate snapped points are removed") {
  const auto pts = gaussian_grid(square_box(1, 8, 24), 7, 8);
  CHECK(pts.size() == 3);
}

TEST_CASE("sides shorter than the minimum width are degenerate") {
  try {
    gaussian_grid(Box{{8}, {12}}, 5, 8);
    FAIL("expected DegenerateBox");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::DegenerateBox);
  }
}

TEST_CASE("fit reproduces a degree-3 tensor polynomial exactly") {
  const Box box = square_box(2, 8, 1024);
  RefinementConfig cfg;
  auto f = [](double m, double n) {
    return 3 + 0.5 * m - 2e-3 * m * n + 1e-6 * m * m * m + 7e-7 * m * m * n * n * n / 1024;
  };
  std::vector<SamplePoint> s;
  for (const auto& p : gaussian_grid(box, cfg.points_per_dim(), cfg.min_width)) {
    s.push_back({p, f(static_cast<double>(p[0]), static_cast<double>(p[1]))});
  }
  const PolyPatch patch = fit_patch(s, box, cfg);
  CHECK(patch.coeffs.size() == 16);
  CHECK(patch.fit_error <= 1e-9);
  for (std::int64_t m = 8; m <= 1024; m += 88) {
    for (std::int64_t n = 8; n <= 1024; n += 72) {
      const std::vector<std::int64_t> p = {m, n};
      CHECK_THAT(patch.evaluate(std::span<const std::int64_t>(p)),
                 WithinRel(f(static_cast<double>(m), static_cast<double>(n)), 1e-9));
    }
  }
}

TEST_CASE("constant samples give a constant patch") {
  const Box box = square_box(2, 8, 512);
  RefinementConfig cfg;
  std::vector<SamplePoint> s;
  for (const auto& p : gaussian_grid(box, 5, 8)) s.push_back({p, 100.0});
  const PolyPatch patch = fit_patch(s, box, cfg);
  CHECK_THAT(patch.coeffs[0], WithinRel(100.0, 1e-12));
  for (std::size_t i = 1; i < patch.coeffs.size(); ++i) CHECK(std::fabs(patch.coeffs[i]) < 1e-9);
}

TEST_CASE("ripple beyond the target error is detected") {
  const Box box = square_box(2, 8, 1024);
  RefinementConfig cfg;
  auto f = [](double m, double n) { return m * n * (1 + 0.05 * std::sin(m / 40.0)); };
  std::vector<SamplePoint> s;
  for (const auto& p : gaussian_grid(box, 5, 8)) {
    s.push_back({p, f(static_cast<double>(p[0]), static_cast<double>(p[1]))});
  }
  const PolyPatch patch = fit_patch(s, box, cfg);
  // Oracle: the residual of the fitted patch evaluated directly on the grid.
  double worst = 0;
  for (const auto& sp : s) {
    const double y = sp.cycles;
    worst = std::max(worst, std::fabs(patch.evaluate(std::span<const std::int64_t>(sp.point)) - y) / y);
  }
  CHECK(patch.fit_error == worst);
  CHECK(patch.fit_error > 0.05);
}

TEST_CASE("rank-deficient grids raise FitError") {
  const Box box = square_box(2, 8, 24);  // only 3 distinct coordinates per side
  std::vector<SamplePoint> s;
  for (const auto& p : gaussian_grid(box, 5, 8)) s.push_back({p, 1.0});
  try {
    fit_patch(s, box, RefinementConfig{});
    FAIL("expected FitError");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::FitError);
  }
}

TEST_CASE("error metrics") {
  const std::vector<double> e = {0.1, 0.4, 0.2, 0.3};
  CHECK(aggregate_error(e, ErrorMetric::MaxRelative) == 0.4);
  CHECK_THAT(aggregate_error(e, ErrorMetric::AvgRelative), WithinAbs(0.25, 1e-15));
  CHECK_THAT(aggregate_error(e, ErrorMetric::MedianRelative), WithinAbs(0.25, 1e-15));
}

TEST_CASE("split midpoints round to the minimum width, ties toward lo") {
  RefinementConfig cfg;
  auto kids = split_box(square_box(1, 8, 1024), cfg);
  REQUIRE(kids.size() == 2);
  CHECK(kids[0].hi[0] == 512);
  CHECK(kids[1].lo[0] == 512);
  kids = split_box(Box{{8}, {512}}, cfg);
  CHECK(kids[0].hi[0] == 256);
  kids = split_box(Box{{8}, {256}}, cfg);
  CHECK(kids[0].hi[0] == 128);
  kids = split_box(Box{{8}, {128}}, cfg);
  CHECK(kids[0].hi[0] == 64);
  CHECK(split_box(Box{{8}, {64}}, cfg).empty());  // halves of 28 and 28 < 32
  CHECK(split_box(square_box(2, 8, 1024), cfg).size() == 4);
  CHECK(split_box(square_box(3, 8, 1024), cfg).size() == 8);
}

TEST_CASE("config validation") {
  RefinementConfig c;
  CHECK_NOTHROW(c.validate());
  c.min_box_side = 4;
  CHECK_THROWS_AS(c.validate(), Error);
  c = {};
  c.target_error = 1.0;
  CHECK_THROWS_AS(c.validate(), Error);
  c = {};
  c.degree = 0;
  CHECK_THROWS_AS(c.validate(), Error);
}

TEST_CASE("cubic cost over [8,1024]^2 needs a single patch") {
  RefinementConfig cfg;
  const auto res = refine({square_box(2, 8, 1024)}, cfg, from_function([](double m, double n) {
                            return 1000 + m * n * n / 4 + 3 * m;
                          }));
  CHECK(res.patches.size() == 1);
  CHECK(res.boxes_visited == 1);
  CHECK(res.total_samples == cfg.repetitions * 25);
}

TEST_CASE("step discontinuity at m = 512 becomes a patch edge within two levels") {
  RefinementConfig cfg;
  auto step = [](double m, double n) { return (m >= 512 ? 2.0 : 1.0) * (1000 + m * n); };
  const auto res = refine({square_box(2, 8, 1024)}, cfg, from_function(step));
  bool edge = false;
  for (const auto& p : res.patches) {
    if (p.box.lo[0] == 512 || p.box.hi[0] == 512) edge = true;
  }
  CHECK(edge);
  // The split at 512 is the first level, so every patch respects it.
  for (const auto& p : res.patches) CHECK((p.box.hi[0] <= 512 || p.box.lo[0] >= 512));
  require_tiling(res.patches, square_box(2, 8, 1024), 8);
  for (const auto& p : res.patches) {
    CHECK(p.box.side(0) >= cfg.min_box_side);
    CHECK(p.box.side(1) >= cfg.min_box_side);
  }
}

TEST_CASE("rough config uses no more patches than the fine config") {
  auto step = [](double m, double n) { return (m >= 300 ? 1.5 : 1.0) * (500 + m * n); };
  RefinementConfig fine;
  RefinementConfig rough;
  rough.oversample = 0;
  rough.error_metric = ErrorMetric::AvgRelative;
  const auto f = refine({square_box(2, 8, 1024)}, fine, from_function(step));
  const auto r = refine({square_box(2, 8, 1024)}, rough, from_function(step));
  CHECK(r.patches.size() <= f.patches.size());
}

TEST_CASE("refinement bookkeeping: samples, depth, containment") {
  RefinementConfig cfg;
  cfg.max_depth = 2;
  cfg.repetitions = 3;
  std::int64_t calls = 0;
  const Sampler s = [&](std::span<const std::int64_t> p) {
    ++calls;
    return std::exp(static_cast<double>(p[0]) / 100.0) + static_cast<double>(p[1]);
  };
  const Box domain = square_box(2, 8, 1024);
  const auto res = refine({domain}, cfg, s);
  CHECK(res.total_samples == calls * cfg.repetitions);
  std::int64_t per_patch = 0;
  for (const auto& p : res.patches) {
    CHECK(domain.contains(p.box));
    CHECK(p.box.side(0) >= 1016 / 4 - 8);  // no deeper than two levels
    per_patch += p.sample_count;
  }
  CHECK(per_patch <= res.total_samples);
  CHECK(res.patches.size() <= 16);
  require_tiling(res.patches, domain, 8);
}

TEST_CASE("refinement is deterministic") {
  auto noisy = [](std::uint64_t seed) {
    auto rng = std::make_shared<std::mt19937_64>(seed);
    return Sampler([rng](std::span<const std::int64_t> p) {
      const double u = static_cast<double>((*rng)() >> 11) * 0x1.0p-53;
      return (1 + 0.01 * u) * static_cast<double>(p[0] * p[0] + p[1]);
    });
  };
  const auto a = refine({square_box(2, 8, 1024)}, RefinementConfig{}, noisy(5));
  const auto b = refine({square_box(2, 8, 1024)}, RefinementConfig{}, noisy(5));
  CHECK(a.patches == b.patches);
  CHECK(a.total_samples == b.total_samples);
}

TEST_CASE("piecewise lookup follows the half-open rule") {
  PolyPatch left{Box{{8}, {512}}, 0, {1.0}, 0, 0};
  PolyPatch right{Box{{512}, {1024}}, 0, {2.0}, 0, 0};
  const PiecewisePolynomial p({Box{{8}, {1024}}}, {left, right});
  const std::vector<std::int64_t> a = {8}, b = {511}, c = {512}, d = {1024}, e = {1025}, f = {4};
  CHECK(p.evaluate(a) == 1.0);
  CHECK(p.evaluate(b) == 1.0);
  CHECK(p.evaluate(c) == 2.0);
  CHECK(p.evaluate(d) == 2.0);
  CHECK(p.find(e) == nullptr);
  try {
    p.evaluate(f);
    FAIL("expected OutOfDomain");
  } catch (const Error& err) {
    CHECK(err.kind() == ErrorKind::OutOfDomain);
    CHECK(std::string(err.what()).find("[8,1024]") != std::string::npos);
  }
}

TEST_CASE("accuracy report of a representable model") {
  auto f = [](double m, double n) { return 50 + m * n + 1e-3 * m * m * n; };
  const Box domain = square_box(2, 8, 1024);
  const auto res = refine({domain}, RefinementConfig{}, from_function(f));
  const PiecewisePolynomial model({domain}, res.patches);
  const auto rep = accuracy_report(
      [&](std::span<const std::int64_t> p) { return model.evaluate(p); },
      [&](std::span<const std::int64_t> p) {
        return f(static_cast<double>(p[0]), static_cast<double>(p[1]));
      },
      {domain});
  CHECK(rep.sample_count == 128 * 128);
  CHECK(rep.avg_error <= 1e-9);
}

TEST_CASE("noisy oracle with the default config stays within 1% on average") {
  const Box domain = square_box(2, 8, 1024);
  auto truth = [](std::span<const std::int64_t> p) {
    const double m = static_cast<double>(p[0]), n = static_cast<double>(p[1]);
    return 2000 + 0.5 * m * n + m * m * n / 4 + (m > 600 ? 40 * (m - 600) * n : 0.0);
  };
  std::mt19937_64 rng(17);
  const Sampler noisy = [&](std::span<const std::int64_t> p) {
    std::vector<double> reps;
    for (int r = 0; r < 15; ++r) {
      const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
      reps.push_back(truth(p) * (1 + 0.002 * (2 * u - 1)));
    }
    return median(reps);
  };
  const auto res = refine({domain}, RefinementConfig{}, noisy);
  const PiecewisePolynomial model({domain}, res.patches);
  const auto rep = accuracy_report(
      [&](std::span<const std::int64_t> p) { return model.evaluate(p); }, truth, {domain});
  CHECK(rep.avg_error <= 0.01);
}

TEST_CASE("config sweep emits one row per config") {
  const Box domain = square_box(2, 8, 256);
  auto f = [](std::span<const std::int64_t> p) {
    return static_cast<double>(p[0]) * std::sqrt(static_cast<double>(p[1]));
  };
  RefinementConfig a, b;
  b.target_error = 0.01;
  const auto rows = sweep_configs({{"a", a}, {"b", b}}, {domain}, f, f, 8);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].total_samples <= rows[1].total_samples);
  CHECK(rows[1].accuracy.avg_error <= rows[0].accuracy.avg_error);
  std::ostringstream csv;
  write_sweep_csv(csv, rows);
  CHECK(csv.str().rfind("label,samples,patches,avg_error,max_error\n", 0) == 0);
}

TEST_CASE("partition CSV") {
  PolyPatch p{Box{{8, 8}, {512, 1024}}, 0, {1.0}, 0.25, 375};
  std::ostringstream out;
  const std::vector<std::string> names = {"m", "n"};
  write_partition_csv(out, std::span<const PolyPatch>(&p, 1), names);
  CHECK(out.str() == "m_lo,m_hi,n_lo,n_hi,fit_error,samples\n8,512,8,1024,0.25,375\n");
}
