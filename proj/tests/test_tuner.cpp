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

#include <algorithm>
#include <numeric>
#include <sstream>

#include "catch_amalgamated.hpp"
#include "dlaperf/error.hpp"
#include "dlaperf/tuner.hpp"

using namespace dlaperf;

namespace {

constexpr double kPerCall = 460000;

// Per-call costs whose alg-3 Cholesky total has a unique minimum at b = 112
// for n = 1120. Identical in and out of cache.
double crafted(std::string_view k, std::span<const std::int64_t> s) {
  const double a = static_cast<double>(s[0]);
  const double b = s.size() > 1 ? static_cast<double>(s[1]) : 0;
  if (k == "dpotf2") return kPerCall + a * a * a / 2;
  if (k == "dtrsm") return kPerCall + a * b * b / 8;
  if (k == "dsyrk") return kPerCall + (a * a * b + a * b) / 8;
  fail(ErrorKind::UnknownVariant, "crafted models cover no " + std::string(k));
}

FunctionModels crafted_models(double scale = 1, double oc_factor = 1) {
  return FunctionModels([=](std::string_view k, const VariantKey&, CacheCondition c,
                            std::span<const std::int64_t> s) {
    return scale * crafted(k, s) * (c == CacheCondition::OutOfCache ? oc_factor : 1);
  });
}

// Independent closed-form total of the alg-3 loop.
double alg3_total(std::int64_t n, std::int64_t b) {
  double tot = 0;
  for (std::int64_t j = 0; j < n; j += b) {
    const double ib = static_cast<double>(std::min(b, n - j));
    const double rest = static_cast<double>(n - j) - ib;
    tot += kPerCall + ib * ib * ib / 2;
    if (rest > 0) {
      tot += kPerCall + rest * ib * ib / 8;
      tot += kPerCall + rest * (rest + 1) * ib / 8;
    }
  }
  return tot;
}

}  // namespace

TEST_CASE("crafted models put the optimum at b = 112") {
  auto models = crafted_models();
  const auto res = tune_blocksize("chol_alg3", 1120, 1120, BlockRange{8, 288, 8}, models,
                                  MachineProfile{});
  CHECK(res.best_b == 112);
  CHECK(res.best_cycles == 77928480.0);
  CHECK(res.curve.size() == 36);
  CHECK(verify_argmin(res));
  for (const auto& p : res.curve) CHECK(p.cycles == alg3_total(1120, p.b));
  // Re-sweep independently and compare the argmin.
  std::int64_t best = 0;
  double best_c = 0;
  for (std::int64_t b = 8; b <= 288; b += 8) {
    const double c = alg3_total(1120, b);
    if (best == 0 || c < best_c) best = b, best_c = c;
  }
  CHECK(best == 112);
}

TEST_CASE("argmin survives common scaling and the cache mode") {
  for (double scale : {0.001, 3.0, 1e4}) {
    auto models = crafted_models(scale, 1.7);
    for (auto mode : {PredictionMode::AllInCache, PredictionMode::AllOutOfCache}) {
      const auto res = tune_blocksize("chol_alg3", 1120, 1120, BlockRange{8, 288, 8}, models,
                                      MachineProfile{}, mode);
      CHECK(res.best_b == 112);
    }
  }
}

TEST_CASE("single-point range") {
  auto models = crafted_models();
  const auto res = tune_blocksize("chol_alg3", 1120, 1120, BlockRange::parse("32"), models,
                                  MachineProfile{});
  CHECK(res.best_b == 32);
  REQUIRE(res.curve.size() == 1);
  CHECK(res.curve[0].cycles == alg3_total(1120, 32));
}

TEST_CASE("ties go to the smaller block size") {
  FunctionModels flat([](std::string_view, const VariantKey&, CacheCondition,
                         std::span<const std::int64_t>) { return 1.0; });
  // n = 64: b = 32 and b = 40 both give two iterations of four calls.
  const auto res = tune_blocksize("chol_alg3", 64, 64, BlockRange{32, 56, 8}, flat,
                                  MachineProfile{}, PredictionMode::AllInCache);
  CHECK(res.curve[0].cycles == res.curve[1].cycles);
  CHECK(res.best_b == 32);
}

TEST_CASE("prediction failures name the block size") {
  FunctionModels partial([](std::string_view k, const VariantKey&, CacheCondition,
                            std::span<const std::int64_t> s) -> double {
    if (k == "dpotf2" && s[0] > 100) fail(ErrorKind::OutOfDomain, "dpotf2 too large");
    return 1.0;
  });
  try {
    tune_blocksize("chol_alg3", 256, 256, BlockRange{64, 128, 64}, partial, MachineProfile{},
                   PredictionMode::AllInCache);
    FAIL("expected OutOfDomain");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::OutOfDomain);
    CHECK(std::string(e.what()).find("b=128") != std::string::npos);
  }
}

TEST_CASE("ranking sorts by cycles and keeps ties stable") {
  // dtrsm twice as expensive per flop as everything else.
  FunctionModels models([](std::string_view k, const VariantKey& v, CacheCondition,
                           std::span<const std::int64_t> s) {
    const auto& sig = KernelRegistry::builtin().get(k);
    const double f = kernel_flops(sig, v, s);
    return 100 + (k == "dtrsm" ? 2 * f : f);
  });
  std::vector<AlgorithmSpec> specs;
  for (const auto& alg : cholesky_ids()) specs.push_back({alg, 400, 400, 0});
  specs.push_back({"chol_alg1", 400, 400, 0});  // duplicate of the first

  const auto ranked = rank_algorithms(specs, models, MachineProfile{});
  REQUIRE(ranked.size() == specs.size());
  // Independent per-call totals.
  std::vector<double> want;
  for (const auto& s : specs) {
    const Trace t = make_trace(s);
    double tot = 0;
    for (const auto& c : t.calls()) {
      const double f = kernel_flops(KernelRegistry::builtin().get(c.kernel), c.variant, c.sizes);
      tot += 100 + (c.kernel == "dtrsm" ? 2 * f : f);
    }
    want.push_back(tot);
  }
  std::vector<std::size_t> order(specs.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return want[a] < want[b]; });
  for (std::size_t i = 0; i < order.size(); ++i) {
    CHECK(ranked[i].spec.algorithm == specs[order[i]].algorithm);
    CHECK(ranked[i].cycles == want[order[i]]);
    CHECK(ranked[i].efficiency > 0);
  }
  // Duplicate specs stay in input order.
  std::vector<std::size_t> dup_pos;
  for (std::size_t i = 0; i < ranked.size(); ++i) {
    if (ranked[i].spec.algorithm == "chol_alg1") dup_pos.push_back(i);
  }
  REQUIRE(dup_pos.size() == 2);
  CHECK(ranked[dup_pos[0]].cycles == ranked[dup_pos[1]].cycles);
}

TEST_CASE("ranking order is invariant under common scaling") {
  auto base = crafted_models();
  auto scaled = crafted_models(7.5);
  std::vector<AlgorithmSpec> specs = {{"chol_alg3", 600, 600, 64}, {"chol_alg3", 600, 600, 128},
                                      {"chol_alg3", 600, 600, 16}, {"chol_alg3", 600, 600, 256}};
  const auto a = rank_algorithms(specs, base, MachineProfile{});
  const auto b = rank_algorithms(specs, scaled, MachineProfile{});
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].spec.b == b[i].spec.b);
}

TEST_CASE("block ranges") {
  auto r = BlockRange::parse("8:288:8");
  CHECK(r.values().size() == 36);
  r = BlockRange::parse("16:40");
  CHECK(r.values() == std::vector<std::int64_t>{16, 24, 32, 40});
  r = BlockRange::parse("10:20:4");
  CHECK(r.values() == std::vector<std::int64_t>{10, 14, 18});
  for (auto bad : {"", "0:8", "8:4", "8:16:0", "a:b"}) {
    CHECK_THROWS_AS(BlockRange::parse(bad), Error);
  }
}

TEST_CASE("curve and ranking CSV") {
  const std::vector<CurvePoint> curve = {{8, 100}, {16, 50.5}};
  std::ostringstream c;
  write_curve_csv(c, curve);
  CHECK(c.str() == "b,cycles\n8,100\n16,50.5\n");
  RankEntry e{{"chol_recursive", 100, 100, 24}, 2000, 8000, 0.5};
  std::ostringstream r;
  write_ranking_csv(r, std::span<const RankEntry>(&e, 1));
  CHECK(r.str() == "algorithm,cycles,efficiency\nchol_recursive,2000,0.5\n");
}
