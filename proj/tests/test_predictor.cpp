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
#include <random>
#include <sstream>

#include "catch_amalgamated.hpp"
#include "dlaperf/algorithms.hpp"
#include "dlaperf/error.hpp"
#include "dlaperf/predictor.hpp"
#include "support.hpp"

using namespace dlaperf;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;
using dlaperf::testing::raw_call;

namespace {

// Cost proportional to the product of the sizes; out-of-cache 25% slower.
FunctionModels product_models(double oc_factor = 1.25) {
  return FunctionModels([oc_factor](std::string_view, const VariantKey&, CacheCondition c,
                                    std::span<const std::int64_t> s) {
    double t = 100;
    for (auto x : s) t *= static_cast<double>(x);
    return c == CacheCondition::InCache ? t : oc_factor * t;
  });
}

}  // namespace

TEST_CASE("smoothing function values") {
  CHECK(smooth(0.0) == 0.0);
  CHECK_THAT(smooth(0.25), WithinAbs(0.7615941559557649, 1e-15));
  CHECK_THAT(smooth(-0.5), WithinAbs(-0.7615941559557649, 1e-15));
  for (double r : {0.1, 0.7, 2.0}) CHECK(smooth(-r) == -std::tanh(2 * r));
}

TEST_CASE("alpha examples") {
  const std::int64_t c = 1 << 20;
  const std::vector<OperandLoad> two = {{0, 4096}, {2 * c, 4096}};
  CHECK_THAT(call_alpha(two, c), WithinAbs((std::tanh(4.0) - std::tanh(2.0)) / 2, 1e-15));
  CHECK_THAT(call_alpha(two, c), WithinAbs(0.017651, 1e-6));
  const std::vector<OperandLoad> at_c = {{c, 8}, {c, 800}};
  CHECK(call_alpha(at_c, c) == 0.0);
  const std::vector<OperandLoad> one = {{0, 8}};
  CHECK_THAT(call_alpha(one, c), WithinAbs(0.999329, 1e-6));
  try {
    call_alpha({}, c);
    FAIL("expected NoOperands");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NoOperands);
  }
}

TEST_CASE("blend examples") {
  CHECK(blend(100, 200, 0) == 150);
  CHECK(blend(100, 200, 1) == 100);
  CHECK(blend(100, 200, -1) == 200);
  CHECK_THAT(blend(100, 200, 0.999329), WithinAbs(100.0336, 1e-4));
}

TEST_CASE("blending properties on random inputs") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0, 1);
  for (int i = 0; i < 20000; ++i) {
    const std::int64_t c = 1 + static_cast<std::int64_t>(rng() % (8 << 20));
    const std::int64_t d = static_cast<std::int64_t>(rng() % (3 * static_cast<std::uint64_t>(c)));
    const double r = relative_distance(d, c);
    CHECK(r == static_cast<double>(c - d) / static_cast<double>(c));
    const double f = smooth(r);
    CHECK(std::fabs(f - (r >= 0 ? std::tanh(4 * r) : std::tanh(2 * r))) <= 1e-12);
    const double a = 2 * u(rng) - 1;
    const double ti = 1e6 * u(rng), to = 1e6 * u(rng);
    const double t = blend(ti, to, a);
    CHECK(t >= std::min(ti, to) * (1 - 1e-15));
    CHECK(t <= std::max(ti, to) * (1 + 1e-15));
    // Monotone in alpha, direction set by the ordering of the estimates.
    const double t2 = blend(ti, to, std::min(1.0, a + 0.1));
    if (ti <= to) CHECK(t2 <= t + 1e-9); else CHECK(t2 >= t - 1e-9);
  }
}

TEST_CASE("a one-call trace blends against the full footprint") {
  Trace t("one");
  t.add(raw_call("k", {RegionSet::range(0, 4096), RegionSet::range(8192, 4096)}));
  auto models = product_models();
  MachineProfile p;
  p.largest_cache_bytes = 16384;
  const auto pred = predict_trace(t, models, p);
  REQUIRE(pred.calls.size() == 1);
  for (const auto& op : pred.calls[0].operands) {
    CHECK(op.d == 8192);
    CHECK(op.terminated_by == Termination::TraceStart);
  }
  CHECK_THAT(pred.calls[0].alpha, WithinAbs(std::tanh(2.0), 1e-15));
}

TEST_CASE("blended totals are bracketed and the pure modes decompose") {
  auto models = product_models();
  MachineProfile p;
  p.largest_cache_bytes = 256 * 1024;
  for (const auto& spec : {AlgorithmSpec{"qr_blocked", 200, 160, 32}, AlgorithmSpec{"chol_alg2", 0, 300, 64},
                           AlgorithmSpec{"chol_recursive", 0, 200, 24}}) {
    const Trace t = make_trace(spec);
    const auto ic = predict_trace(t, models, p, PredictionMode::AllInCache);
    const auto oc = predict_trace(t, models, p, PredictionMode::AllOutOfCache);
    const auto bl = predict_trace(t, models, p, PredictionMode::Blended);
    double sum_ic = 0, sum_oc = 0;
    for (std::size_t i = 0; i < t.size(); ++i) {
      sum_ic += models.estimate(t[i].kernel, t[i].variant, CacheCondition::InCache, t[i].sizes);
      sum_oc += models.estimate(t[i].kernel, t[i].variant, CacheCondition::OutOfCache, t[i].sizes);
      const auto& c = bl.calls[i];
      CHECK(c.alpha >= -1);
      CHECK(c.alpha <= 1);
      CHECK(c.t >= c.t_ic);
      CHECK(c.t <= c.t_oc);
    }
    CHECK(ic.total == sum_ic);
    CHECK(oc.total == sum_oc);
    CHECK(ic.total < bl.total);
    CHECK(bl.total < oc.total);
  }
}

TEST_CASE("alpha matches an independent recomputation") {
  auto models = product_models();
  MachineProfile p;
  p.largest_cache_bytes = 64 * 1024;
  const Trace t = qr_trace(120, 120, 24);
  const auto pred = predict_trace(t, models, p);
  for (std::size_t i = 0; i < t.size(); i += 7) {
    double num = 0, den = 0;
    for (std::size_t k = 0; k < t[i].operands.size(); ++k) {
      const double d = static_cast<double>(access_distance(t, i, k, p.largest_cache_bytes).bytes);
      const double r = (65536.0 - d) / 65536.0;
      const double s = static_cast<double>(t[i].operands[k].region.measure());
      num += (r >= 0 ? std::tanh(4 * r) : std::tanh(2 * r)) * s;
      den += s;
    }
    CHECK_THAT(pred.calls[i].alpha, WithinAbs(num / den, 1e-12));
  }
}

TEST_CASE("model errors carry the call index") {
  FunctionModels bad([](std::string_view k, const VariantKey&, CacheCondition,
                        std::span<const std::int64_t>) -> double {
    if (k == "dtrmm") fail(ErrorKind::OutOfDomain, "no dtrmm");
    return 1.0;
  });
  const Trace t = qr_trace(96, 96, 32);
  try {
    predict_trace(t, bad, MachineProfile{});
    FAIL("expected OutOfDomain");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::OutOfDomain);
    CHECK(std::string(e.what()).find("[call 34: dtrmm]") != std::string::npos);
  }
}

TEST_CASE("prediction CSV has one row per call and a totals row") {
  auto models = product_models();
  const Trace t = make_trace({"chol_alg3", 0, 64, 32});
  const auto pred = predict_trace(t, models, MachineProfile{}, PredictionMode::AllInCache);
  std::ostringstream out;
  write_prediction_csv(out, t, pred);
  std::istringstream in(out.str());
  std::string line;
  std::vector<std::string> lines;
  while (std::getline(in, line)) lines.push_back(line);
  REQUIRE(lines.size() == t.size() + 2);
  CHECK(lines[0] == "index,kernel,sizes,d,alpha,t_ic,t_oc,t");
  CHECK(lines[1].rfind("0,dpotf2,32,,1,", 0) == 0);
  CHECK(lines.back().rfind("total,,,,,", 0) == 0);
}

TEST_CASE("mode names") {
  CHECK(parse_mode("blended") == PredictionMode::Blended);
  CHECK(parse_mode("ic") == PredictionMode::AllInCache);
  CHECK(parse_mode("oc") == PredictionMode::AllOutOfCache);
  CHECK_THROWS_AS(parse_mode("warm"), Error);
}
