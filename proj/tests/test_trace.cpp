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

#include <random>
#include <set>
#include <sstream>

#include "catch_amalgamated.hpp"
#include "dlaperf/algorithms.hpp"
#include "dlaperf/error.hpp"
#include "dlaperf/trace.hpp"
#include "support.hpp"

using namespace dlaperf;
using dlaperf::testing::random_trace;
using dlaperf::testing::raw_call;

namespace {

constexpr std::int64_t kCache = 6 * 1024 * 1024;

// Regions of the m=n=96, b=32 QR layout, derived from the storage scheme
// rather than read back from the trace: A column-major (ld 96), tau after
// A, W (ld 96) after tau.
struct QrGeometry {
  static constexpr std::int64_t n = 96, b = 32, e = 8;
  static constexpr std::int64_t tau = n * n * e;
  static constexpr std::int64_t w = tau + n * e;
  RegionSet A(std::int64_t r, std::int64_t c, std::int64_t rows, std::int64_t cols) const {
    return RegionSet::submatrix((r + c * n) * e, rows, cols, n);
  }
  RegionSet W(std::int64_t r, std::int64_t c, std::int64_t rows, std::int64_t cols) const {
    return RegionSet::submatrix(w + (r + c * n) * e, rows, cols, n);
  }
  RegionSet A11() const { return A(0, 0, b, b); }
  RegionSet A21() const { return A(b, 0, n - b, b); }
  RegionSet A12() const { return A(0, b, b, n - b); }
  RegionSet W1() const { return W(0, 0, b, b); }
  RegionSet W2() const { return W(b, 0, n - b, b); }
  RegionSet tau1() const { return RegionSet::range(tau, b * e); }
};

std::size_t first_call(const Trace& t, const std::string& kernel, const std::string& variant) {
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i].kernel == kernel && t[i].variant.str().find(variant) != std::string::npos) return i;
  }
  FAIL("no such call");
  return 0;
}

}  // namespace

TEST_CASE("example 1: W2 at the first dtrmm sees only the dcopy history") {
  const Trace t = qr_trace(96, 96, 32);
  const QrGeometry g;
  const std::size_t i = first_call(t, "dtrmm", "side=R,uplo=L,transA=N");
  REQUIRE(i == 34);
  const auto d = access_distance(t, i, "W2", kCache);
  CHECK(d.terminated_by == Termination::FoundOperand);
  CHECK(d.found_at == 2);  // the first of the 32 dcopy calls
  CHECK(d.regions == g.W2().united(g.A12()));
  CHECK(d.bytes == (96 - 32) * 32 * 8 * 2);
}

TEST_CASE("example 1: A11 at the same call reaches back to dlarft") {
  const Trace t = qr_trace(96, 96, 32);
  const QrGeometry g;
  const auto d = access_distance(t, 34, "A11", kCache);
  CHECK(d.terminated_by == Termination::FoundOperand);
  CHECK(t[d.found_at].kernel == "dlarft");
  RegionSet want = g.W2();
  for (const auto& r : {g.A12(), g.W1(), g.A11(), g.A21(), g.tau1()}) want.unite(r);
  CHECK(d.regions == want);
}

TEST_CASE("example 2: tau1 of later iterations is never found") {
  for (std::int64_t n : {96, 200, 640}) {
    const Trace t = qr_trace(n, n, 32);
    int seen = 0;
    for (std::size_t i = 1; i < t.size(); ++i) {
      if (t[i].kernel != "dgeqr2") continue;
      ++seen;
      for (std::int64_t cache : {std::int64_t{4096}, std::int64_t{256} * 1024, kCache}) {
        const auto d = access_distance(t, i, "tau1", cache);
        CHECK(d.terminated_by != Termination::FoundOperand);
      }
    }
    CHECK(seen == (n + 31) / 32 - 1);
  }
}

TEST_CASE("a single-call trace returns the whole footprint") {
  Trace t("one");
  t.add(raw_call("k", {RegionSet::range(0, 64), RegionSet::range(128, 32)}));
  const auto d = access_distance(t, 0, 1, 1 << 20);
  CHECK(d.terminated_by == Termination::TraceStart);
  CHECK(d.bytes == 96);
  CHECK(d.bytes == t.total_footprint());
}

TEST_CASE("an exceeded cache stops the scan") {
  Trace t("x");
  t.add(raw_call("a", {RegionSet::range(0, 100)}));
  t.add(raw_call("b", {RegionSet::range(1000, 100)}));
  t.add(raw_call("c", {RegionSet::range(2000, 100)}));
  t.add(raw_call("d", {RegionSet::range(0, 100)}));
  auto d = access_distance(t, 3, 0, 150);
  CHECK(d.terminated_by == Termination::ExceededCache);
  CHECK(d.bytes == 200);
  d = access_distance(t, 3, 0, 200);  // measure must exceed, not reach
  CHECK(d.terminated_by == Termination::FoundOperand);
  CHECK(d.bytes == 300);
}

TEST_CASE("operands that do not belong to the call are rejected") {
  const Trace t = qr_trace(64, 64, 32);
  for (auto bad : {std::string("B"), std::string("A22")}) {
    try {
      access_distance(t, 0, bad, kCache);
      FAIL("expected InvalidOperand");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::InvalidOperand);
    }
  }
  CHECK_THROWS_AS(access_distance(t, 0, std::size_t{7}, kCache), Error);
  CHECK_THROWS_AS(access_distance(t, t.size(), std::size_t{0}, kCache), Error);
}

TEST_CASE("access distance never counts a byte twice") {
  // Oracle: a byte bitmap filled by the same scan rule.
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 200; ++trial) {
    const Trace t = random_trace(rng, 12, 5, 2048);
    const std::size_t i = rng() % t.size();
    const std::size_t op = rng() % t[i].operands.size();
    const std::int64_t cache = 64 + static_cast<std::int64_t>(rng() % 2048);
    const auto d = access_distance(t, i, op, cache);

    std::vector<bool> seen(4096, false), need(4096, false);
    for (const auto& r : t[i].operands[op].region.ranges()) {
      for (auto b = r.begin; b < r.end; ++b) need[b] = true;
    }
    std::int64_t count = 0;
    Termination term = Termination::TraceStart;
    for (std::size_t j = i; j-- > 0;) {
      for (const auto& o : t[j].operands) {
        for (const auto& r : o.region.ranges()) {
          for (auto b = r.begin; b < r.end; ++b) {
            if (!seen[b]) ++count;
            seen[b] = true;
            need[b] = false;
          }
        }
      }
      if (std::find(need.begin(), need.end(), true) == need.end()) {
        term = Termination::FoundOperand;
        break;
      }
      if (count > cache) {
        term = Termination::ExceededCache;
        break;
      }
    }
    if (term == Termination::TraceStart) {
      for (const auto& r : t.footprint().ranges()) {
        for (auto b = r.begin; b < r.end; ++b) {
          if (!seen[b]) ++count;
          seen[b] = true;
        }
      }
    }
    CHECK(d.terminated_by == term);
    CHECK(d.bytes == count);
    CHECK(d.bytes == d.regions.measure());
    if (term == Termination::FoundOperand) {
      CHECK(d.bytes >= t[i].operands[op].region.measure());
    }
  }
}

TEST_CASE("LRU: access distance below the cache implies residency") {
  std::mt19937_64 rng(2024);
  int checked = 0;
  for (int trial = 0; trial < 150; ++trial) {
    const Trace t = random_trace(rng, 15, 6, 32 * 1024);
    const std::int64_t cache = 4096 * (1 + static_cast<std::int64_t>(rng() % 4));
    const auto res = lru_residency(t, cache, 8);
    for (std::size_t i = 0; i < t.size(); ++i) {
      for (std::size_t o = 0; o < t[i].operands.size(); ++o) {
        const auto d = access_distance(t, i, o, cache);
        if (d.bytes < cache) {
          CHECK(res[i][o]);
          ++checked;
        }
        CHECK(res[i][o] == lru_oracle(t, i, o, cache, 8));
      }
    }
  }
  CHECK(checked > 0);
}

TEST_CASE("LRU: a cache larger than the footprint keeps everything") {
  std::mt19937_64 rng(3);
  const Trace t = random_trace(rng, 10, 4, 4096);
  for (auto warm : {LruWarmup::RepeatedExecution}) {
    const auto res = lru_residency(t, 8192, 64, warm);
    for (const auto& call : res) {
      for (bool r : call) CHECK(r);
    }
  }
  // Cold: resident from the second touch on.
  Trace u("cold");
  u.add(raw_call("a", {RegionSet::range(0, 64)}));
  u.add(raw_call("b", {RegionSet::range(0, 64)}));
  CHECK_FALSE(lru_oracle(u, 0, 0, 1 << 20, 64, LruWarmup::Cold));
  CHECK(lru_oracle(u, 1, 0, 1 << 20, 64, LruWarmup::Cold));
}

TEST_CASE("LRU: evicted data is reported missing") {
  Trace t("evict");
  t.add(raw_call("a", {RegionSet::range(0, 64)}));
  t.add(raw_call("b", {RegionSet::range(64, 128)}));
  t.add(raw_call("c", {RegionSet::range(0, 64)}));
  CHECK_FALSE(lru_oracle(t, 2, 0, 128, 64, LruWarmup::Cold));
  CHECK(lru_oracle(t, 2, 0, 192, 64, LruWarmup::Cold));
}

TEST_CASE("trace JSONL round trip") {
  for (const auto& spec : {AlgorithmSpec{"qr_blocked", 80, 64, 16}, AlgorithmSpec{"chol_alg1", 0, 100, 32},
                           AlgorithmSpec{"chol_recursive", 0, 70, 24}}) {
    const Trace t = make_trace(spec);
    std::stringstream ss;
    write_trace(ss, t);
    std::string line;
    std::size_t lines = 0;
    std::istringstream count(ss.str());
    while (std::getline(count, line)) ++lines;
    CHECK(lines == t.size());
    const Trace back = read_trace(ss, KernelRegistry::builtin());
    REQUIRE(back.size() == t.size());
    for (std::size_t i = 0; i < t.size(); ++i) CHECK(back[i] == t[i]);
    CHECK(back.footprint() == t.footprint());
  }
}

TEST_CASE("malformed trace lines raise ParseError") {
  std::istringstream in("{\"index\": 0, \"kernel\": \"dgemm\"\n");
  try {
    read_trace(in, KernelRegistry::builtin());
    FAIL("expected ParseError");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::ParseError);
  }
}
