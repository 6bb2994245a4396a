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

#include "dlaperf/tuner.hpp"

#include <algorithm>
#include <charconv>
#include <ostream>

#include "dlaperf/error.hpp"
#include "dlaperf/format.hpp"

namespace dlaperf {

namespace {

std::int64_t parse_int(std::string_view t) {
  std::int64_t v = 0;
  const auto r = std::from_chars(t.data(), t.data() + t.size(), v);
  if (r.ec != std::errc() || r.ptr != t.data() + t.size()) {
    fail(ErrorKind::InvalidArgument, "not an integer: '" + std::string(t) + "'");
  }
  return v;
}

}  // namespace

std::vector<std::int64_t> BlockRange::values() const {
  if (lo < 1 || hi < lo || step < 1) {
    fail(ErrorKind::InvalidArgument, "block-size range needs 1 <= lo <= hi and step >= 1");
  }
  std::vector<std::int64_t> v;
  for (std::int64_t b = lo; b <= hi; b += step) v.push_back(b);
  return v;
}

BlockRange BlockRange::parse(std::string_view text) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const std::size_t colon = text.find(':', start);
    parts.push_back(text.substr(start, colon - start));
    if (colon == std::string_view::npos) break;
    start = colon + 1;
  }
  BlockRange r;
  if (parts.size() == 1) {
    r.lo = r.hi = parse_int(parts[0]);
    r.step = 1;
  } else if (parts.size() <= 3) {
    r.lo = parse_int(parts[0]);
    r.hi = parse_int(parts[1]);
    r.step = parts.size() == 3 ? parse_int(parts[2]) : 8;
  } else {
    fail(ErrorKind::InvalidArgument, "block-size range must be LO:HI[:STEP]");
  }
  r.values();  // validates
  return r;
}

TuneResult tune_blocksize(const std::string& algorithm, std::int64_t m,
                          std::int64_t n, const BlockRange& range,
                          ModelSource& models, const MachineProfile& profile,
                          PredictionMode mode) {
  TuneResult out;
  for (std::int64_t b : range.values()) {
    double cycles = 0;
    try {
      const Trace t = make_trace({algorithm, m, n, b});
      cycles = predict_trace(t, models, profile, mode).total;
    } catch (const Error& e) {
      throw Error(e.kind(), std::string(e.what()) + " [b=" + std::to_string(b) + "]");
    }
    out.curve.push_back({b, cycles});
    if (out.curve.size() == 1 || cycles < out.best_cycles) {
      out.best_b = b;
      out.best_cycles = cycles;
    }
  }
  return out;
}

bool verify_argmin(const TuneResult& r) {
  bool seen = false;
  for (const CurvePoint& p : r.curve) {
    if (p.cycles < r.best_cycles) return false;
    if (p.b < r.best_b && p.cycles == r.best_cycles) return false;
    if (p.b == r.best_b) seen = p.cycles == r.best_cycles;
  }
  return seen;
}

std::vector<RankEntry> rank_algorithms(const std::vector<AlgorithmSpec>& specs,
                                       ModelSource& models,
                                       const MachineProfile& profile,
                                       PredictionMode mode) {
  std::vector<RankEntry> out;
  for (const AlgorithmSpec& s : specs) {
    RankEntry e;
    e.spec = s;
    if (e.spec.b <= 0) e.spec.b = default_block_size(s.algorithm);
    const Trace t = make_trace(e.spec);
    e.cycles = predict_trace(t, models, profile, mode).total;
    e.flops = trace_flops(t);
    e.efficiency = e.cycles > 0 ? efficiency(e.cycles, e.flops, profile) : 0.0;
    out.push_back(std::move(e));
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const RankEntry& a, const RankEntry& b) { return a.cycles < b.cycles; });
  return out;
}

void write_curve_csv(std::ostream& out, std::span<const CurvePoint> curve) {
  out << "b,cycles\n";
  for (const auto& p : curve) out << p.b << ',' << format_number(p.cycles) << '\n';
}

void write_ranking_csv(std::ostream& out, std::span<const RankEntry> ranking) {
  out << "algorithm,cycles,efficiency\n";
  for (const auto& e : ranking) {
    out << e.spec.algorithm << ',' << format_number(e.cycles) << ','
        << format_number(e.efficiency) << '\n';
  }
}

}  // namespace dlaperf
