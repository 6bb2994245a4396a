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

// Shared helpers for the unit and acceptance tests.

#include <cstdint>
#include <sys/wait.h>

#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include "dlaperf/kernelspec.hpp"
#include "dlaperf/modeler.hpp"
#include "dlaperf/modelstore.hpp"
#include "dlaperf/regionset.hpp"
#include "dlaperf/timing.hpp"
#include "dlaperf/trace.hpp"

namespace dlaperf::testing {

inline Box square_box(std::size_t dims, std::int64_t lo, std::int64_t hi) {
  Box b;
  b.lo.assign(dims, lo);
  b.hi.assign(dims, hi);
  return b;
}

/// Builds both conditions of every variant from a noise-free cost with one
/// repetition per point.
inline PerfModel exact_model(const KernelSignature& sig,
                             const std::vector<VariantKey>& variants,
                             CostFunction cost, const std::vector<Box>& domain,
                             const MachineProfile& machine = {}) {
  SyntheticBackend backend(std::move(cost), 0.0, 1);
  RefinementConfig cfg;
  cfg.repetitions = 1;
  return build_model(backend, sig, variants, domain, cfg, machine);
}

/// A KernelCall with arbitrary operand regions; the kernel name only labels
/// the record (access distances never consult the registry).
inline KernelCall raw_call(const std::string& kernel,
                           const std::vector<RegionSet>& regions) {
  KernelCall c;
  c.kernel = kernel;
  for (std::size_t i = 0; i < regions.size(); ++i) {
    c.operands.push_back({"op" + std::to_string(i), "op" + std::to_string(i), regions[i]});
  }
  return c;
}

/// Random trace: 1..max_calls calls of 1..max_operands operands, each a
/// 1- to 3-interval region with `align`-aligned offsets and lengths inside
/// [0, space).
inline Trace random_trace(std::mt19937_64& rng, int max_calls, int max_operands,
                          std::int64_t space, std::int64_t align = 8) {
  std::uniform_int_distribution<int> ncalls(1, max_calls);
  std::uniform_int_distribution<int> nops(1, max_operands);
  std::uniform_int_distribution<int> npieces(1, 3);
  const std::int64_t units = space / align;
  std::uniform_int_distribution<std::int64_t> start(0, units - 1);
  // Piece lengths up to a sixth of the space, so some calls fit the cache and others do not.
  std::uniform_int_distribution<std::int64_t> len(1, std::max<std::int64_t>(1, units / 6));
  Trace t("random");
  const int calls = ncalls(rng);
  for (int c = 0; c < calls; ++c) {
    std::vector<RegionSet> regions;
    const int ops = nops(rng);
    for (int o = 0; o < ops; ++o) {
      RegionSet r;
      const int pieces = npieces(rng);
      for (int p = 0; p < pieces; ++p) {
        const std::int64_t s = start(rng);
        const std::int64_t l = std::min(len(rng), units - s);
        r.insert(s * align, l * align);
      }
      regions.push_back(std::move(r));
    }
    t.add(raw_call("k" + std::to_string(c), regions));
  }
  return t;
}

struct CommandResult {
  int exit_code = -1;
  std::string output;
};

/// Runs a shell command, capturing stdout (stderr is folded in when
/// `merge_stderr`).
inline CommandResult run_command(const std::string& cmd, bool merge_stderr = false) {
  CommandResult r;
  const std::string full = merge_stderr ? cmd + " 2>&1" : cmd + " 2>/dev/null";
  FILE* pipe = popen(full.c_str(), "r");
  if (!pipe) return r;
  char buf[4096];
  std::size_t n = 0;
  while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) r.output.append(buf, n);
  const int status = pclose(pipe);
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

}  // namespace dlaperf::testing
