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

#include "dlaperf/algorithms.hpp"

#include <algorithm>
#include <map>

#include "dlaperf/error.hpp"

namespace dlaperf {

namespace {

constexpr std::int64_t kElem = 8;

struct Arg {
  std::string label;
  std::int64_t offset = 0;  // bytes
  std::int64_t ld = 0;      // elements; 0 = contiguous
};

class TraceBuilder {
 public:
  TraceBuilder(const KernelRegistry& registry, Trace& trace)
      : registry_(registry), trace_(trace) {}

  void call(const std::string& kernel,
            const std::map<std::string, std::string>& flags,
            const std::map<std::string, double>& scalars,
            std::vector<std::int64_t> sizes, const std::vector<Arg>& args) {
    if (std::any_of(sizes.begin(), sizes.end(),
                    [](std::int64_t s) { return s <= 0; })) {
      return;
    }
    const KernelSignature& sig = registry_.get(kernel);
    KernelCall c;
    c.kernel = kernel;
    c.variant = variant_key(sig, flags, scalars);
    c.flags = flags;
    c.sizes = std::move(sizes);

    std::map<std::string, std::int64_t> lds;
    for (std::size_t i = 0; i < args.size(); ++i) {
      if (args[i].ld > 0 && !sig.operands.at(i).ld_param.empty()) {
        lds[sig.operands[i].ld_param] = args[i].ld;
      }
    }
    const auto extents = operand_extents(sig, c.variant, c.sizes, lds);
    if (extents.size() != args.size()) {
      fail(ErrorKind::InvalidSpec, kernel + ": operand count mismatch");
    }
    for (std::size_t i = 0; i < args.size(); ++i) {
      const auto& e = extents[i];
      c.operands.push_back(
          {e.name, args[i].label,
           RegionSet::submatrix(args[i].offset, e.rows, e.cols, e.ld, kElem),
           args[i].offset, e.ld});
    }
    trace_.add(std::move(c));
  }

 private:
  const KernelRegistry& registry_;
  Trace& trace_;
};

// Byte offset of element (i, j) of a column-major matrix at `base`.
struct Layout {
  std::int64_t base = 0;
  std::int64_t ld = 0;
  std::int64_t at(std::int64_t i, std::int64_t j) const {
    return base + (i + j * ld) * kElem;
  }
};

const std::map<std::string, std::string, std::less<>>& aliases() {
  static const std::map<std::string, std::string, std::less<>> a = {
      {"qr_blocked", "qr_blocked"},     {"dgeqrf", "qr_blocked"},
      {"qr", "qr_blocked"},             {"chol_alg1", "chol_alg1"},
      {"chol_alg2", "chol_alg2"},       {"chol_alg2_dpotrf", "chol_alg2"},
      {"dpotrf", "dpotrf"},             {"chol_alg3", "chol_alg3"},
      {"chol_recursive", "chol_recursive"}};
  return a;
}

void chol_recursive(TraceBuilder& tb, const Layout& a, std::int64_t off,
                    std::int64_t size, std::int64_t b) {
  if (size <= b) {
    tb.call("dpotf2", {{"uplo", "L"}}, {}, {size},
            {{"ATL", a.at(off, off), a.ld}});
    return;
  }
  const std::int64_t n1 = (size + 1) / 2;
  const std::int64_t n2 = size - n1;
  chol_recursive(tb, a, off, n1, b);
  tb.call("dtrsm", {{"side", "R"}, {"uplo", "L"}, {"transA", "T"}, {"diag", "N"}},
          {{"alpha", 1.0}}, {n2, n1},
          {{"ATL", a.at(off, off), a.ld}, {"ABL", a.at(off + n1, off), a.ld}});
  tb.call("dsyrk", {{"uplo", "L"}, {"trans", "N"}}, {{"alpha", -1.0}, {"beta", 1.0}},
          {n2, n1},
          {{"ABL", a.at(off + n1, off), a.ld}, {"ABR", a.at(off + n1, off + n1), a.ld}});
  chol_recursive(tb, a, off + n1, n2, b);
}

}  // namespace

const std::vector<std::string>& algorithm_ids() {
  static const std::vector<std::string> ids = {
      "qr_blocked", "chol_alg1", "chol_alg2", "dpotrf", "chol_alg3",
      "chol_recursive"};
  return ids;
}

const std::vector<std::string>& cholesky_ids() {
  static const std::vector<std::string> ids = {
      "chol_alg1", "chol_alg2", "dpotrf", "chol_alg3", "chol_recursive"};
  return ids;
}

std::string canonical_algorithm(std::string_view name) {
  const auto it = aliases().find(name);
  if (it == aliases().end()) {
    fail(ErrorKind::InvalidSpec, "unknown algorithm '" + std::string(name) + "'");
  }
  return it->second;
}

bool is_cholesky(std::string_view algorithm) {
  return canonical_algorithm(algorithm) != "qr_blocked";
}

std::int64_t default_block_size(std::string_view algorithm) {
  const std::string id = canonical_algorithm(algorithm);
  if (id == "qr_blocked") return 32;
  if (id == "chol_recursive") return 24;
  return 256;
}

Trace qr_trace(std::int64_t m, std::int64_t n, std::int64_t b,
               const KernelRegistry& registry) {
  if (n < 1 || m < n || b < 1) {
    fail(ErrorKind::InvalidSpec, "QR needs m >= n >= 1 and b >= 1 (got m=" +
                                     std::to_string(m) + ", n=" + std::to_string(n) +
                                     ", b=" + std::to_string(b) + ")");
  }
  Trace trace("qr_blocked");
  TraceBuilder tb(registry, trace);
  const Layout A{0, m};
  const std::int64_t tau = m * n * kElem;
  const Layout W{tau + std::min(m, n) * kElem, n};

  for (std::int64_t j = 0; j < n; j += b) {
    const std::int64_t ib = std::min(b, n - j);
    const std::int64_t rest = n - j - ib;  // columns of A12 / A22
    const std::int64_t mb = m - j;         // rows of [A11; A21]
    const std::int64_t tau1 = tau + j * kElem;

    tb.call("dgeqr2", {}, {}, {mb, ib},
            {{"[A11;A21]", A.at(j, j), m}, {"tau1", tau1, 0}});
    if (rest == 0) continue;

    tb.call("dlarft", {{"direct", "F"}, {"storev", "C"}}, {}, {mb, ib},
            {{"[A11;A21]", A.at(j, j), m}, {"tau1", tau1, 0}, {"W1", W.at(0, 0), n}});
    for (std::int64_t c = 0; c < ib; ++c) {
      tb.call("dcopy", {}, {}, {rest},
              {{"A12", A.at(j + c, j + ib), m}, {"W2", W.at(ib, c), 1}});
    }
    const Arg A11{"A11", A.at(j, j), m};
    const Arg A21{"A21", A.at(j + ib, j), m};
    const Arg A22{"A22", A.at(j + ib, j + ib), m};
    const Arg W1{"W1", W.at(0, 0), n};
    const Arg W2{"W2", W.at(ib, 0), n};
    tb.call("dtrmm", {{"side", "R"}, {"uplo", "L"}, {"transA", "N"}, {"diag", "U"}},
            {{"alpha", 1.0}}, {rest, ib}, {A11, W2});
    tb.call("dgemm", {{"transA", "T"}, {"transB", "N"}},
            {{"alpha", 1.0}, {"beta", 1.0}}, {rest, ib, mb - ib}, {A22, A21, W2});
    tb.call("dtrmm", {{"side", "R"}, {"uplo", "U"}, {"transA", "N"}, {"diag", "N"}},
            {{"alpha", 1.0}}, {rest, ib}, {W1, W2});
    tb.call("dgemm", {{"transA", "N"}, {"transB", "T"}},
            {{"alpha", -1.0}, {"beta", 1.0}}, {mb - ib, rest, ib}, {A21, W2, A22});
    tb.call("dtrmm", {{"side", "R"}, {"uplo", "L"}, {"transA", "T"}, {"diag", "U"}},
            {{"alpha", 1.0}}, {rest, ib}, {A11, W2});
  }
  return trace;
}

Trace chol_trace(std::string_view variant, std::int64_t n, std::int64_t b,
                 const KernelRegistry& registry) {
  const std::string id = canonical_algorithm(variant);
  if (id == "qr_blocked") {
    fail(ErrorKind::InvalidSpec, "'" + std::string(variant) + "' is not a Cholesky variant");
  }
  if (n < 1 || b < 1) {
    fail(ErrorKind::InvalidSpec, "Cholesky needs n >= 1 and b >= 1");
  }
  Trace trace(id);
  TraceBuilder tb(registry, trace);
  const Layout A{0, n};
  const std::map<std::string, std::string> trsm_flags = {
      {"side", "R"}, {"uplo", "L"}, {"transA", "T"}, {"diag", "N"}};
  const std::map<std::string, std::string> syrk_flags = {{"uplo", "L"}, {"trans", "N"}};
  const std::map<std::string, double> one = {{"alpha", 1.0}};
  const std::map<std::string, double> update = {{"alpha", -1.0}, {"beta", 1.0}};
  const std::map<std::string, std::string> lower = {{"uplo", "L"}};

  if (id == "chol_recursive") {
    chol_recursive(tb, A, 0, n, b);
    return trace;
  }

  for (std::int64_t j = 0; j < n; j += b) {
    const std::int64_t ib = std::min(b, n - j);
    const std::int64_t rest = n - j - ib;
    const Arg A00{"A00", A.at(0, 0), n};
    const Arg A10{"A10", A.at(j, 0), n};
    const Arg A11{"A11", A.at(j, j), n};
    const Arg A20{"A20", A.at(j + ib, 0), n};
    const Arg A21{"A21", A.at(j + ib, j), n};
    const Arg A22{"A22", A.at(j + ib, j + ib), n};
    if (id == "chol_alg1") {
      tb.call("dtrsm", trsm_flags, one, {ib, j}, {A00, A10});
      tb.call("dsyrk", syrk_flags, update, {ib, j}, {A10, A11});
      tb.call("dpotf2", lower, {}, {ib}, {A11});
    } else if (id == "chol_alg2" || id == "dpotrf") {
      tb.call("dsyrk", syrk_flags, update, {ib, j}, {A10, A11});
      tb.call("dpotf2", lower, {}, {ib}, {A11});
      tb.call("dgemm", {{"transA", "N"}, {"transB", "T"}}, update, {rest, ib, j},
              {A20, A10, A21});
      tb.call("dtrsm", trsm_flags, one, {rest, ib}, {A11, A21});
    } else {
      tb.call("dpotf2", lower, {}, {ib}, {A11});
      tb.call("dtrsm", trsm_flags, one, {rest, ib}, {A11, A21});
      tb.call("dsyrk", syrk_flags, update, {rest, ib}, {A21, A22});
    }
  }
  return trace;
}

Trace make_trace(const AlgorithmSpec& spec, const KernelRegistry& registry) {
  const std::string id = canonical_algorithm(spec.algorithm);
  if (spec.b < 0) fail(ErrorKind::InvalidSpec, "block size must be positive");
  const std::int64_t b = spec.b > 0 ? spec.b : default_block_size(id);
  if (id == "qr_blocked") return qr_trace(spec.m, spec.n, b, registry);
  if (spec.m != 0 && spec.m != spec.n) {
    fail(ErrorKind::InvalidSpec, "Cholesky needs a square matrix (m = n)");
  }
  return chol_trace(id, spec.n, b, registry);
}

double trace_flops(const Trace& trace, const KernelRegistry& registry) {
  double total = 0;
  for (const KernelCall& c : trace.calls()) {
    total += kernel_flops(registry.get(c.kernel), c.variant, c.sizes);
  }
  return total;
}

double efficiency(double cycles, double flops, const MachineProfile& profile) {
  if (cycles <= 0 || profile.flops_per_cycle <= 0) {
    fail(ErrorKind::InvalidArgument, "efficiency needs positive cycles and peak");
  }
  return flops / (cycles * profile.flops_per_cycle);
}

}  // namespace dlaperf
