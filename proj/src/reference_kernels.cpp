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
#include <string>

#include "dlaperf/error.hpp"
#include "dlaperf/hardware.hpp"

namespace dlaperf {

namespace {

using Index = std::int64_t;

char flag_or_default(const KernelSignature& sig, const VariantKey& v,
                     const char* name) {
  if (const std::string* value = v.flag(name)) return value->front();
  const FlagParam* f = sig.find_flag(name);
  if (!f) fail(ErrorKind::BackendError, sig.id + " has no flag " + name);
  return f->values.front().front();
}

double scalar(const VariantKey& v, std::size_t i) {
  return representative_value(v.scalars.at(i).second);
}

struct Matrix {
  double* p;
  Index ld;
  double& operator()(Index i, Index j) const { return p[i + j * ld]; }
};

void gemm(char ta, char tb, Index m, Index n, Index k, double alpha, Matrix a,
          Matrix b, double beta, Matrix c) {
  auto op_a = [&](Index i, Index l) { return ta == 'N' ? a(i, l) : a(l, i); };
  auto op_b = [&](Index l, Index j) { return tb == 'N' ? b(l, j) : b(j, l); };
  for (Index j = 0; j < n; ++j) {
    for (Index i = 0; i < m; ++i) c(i, j) = beta == 0 ? 0.0 : beta * c(i, j);
    for (Index l = 0; l < k; ++l) {
      const double t = alpha * op_b(l, j);
      for (Index i = 0; i < m; ++i) c(i, j) += t * op_a(i, l);
    }
  }
}

void trsm(char side, char uplo, char ta, char diag, Index m, Index n,
          double alpha, Matrix a, Matrix b) {
  const bool lower = (uplo == 'L') != (ta == 'T');
  const bool unit = diag == 'U';
  auto op = [&](Index i, Index j) { return ta == 'N' ? a(i, j) : a(j, i); };
  for (Index j = 0; j < n; ++j) {
    for (Index i = 0; i < m; ++i) b(i, j) *= alpha;
  }
  if (side == 'L') {
    for (Index j = 0; j < n; ++j) {
      if (lower) {
        for (Index i = 0; i < m; ++i) {
          double x = b(i, j);
          for (Index k = 0; k < i; ++k) x -= op(i, k) * b(k, j);
          b(i, j) = unit ? x : x / op(i, i);
        }
      } else {
        for (Index i = m - 1; i >= 0; --i) {
          double x = b(i, j);
          for (Index k = i + 1; k < m; ++k) x -= op(i, k) * b(k, j);
          b(i, j) = unit ? x : x / op(i, i);
        }
      }
    }
    return;
  }
  for (Index i = 0; i < m; ++i) {
    if (lower) {
      for (Index k = n - 1; k >= 0; --k) {
        double x = b(i, k);
        for (Index j = k + 1; j < n; ++j) x -= b(i, j) * op(j, k);
        b(i, k) = unit ? x : x / op(k, k);
      }
    } else {
      for (Index k = 0; k < n; ++k) {
        double x = b(i, k);
        for (Index j = 0; j < k; ++j) x -= b(i, j) * op(j, k);
        b(i, k) = unit ? x : x / op(k, k);
      }
    }
  }
}

void trmm(char side, char uplo, char ta, char diag, Index m, Index n,
          double alpha, Matrix a, Matrix b) {
  const bool lower = (uplo == 'L') != (ta == 'T');
  const bool unit = diag == 'U';
  auto op = [&](Index i, Index j) {
    if (unit && i == j) return 1.0;
    return ta == 'N' ? a(i, j) : a(j, i);
  };
  if (side == 'L') {
    for (Index j = 0; j < n; ++j) {
      if (lower) {
        for (Index i = m - 1; i >= 0; --i) {
          double s = 0;
          for (Index k = 0; k <= i; ++k) s += op(i, k) * b(k, j);
          b(i, j) = alpha * s;
        }
      } else {
        for (Index i = 0; i < m; ++i) {
          double s = 0;
          for (Index k = i; k < m; ++k) s += op(i, k) * b(k, j);
          b(i, j) = alpha * s;
        }
      }
    }
    return;
  }
  for (Index i = 0; i < m; ++i) {
    if (lower) {
      for (Index k = 0; k < n; ++k) {
        double s = 0;
        for (Index j = k; j < n; ++j) s += b(i, j) * op(j, k);
        b(i, k) = alpha * s;
      }
    } else {
      for (Index k = n - 1; k >= 0; --k) {
        double s = 0;
        for (Index j = 0; j <= k; ++j) s += b(i, j) * op(j, k);
        b(i, k) = alpha * s;
      }
    }
  }
}

void syrk(char uplo, char trans, Index n, Index k, double alpha, Matrix a,
          double beta, Matrix c) {
  auto op = [&](Index i, Index l) { return trans == 'N' ? a(i, l) : a(l, i); };
  for (Index j = 0; j < n; ++j) {
    const Index lo = uplo == 'L' ? j : 0;
    const Index hi = uplo == 'L' ? n : j + 1;
    for (Index i = lo; i < hi; ++i) {
      double s = 0;
      for (Index l = 0; l < k; ++l) s += op(i, l) * op(j, l);
      c(i, j) = alpha * s + (beta == 0 ? 0.0 : beta * c(i, j));
    }
  }
}

void potf2(char uplo, Index n, Matrix a) {
  // Upper is the transpose of lower; index through a swapped accessor.
  auto at = [&](Index i, Index j) -> double& {
    return uplo == 'L' ? a(i, j) : a(j, i);
  };
  for (Index j = 0; j < n; ++j) {
    double d = at(j, j);
    for (Index k = 0; k < j; ++k) d -= at(j, k) * at(j, k);
    if (d <= 0) return;
    d = std::sqrt(d);
    at(j, j) = d;
    for (Index i = j + 1; i < n; ++i) {
      double s = at(i, j);
      for (Index k = 0; k < j; ++k) s -= at(i, k) * at(j, k);
      at(i, j) = s / d;
    }
  }
}

void geqr2(Index m, Index n, Matrix a, double* tau) {
  const Index kmax = std::min(m, n);
  for (Index i = 0; i < kmax; ++i) {
    double xnorm = 0;
    for (Index r = i + 1; r < m; ++r) xnorm = std::hypot(xnorm, a(r, i));
    const double alpha = a(i, i);
    if (xnorm == 0) {
      tau[i] = 0;
    } else {
      const double beta = -std::copysign(std::hypot(alpha, xnorm), alpha);
      tau[i] = (beta - alpha) / beta;
      const double scale = 1 / (alpha - beta);
      for (Index r = i + 1; r < m; ++r) a(r, i) *= scale;
      a(i, i) = beta;
    }
    for (Index j = i + 1; j < n; ++j) {
      double w = a(i, j);
      for (Index r = i + 1; r < m; ++r) w += a(r, i) * a(r, j);
      w *= tau[i];
      a(i, j) -= w;
      for (Index r = i + 1; r < m; ++r) a(r, j) -= w * a(r, i);
    }
  }
}

void larft_forward_columnwise(Index n, Index k, Matrix v, const double* tau,
                              Matrix t) {
  for (Index i = 0; i < k; ++i) {
    if (tau[i] == 0) {
      for (Index j = 0; j <= i; ++j) t(j, i) = 0;
      continue;
    }
    for (Index j = 0; j < i; ++j) {
      double s = v(i, j);
      for (Index r = i + 1; r < n; ++r) s += v(r, j) * v(r, i);
      t(j, i) = -tau[i] * s;
    }
    for (Index j = 0; j < i; ++j) {
      double s = 0;
      for (Index l = j; l < i; ++l) s += t(j, l) * t(l, i);
      t(j, i) = s;
    }
    t(i, i) = tau[i];
  }
}

class ReferenceExecutor final : public KernelExecutor {
 public:
  std::string id() const override { return "reference"; }

  void run(const KernelSignature& sig, const VariantKey& v,
           std::span<const std::int64_t> s,
           std::span<OperandBuffer> ops) override {
    auto mat = [&](std::size_t i) { return Matrix{ops[i].ptr(), ops[i].ld}; };
    const std::string& k = sig.id;
    if (k == "dgemm") {
      gemm(flag_or_default(sig, v, "transA"), flag_or_default(sig, v, "transB"),
           s[0], s[1], s[2], scalar(v, 0), mat(0), mat(1), scalar(v, 1), mat(2));
    } else if (k == "dtrsm" || k == "dtrmm") {
      auto fn = k == "dtrsm" ? trsm : trmm;
      fn(flag_or_default(sig, v, "side"), flag_or_default(sig, v, "uplo"),
         flag_or_default(sig, v, "transA"), flag_or_default(sig, v, "diag"),
         s[0], s[1], scalar(v, 0), mat(0), mat(1));
    } else if (k == "dsyrk") {
      syrk(flag_or_default(sig, v, "uplo"), flag_or_default(sig, v, "trans"),
           s[0], s[1], scalar(v, 0), mat(0), scalar(v, 1), mat(1));
    } else if (k == "dcopy") {
      const double* x = ops[0].ptr();
      double* y = ops[1].ptr();
      const Index incx = ops[0].ld;
      const Index incy = ops[1].ld;
      for (Index i = 0; i < s[0]; ++i) y[i * incy] = x[i * incx];
    } else if (k == "dpotf2") {
      potf2(flag_or_default(sig, v, "uplo"), s[0], mat(0));
    } else if (k == "dgeqr2") {
      geqr2(s[0], s[1], mat(0), ops[1].ptr());
    } else if (k == "dlarft") {
      if (flag_or_default(sig, v, "direct") != 'F' ||
          flag_or_default(sig, v, "storev") != 'C') {
        fail(ErrorKind::BackendError,
             "reference dlarft supports direct=F, storev=C only");
      }
      larft_forward_columnwise(s[0], s[1], mat(0), ops[1].ptr(), mat(2));
    } else {
      fail(ErrorKind::BackendError, "reference backend has no kernel " + k);
    }
  }
};

}  // namespace

std::unique_ptr<KernelExecutor> make_reference_executor() {
  return std::make_unique<ReferenceExecutor>();
}

}  // namespace dlaperf
