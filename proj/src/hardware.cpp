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

#include "dlaperf/hardware.hpp"

#include <dlfcn.h>

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <thread>

#include "dlaperf/error.hpp"

#if defined(__x86_64__) || defined(__i386__)
#include <x86intrin.h>
#define DLAPERF_HAVE_TSC 1
#endif

namespace dlaperf {

namespace {

using Clock = std::chrono::steady_clock;

bool is_triangular_input(const KernelSignature& sig, std::size_t operand) {
  if (sig.id == "dtrsm" || sig.id == "dtrmm") return operand == 0;
  if (sig.id == "dpotf2") return operand == 0;
  return false;
}

// Fortran LAPACK/BLAS interface, LP64 integers, trailing hidden string
// lengths.
using fint = int;
using DgemmFn = void (*)(const char*, const char*, const fint*, const fint*,
                         const fint*, const double*, const double*,
                         const fint*, const double*, const fint*,
                         const double*, double*, const fint*, std::size_t,
                         std::size_t);
using DtrxmFn = void (*)(const char*, const char*, const char*, const char*,
                         const fint*, const fint*, const double*,
                         const double*, const fint*, double*, const fint*,
                         std::size_t, std::size_t, std::size_t, std::size_t);
using DsyrkFn = void (*)(const char*, const char*, const fint*, const fint*,
                         const double*, const double*, const fint*,
                         const double*, double*, const fint*, std::size_t,
                         std::size_t);
using DcopyFn = void (*)(const fint*, const double*, const fint*, double*,
                         const fint*);
using Dgeqr2Fn = void (*)(const fint*, const fint*, double*, const fint*,
                          double*, double*, fint*);
using DlarftFn = void (*)(const char*, const char*, const fint*, const fint*,
                          const double*, const fint*, const double*, double*,
                          const fint*, std::size_t, std::size_t);
using Dpotf2Fn = void (*)(const char*, const fint*, double*, const fint*,
                          fint*, std::size_t);

fint to_fint(std::int64_t v) {
  if (v < 0 || v > 0x7fffffff) {
    fail(ErrorKind::BackendError, "size does not fit a 32-bit BLAS integer");
  }
  return static_cast<fint>(v);
}

char flag_value(const KernelSignature& sig, const VariantKey& v,
                const char* name) {
  if (const std::string* value = v.flag(name)) return value->front();
  const FlagParam* f = sig.find_flag(name);
  if (!f) fail(ErrorKind::BackendError, sig.id + " has no flag " + name);
  return f->values.front().front();
}

class ExternalExecutor final : public KernelExecutor {
 public:
  explicit ExternalExecutor(const ExternalLibraryConfig& config)
      : symbols_(config.symbols) {
    path_ = config.path;
    if (const char* env = std::getenv("DLAPERF_BLAS_LIBRARY"); env && *env) {
      path_ = env;
    }
    if (path_.empty()) {
      fail(ErrorKind::BackendError, "no BLAS/LAPACK library configured");
    }
    handle_ = dlopen(path_.c_str(), RTLD_NOW | RTLD_LOCAL);
    if (!handle_) {
      fail(ErrorKind::BackendError,
           "cannot load " + path_ + ": " + std::string(dlerror()));
    }
  }
  ~ExternalExecutor() override {
    if (handle_) dlclose(handle_);
  }
  ExternalExecutor(const ExternalExecutor&) = delete;
  ExternalExecutor& operator=(const ExternalExecutor&) = delete;

  std::string id() const override { return "external:" + path_; }

  void run(const KernelSignature& sig, const VariantKey& v,
           std::span<const std::int64_t> s,
           std::span<OperandBuffer> ops) override {
    void* fn = resolve(sig.id);
    auto ld = [&](std::size_t i) { return to_fint(ops[i].ld); };
    auto sc = [&](std::size_t i) {
      return representative_value(v.scalars.at(i).second);
    };
    const std::string& k = sig.id;
    if (k == "dgemm") {
      const char ta = flag_value(sig, v, "transA");
      const char tb = flag_value(sig, v, "transB");
      const fint m = to_fint(s[0]), n = to_fint(s[1]), kk = to_fint(s[2]);
      const fint la = ld(0), lb = ld(1), lc = ld(2);
      const double alpha = sc(0), beta = sc(1);
      reinterpret_cast<DgemmFn>(fn)(&ta, &tb, &m, &n, &kk, &alpha,
                                    ops[0].ptr(), &la, ops[1].ptr(),
                                    &lb, &beta, ops[2].ptr(), &lc, 1, 1);
    } else if (k == "dtrsm" || k == "dtrmm") {
      const char side = flag_value(sig, v, "side");
      const char uplo = flag_value(sig, v, "uplo");
      const char ta = flag_value(sig, v, "transA");
      const char diag = flag_value(sig, v, "diag");
      const fint m = to_fint(s[0]), n = to_fint(s[1]);
      const fint la = ld(0), lb = ld(1);
      const double alpha = sc(0);
      reinterpret_cast<DtrxmFn>(fn)(&side, &uplo, &ta, &diag, &m, &n, &alpha,
                                    ops[0].ptr(), &la, ops[1].ptr(),
                                    &lb, 1, 1, 1, 1);
    } else if (k == "dsyrk") {
      const char uplo = flag_value(sig, v, "uplo");
      const char trans = flag_value(sig, v, "trans");
      const fint n = to_fint(s[0]), kk = to_fint(s[1]);
      const fint la = ld(0), lc = ld(1);
      const double alpha = sc(0), beta = sc(1);
      reinterpret_cast<DsyrkFn>(fn)(&uplo, &trans, &n, &kk, &alpha,
                                    ops[0].ptr(), &la, &beta,
                                    ops[1].ptr(), &lc, 1, 1);
    } else if (k == "dcopy") {
      const fint n = to_fint(s[0]), incx = ld(0), incy = ld(1);
      reinterpret_cast<DcopyFn>(fn)(&n, ops[0].ptr(), &incx,
                                    ops[1].ptr(), &incy);
    } else if (k == "dgeqr2") {
      const fint m = to_fint(s[0]), n = to_fint(s[1]), la = ld(0);
      work_.resize(static_cast<std::size_t>(std::max<std::int64_t>(s[1], 1)));
      fint info = 0;
      reinterpret_cast<Dgeqr2Fn>(fn)(&m, &n, ops[0].ptr(), &la,
                                     ops[1].ptr(), work_.data(), &info);
    } else if (k == "dlarft") {
      const char direct = flag_value(sig, v, "direct");
      const char storev = flag_value(sig, v, "storev");
      const fint n = to_fint(s[0]), kk = to_fint(s[1]);
      const fint lv = ld(0), lt = ld(2);
      reinterpret_cast<DlarftFn>(fn)(&direct, &storev, &n, &kk,
                                     ops[0].ptr(), &lv,
                                     ops[1].ptr(), ops[2].ptr(),
                                     &lt, 1, 1);
    } else if (k == "dpotf2") {
      const char uplo = flag_value(sig, v, "uplo");
      const fint n = to_fint(s[0]), la = ld(0);
      fint info = 0;
      reinterpret_cast<Dpotf2Fn>(fn)(&uplo, &n, ops[0].ptr(), &la,
                                     &info, 1);
    } else {
      fail(ErrorKind::BackendError, "no calling convention known for " + k);
    }
  }

 private:
  void* resolve(const std::string& kernel) {
    const auto it = symbols_.find(kernel);
    const std::string name = it != symbols_.end() ? it->second : kernel + "_";
    void* fn = dlsym(handle_, name.c_str());
    if (!fn) fail(ErrorKind::BackendError, path_ + " lacks symbol " + name);
    return fn;
  }

  std::string path_;
  std::map<std::string, std::string> symbols_;
  void* handle_ = nullptr;
  std::vector<double> work_;
};

}  // namespace

std::unique_ptr<KernelExecutor> make_external_executor(
    const ExternalLibraryConfig& config) {
  return std::make_unique<ExternalExecutor>(config);
}

double calibrate_cycles_per_second() {
#ifdef DLAPERF_HAVE_TSC
  const auto t0 = Clock::now();
  const unsigned long long c0 = __rdtsc();
  std::this_thread::sleep_for(std::chrono::milliseconds(20));
  const unsigned long long c1 = __rdtsc();
  const auto t1 = Clock::now();
  const double seconds = std::chrono::duration<double>(t1 - t0).count();
  if (seconds > 0 && c1 > c0) return static_cast<double>(c1 - c0) / seconds;
#endif
  return 1e9;
}

std::vector<OperandBuffer> allocate_operands(const KernelSignature& sig,
                                             const VariantKey& variant,
                                             std::span<const std::int64_t> sizes) {
  std::vector<OperandBuffer> out;
  std::uint64_t state = 0x9e3779b97f4a7c15ULL;
  const auto extents = operand_extents(sig, variant, sizes);
  for (std::size_t i = 0; i < extents.size(); ++i) {
    const auto& e = extents[i];
    OperandBuffer b;
    b.rows = e.rows;
    b.cols = e.cols;
    b.ld = std::max<std::int64_t>(e.rows, 1);
    b.data.assign(static_cast<std::size_t>(b.ld * std::max<std::int64_t>(e.cols, 1)), 0.0);
    if (is_triangular_input(sig, i)) {
      for (std::int64_t d = 0; d < std::min(e.rows, e.cols); ++d) {
        b.data[static_cast<std::size_t>(d + d * b.ld)] = 1.0;
      }
    } else {
      for (double& x : b.data) {
        state = state * 6364136223846793005ULL + 1442695040888963407ULL;
        x = 0.5 + 0.5 * static_cast<double>(state >> 11) * 0x1.0p-53;
      }
    }
    out.push_back(std::move(b));
  }
  return out;
}

HardwareBackend::HardwareBackend(std::unique_ptr<KernelExecutor> executor,
                                 MachineProfile profile,
                                 double cycles_per_second)
    : executor_(std::move(executor)),
      profile_(profile),
      cycles_per_second_(cycles_per_second > 0 ? cycles_per_second
                                               : calibrate_cycles_per_second()) {
  if (!executor_) fail(ErrorKind::BackendError, "no kernel executor");
  profile_.validate();
  // One element more than twice the cache so the buffer is strictly larger.
  const auto elements =
      static_cast<std::size_t>(2 * profile_.largest_cache_bytes / 8 + 1);
  evict_.assign(elements, 1.0);
}

std::string HardwareBackend::id() const { return "hardware:" + executor_->id(); }

void HardwareBackend::evict() {
  double acc = 0;
  for (double& x : evict_) {
    x += 1.0;
    acc += x;
  }
  sink_ += acc;
}

std::vector<double> HardwareBackend::time(const KernelSignature& sig,
                                          const VariantKey& variant,
                                          std::span<const std::int64_t> sizes,
                                          CacheCondition condition, int reps) {
  auto ops = allocate_operands(sig, variant, sizes);
  std::vector<double> cycles;
  cycles.reserve(static_cast<std::size_t>(std::max(reps, 0)));
  if (condition == CacheCondition::InCache) {
    executor_->run(sig, variant, sizes, ops);
    executor_->run(sig, variant, sizes, ops);
  }
  for (int r = 0; r < reps; ++r) {
    if (condition == CacheCondition::OutOfCache) evict();
    const auto t0 = Clock::now();
    executor_->run(sig, variant, sizes, ops);
    const auto t1 = Clock::now();
    cycles.push_back(std::chrono::duration<double>(t1 - t0).count() *
                     cycles_per_second_);
  }
  return cycles;
}

double run_trace(const Trace& trace, KernelExecutor& executor,
                 std::span<double> memory, const KernelRegistry& registry) {
  const auto& fp = trace.footprint().ranges();
  if (!fp.empty() && fp.back().end > static_cast<std::int64_t>(memory.size_bytes())) {
    fail(ErrorKind::ResourceError, "trace needs " + std::to_string(fp.back().end) +
                                       " bytes, buffer holds " +
                                       std::to_string(memory.size_bytes()));
  }
  // Excluded flags (diag) do not split models but matter for execution, so
  // the key handed to the executor carries them.
  std::vector<VariantKey> keys;
  keys.reserve(trace.size());
  std::vector<std::vector<OperandBuffer>> prepared;
  prepared.reserve(trace.size());
  for (const KernelCall& call : trace.calls()) {
    std::vector<OperandBuffer> ops;
    for (const CallOperand& op : call.operands) {
      if (op.ld <= 0 || op.offset % 8 != 0) {
        fail(ErrorKind::InvalidOperand,
             call.kernel + " operand " + op.label + " has no storage layout");
      }
      OperandBuffer b;
      b.ld = op.ld;
      b.view = memory.data() + op.offset / 8;
      ops.push_back(std::move(b));
    }
    prepared.push_back(std::move(ops));
    VariantKey key = call.variant;
    for (const auto& [name, value] : call.flags) {
      if (!key.flag(name)) key.flags.emplace_back(name, value);
    }
    keys.push_back(std::move(key));
  }
  const auto t0 = Clock::now();
  for (std::size_t i = 0; i < trace.size(); ++i) {
    const KernelCall& call = trace[i];
    executor.run(registry.get(call.kernel), keys[i], call.sizes, prepared[i]);
  }
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

}  // namespace dlaperf
