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

#include "dlaperf/timing.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>

#include "dlaperf/error.hpp"
#include "json.hpp"

#if defined(__linux__)
#include <pthread.h>
#include <sched.h>
#endif

namespace dlaperf {

using nlohmann::json;

std::string_view to_string(CacheCondition c) noexcept {
  return c == CacheCondition::InCache ? "ic" : "oc";
}

CacheCondition parse_condition(std::string_view text) {
  if (text == "ic" || text == "in-cache" || text == "InCache") {
    return CacheCondition::InCache;
  }
  if (text == "oc" || text == "out-of-cache" || text == "OutOfCache") {
    return CacheCondition::OutOfCache;
  }
  fail(ErrorKind::InvalidArgument,
       "cache condition must be ic or oc, got '" + std::string(text) + "'");
}

void MachineProfile::validate() const {
  if (largest_cache_bytes <= 0 || flops_per_cycle <= 0 || element_bytes <= 0) {
    fail(ErrorKind::InvalidArgument, "machine profile values must be positive");
  }
}

double median(std::span<const double> values) {
  if (values.empty()) fail(ErrorKind::InvalidArgument, "median of nothing");
  std::vector<double> v(values.begin(), values.end());
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  if (v.size() % 2 == 1) return v[mid];
  const double upper = v[mid];
  const double lower = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
  return lower + (upper - lower) / 2;
}

namespace {
std::mutex& measurement_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace

MeasurementSession::MeasurementSession()
    : lock_(measurement_mutex(), std::try_to_lock) {
  if (!lock_.owns_lock()) {
    fail(ErrorKind::ResourceError,
         "another measurement session is active; timing must be serialized");
  }
}

MeasurementSession::~MeasurementSession() = default;

Sample measure(Backend& backend, const KernelSignature& sig,
               const VariantKey& variant, std::span<const std::int64_t> sizes,
               CacheCondition condition, int reps) {
  if (reps < 1) fail(ErrorKind::InvalidArgument, "repetitions must be >= 1");
  MeasurementSession session;

  Sample s;
  s.point.assign(sizes.begin(), sizes.end());
  s.repetitions = reps;
  if (condition == CacheCondition::InCache && backend.cache_bytes() > 0) {
    std::int64_t bytes = 0;
    for (const auto& e : operand_extents(sig, variant, sizes)) {
      bytes += e.rows * e.cols * 8;
    }
    s.footprint_exceeds_cache = bytes > backend.cache_bytes();
  }
  try {
    s.cycles_per_rep = backend.time(sig, variant, sizes, condition, reps);
  } catch (const Error&) {
    throw;
  } catch (const std::bad_alloc&) {
    fail(ErrorKind::ResourceError, "out of memory while timing " + sig.id);
  } catch (const std::exception& e) {
    fail(ErrorKind::BackendError, backend.id() + ": " + e.what());
  }
  if (static_cast<int>(s.cycles_per_rep.size()) != reps) {
    fail(ErrorKind::BackendError,
         backend.id() + " returned " + std::to_string(s.cycles_per_rep.size()) +
             " timings for " + std::to_string(reps) + " repetitions");
  }
  s.median_cycles = median(s.cycles_per_rep);
  return s;
}

void pin_to_core(int core) {
#if defined(__linux__)
  cpu_set_t set;
  CPU_ZERO(&set);
  CPU_SET(core, &set);
  if (pthread_setaffinity_np(pthread_self(), sizeof(set), &set) != 0) {
    fail(ErrorKind::ResourceError, "cannot pin to core " + std::to_string(core));
  }
#else
  (void)core;
  fail(ErrorKind::ResourceError, "core pinning is only supported on Linux");
#endif
}

// --- synthetic ------------------------------------------------------------

double SyntheticKernelCost::evaluate(const KernelSignature& sig,
                                     const VariantKey& variant,
                                     CacheCondition condition,
                                     std::span<const std::int64_t> sizes) const {
  double cost = per_call;
  for (const auto& t : terms) {
    double v = t.coeff;
    for (std::size_t d = 0; d < sizes.size(); ++d) {
      v *= std::pow(static_cast<double>(sizes[d]), t.powers[d]);
    }
    cost += v;
  }
  if (flops_per_cycle > 0) cost += kernel_flops(sig, variant, sizes) / flops_per_cycle;
  for (const auto& s : steps) {
    if (s.dim < sizes.size() && sizes[s.dim] >= s.at) cost *= s.factor;
  }
  if (condition == CacheCondition::InCache) cost *= in_cache_factor;
  return cost;
}

namespace {

std::size_t size_index(const KernelSignature* sig, const std::string& name) {
  if (!sig) {
    fail(ErrorKind::ParseError,
         "size-dependent terms need a kernel; '" + name + "' is ambiguous here");
  }
  const auto it = std::find(sig->sizes.begin(), sig->sizes.end(), name);
  if (it == sig->sizes.end()) {
    fail(ErrorKind::ParseError, sig->id + " has no size '" + name + "'");
  }
  return static_cast<std::size_t>(it - sig->sizes.begin());
}

SyntheticKernelCost parse_cost(const json& j, const KernelSignature* sig) {
  SyntheticKernelCost c;
  c.per_call = j.value("per_call", 0.0);
  c.flops_per_cycle = j.value("flops_per_cycle", 0.0);
  c.in_cache_factor = j.value("in_cache_factor", 1.0);
  for (const auto& t : j.value("terms", json::array())) {
    SyntheticKernelCost::Monomial m;
    m.coeff = t.at("coeff").get<double>();
    const json powers = t.value("powers", json::object());
    for (const auto& [name, p] : powers.items()) {
      m.powers[size_index(sig, name)] = p.get<int>();
    }
    c.terms.push_back(m);
  }
  for (const auto& s : j.value("steps", json::array())) {
    SyntheticKernelCost::Step st;
    st.dim = size_index(sig, s.at("size").get<std::string>());
    st.at = s.at("at").get<std::int64_t>();
    st.factor = s.at("factor").get<double>();
    c.steps.push_back(st);
  }
  if (c.in_cache_factor <= 0) {
    fail(ErrorKind::ParseError, "in_cache_factor must be positive");
  }
  return c;
}

}  // namespace

SyntheticSpec SyntheticSpec::from_json(std::string_view text,
                                       const KernelRegistry& registry) {
  SyntheticSpec spec;
  try {
    const json j = json::parse(text);
    spec.noise = j.value("noise", 0.0);
    spec.seed = j.value("seed", std::uint64_t{0});
    if (j.contains("default")) spec.fallback = parse_cost(j.at("default"), nullptr);
    const json kernels = j.value("kernels", json::object());
    const json variants = j.value("variants", json::object());
    for (const auto& [kernel, body] : kernels.items()) {
      spec.kernels[kernel] = parse_cost(body, &registry.get(kernel));
    }
    for (const auto& [key, body] : variants.items()) {
      const auto slash = key.find('/');
      if (slash == std::string::npos) {
        fail(ErrorKind::ParseError, "variant override '" + key +
                                        "' must read <kernel>/<variant>");
      }
      const auto& sig = registry.get(key.substr(0, slash));
      const auto variant = parse_variant(sig, key.substr(slash + 1));
      spec.variants[sig.id + "/" + variant.str()] = parse_cost(body, &sig);
    }
  } catch (const json::exception& e) {
    fail(ErrorKind::ParseError, std::string("synthetic backend spec: ") + e.what());
  }
  if (spec.noise < 0 || spec.noise >= 1) {
    fail(ErrorKind::ParseError, "synthetic noise amplitude must lie in [0, 1)");
  }
  return spec;
}

CostFunction SyntheticSpec::cost_function() const {
  return [spec = *this](const KernelSignature& sig, const VariantKey& variant,
                        CacheCondition condition,
                        std::span<const std::int64_t> sizes) {
    if (auto it = spec.variants.find(sig.id + "/" + variant.str());
        it != spec.variants.end()) {
      return it->second.evaluate(sig, variant, condition, sizes);
    }
    if (auto it = spec.kernels.find(sig.id); it != spec.kernels.end()) {
      return it->second.evaluate(sig, variant, condition, sizes);
    }
    return spec.fallback.evaluate(sig, variant, condition, sizes);
  };
}

SyntheticBackend::SyntheticBackend(CostFunction cost, double noise,
                                   std::uint64_t seed)
    : cost_(std::move(cost)), noise_(noise), seed_(seed), rng_(seed) {
  if (noise < 0 || noise >= 1) {
    fail(ErrorKind::InvalidArgument, "noise amplitude must lie in [0, 1)");
  }
}

SyntheticBackend::SyntheticBackend(const SyntheticSpec& spec)
    : SyntheticBackend(spec.cost_function(), spec.noise, spec.seed) {}

std::string SyntheticBackend::id() const {
  return "synthetic(noise=" + json(noise_).dump() +
         ",seed=" + std::to_string(seed_) + ")";
}

void SyntheticBackend::reseed(std::uint64_t seed) {
  seed_ = seed;
  rng_.seed(seed);
}

double SyntheticBackend::next_unit() {
  // 53 random mantissa bits; independent of the standard library's
  // distribution implementations.
  return static_cast<double>(rng_() >> 11) * 0x1.0p-53;
}

double SyntheticBackend::cost(const KernelSignature& sig,
                              const VariantKey& variant,
                              CacheCondition condition,
                              std::span<const std::int64_t> sizes) const {
  return cost_(sig, variant, condition, sizes);
}

std::vector<double> SyntheticBackend::time(const KernelSignature& sig,
                                           const VariantKey& variant,
                                           std::span<const std::int64_t> sizes,
                                           CacheCondition condition, int reps) {
  const double base = cost(sig, variant, condition, sizes);
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(reps));
  for (int r = 0; r < reps; ++r) {
    double u = 0;
    if (noise_ > 0) u = noise_ * (2 * next_unit() - 1);
    out.push_back(base * (1 + u));
  }
  return out;
}

}  // namespace dlaperf
