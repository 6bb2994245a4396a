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

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dlaperf/kernelspec.hpp"
#include "dlaperf/modeler.hpp"
#include "dlaperf/timing.hpp"

namespace dlaperf {

inline constexpr int kModelFileVersion = 1;

struct BuildMetadata {
  RefinementConfig config;
  std::string backend;
  MachineProfile machine;
  /// Left empty unless the caller sets it; an empty timestamp is omitted
  /// from the file so repeated builds are byte-identical.
  std::string timestamp;
  std::int64_t total_samples = 0;

  friend bool operator==(const BuildMetadata&, const BuildMetadata&) = default;
};

/// In-cache and out-of-cache models of one variant.
struct VariantModels {
  PiecewisePolynomial ic;
  PiecewisePolynomial oc;

  const PiecewisePolynomial& at(CacheCondition c) const {
    return c == CacheCondition::InCache ? ic : oc;
  }
  friend bool operator==(const VariantModels&, const VariantModels&) = default;
};

/// kernel -> variant -> {ic, oc} -> piecewise polynomial.
class PerfModel {
 public:
  PerfModel() = default;
  explicit PerfModel(std::string kernel) : kernel_(std::move(kernel)) {}

  const std::string& kernel() const noexcept { return kernel_; }
  BuildMetadata& metadata() noexcept { return meta_; }
  const BuildMetadata& metadata() const noexcept { return meta_; }
  const std::map<VariantKey, VariantModels>& variants() const noexcept {
    return variants_;
  }

  void add_variant(const VariantKey& key, VariantModels models);
  bool has_variant(const VariantKey& key) const { return variants_.contains(key); }

  /// Cycles, clamped at 0. Throws UnknownVariant / OutOfDomain.
  double estimate(const VariantKey& variant, CacheCondition condition,
                  std::span<const std::int64_t> sizes) const;

  std::string to_json() const;
  static PerfModel from_json(std::string_view text);
  void save(const std::string& path) const;
  static PerfModel load(const std::string& path);

  friend bool operator==(const PerfModel&, const PerfModel&) = default;

 private:
  std::string kernel_;
  BuildMetadata meta_;
  std::map<VariantKey, VariantModels> variants_;
};

/// Builds both cache conditions of one variant through `backend`.
VariantModels build_variant(Backend& backend, const KernelSignature& sig,
                            const VariantKey& variant,
                            const std::vector<Box>& domain,
                            const RefinementConfig& cfg,
                            std::int64_t* samples = nullptr);

PerfModel build_model(Backend& backend, const KernelSignature& sig,
                      const std::vector<VariantKey>& variants,
                      const std::vector<Box>& domain,
                      const RefinementConfig& cfg,
                      const MachineProfile& machine);

/// Anything the predictor can query for per-call estimates.
class ModelSource {
 public:
  virtual ~ModelSource() = default;
  virtual double estimate(std::string_view kernel, const VariantKey& variant,
                          CacheCondition condition,
                          std::span<const std::int64_t> sizes) = 0;
};

/// Per-kernel models, loaded from "<dir>/<kernel>.json" on first use. With a
/// builder installed, variants missing from a model are built on demand and
/// added (and written back when the library has a directory).
class ModelLibrary : public ModelSource {
 public:
  using Builder = std::function<VariantModels(const KernelSignature&, const VariantKey&)>;

  ModelLibrary() = default;
  explicit ModelLibrary(std::string directory,
                        const KernelRegistry& registry = KernelRegistry::builtin());

  void add(PerfModel model);
  void set_builder(Builder builder) { builder_ = std::move(builder); }
  const PerfModel& model(std::string_view kernel);

  double estimate(std::string_view kernel, const VariantKey& variant,
                  CacheCondition condition,
                  std::span<const std::int64_t> sizes) override;

 private:
  std::string directory_;
  const KernelRegistry* registry_ = &KernelRegistry::builtin();
  std::map<std::string, PerfModel, std::less<>> models_;
  Builder builder_;
};

/// Closed-form estimates (tests, synthetic studies).
class FunctionModels : public ModelSource {
 public:
  using Fn = std::function<double(std::string_view, const VariantKey&,
                                  CacheCondition, std::span<const std::int64_t>)>;
  explicit FunctionModels(Fn fn) : fn_(std::move(fn)) {}
  double estimate(std::string_view kernel, const VariantKey& variant,
                  CacheCondition condition,
                  std::span<const std::int64_t> sizes) override {
    return fn_(kernel, variant, condition, sizes);
  }

 private:
  Fn fn_;
};

}  // namespace dlaperf
