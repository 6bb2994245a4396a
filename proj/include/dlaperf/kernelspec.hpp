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

#include <array>
#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace dlaperf {

/// Scalars take a separate sub-model for each special value; everything
/// else shares the General model.
enum class ScalarClass { MinusOne, Zero, One, General };

/// Exact comparison against -1, 0 and 1 (no epsilon). Throws InvalidScalar
/// for NaN or infinities.
ScalarClass classify_scalar(double value);

std::string_view to_string(ScalarClass c) noexcept;
ScalarClass parse_scalar_class(std::string_view text);
/// Value handed to a kernel when executing a given scalar class.
double representative_value(ScalarClass c) noexcept;

struct FlagParam {
  std::string name;
  std::vector<std::string> values;
  /// Excluded flags (diag) never enter the variant key.
  bool excluded = false;
};

/// Integer expression deriving an operand extent from the size arguments.
struct DimExpr {
  enum class Kind { Size, Constant, Min, FlagCase };

  Kind kind = Kind::Constant;
  std::int64_t value = 0;  // size index or constant
  std::string flag;
  std::vector<std::string> case_values;
  std::vector<DimExpr> children;
};

struct OperandRule {
  std::string name;
  DimExpr rows;
  DimExpr cols;
  std::string ld_param;  // empty: contiguous
};

/// Exact rational polynomial in the size arguments, optionally selected by
/// one flag value.
struct FlopFormula {
  struct Term {
    std::int64_t num = 0;
    std::int64_t den = 1;
    std::array<int, 3> powers{};
  };
  struct Case {
    std::string flag_value;  // empty when unconditional
    std::vector<Term> terms;
  };

  std::string flag;  // empty when unconditional
  std::vector<Case> cases;
};

struct KernelSignature {
  std::string id;
  std::vector<FlagParam> flags;
  std::vector<std::string> sizes;
  std::vector<std::string> scalars;
  std::vector<OperandRule> operands;
  std::vector<std::string> lds;
  std::optional<FlopFormula> flops;

  std::size_t dims() const noexcept { return sizes.size(); }
  const FlagParam* find_flag(std::string_view name) const;
  std::optional<std::size_t> operand_index(std::string_view name) const;
};

/// Identifies one sub-model: values of every non-excluded flag (signature
/// order) plus the class of every scalar. Ordered and hashable by value.
struct VariantKey {
  std::vector<std::pair<std::string, std::string>> flags;
  std::vector<std::pair<std::string, ScalarClass>> scalars;

  const std::string* flag(std::string_view name) const;

  /// Canonical text form, e.g. "side=L,uplo=L,transA=N|alpha=One".
  std::string str() const;
  static VariantKey parse(std::string_view text);

  auto operator<=>(const VariantKey&) const = default;
  bool operator==(const VariantKey&) const = default;
};

VariantKey variant_key(const KernelSignature& sig,
                       const std::map<std::string, std::string>& flags,
                       const std::map<std::string, double>& scalars);

/// Accepts either the canonical form or the compact positional form
/// "L,L,N,1" (flag values then scalar values in signature order).
VariantKey parse_variant(const KernelSignature& sig, std::string_view text);

/// Every key the signature admits, enumerated in signature order.
std::vector<VariantKey> all_variants(const KernelSignature& sig);

struct OperandExtent {
  std::string name;
  std::int64_t rows = 0;
  std::int64_t cols = 0;
  std::int64_t ld = 0;

  friend bool operator==(const OperandExtent&, const OperandExtent&) = default;
};

/// Concrete operand shapes. Missing leading dimensions default to the row
/// extent; an ld below the row extent throws InvalidLeadingDimension.
std::vector<OperandExtent> operand_extents(
    const KernelSignature& sig, const VariantKey& variant,
    std::span<const std::int64_t> sizes,
    const std::map<std::string, std::int64_t>& lds = {});

std::int64_t evaluate(const DimExpr& expr, std::span<const std::int64_t> sizes,
                      const VariantKey& variant);

/// Floating-point operation count; throws UnknownKernel if the signature has
/// no formula. Integral results are exact.
double kernel_flops(const KernelSignature& sig, const VariantKey& variant,
                    std::span<const std::int64_t> sizes);

/// Signature lookup table. The shipped set is embedded from
/// data/kernels.json; further manifests can be merged at runtime.
class KernelRegistry {
 public:
  static const KernelRegistry& builtin();
  static KernelRegistry from_json(std::string_view manifest);
  static KernelRegistry from_file(const std::string& path);

  void merge(const KernelRegistry& other);
  const KernelSignature& get(std::string_view id) const;
  bool contains(std::string_view id) const;
  std::vector<std::string> ids() const;

 private:
  std::map<std::string, KernelSignature, std::less<>> signatures_;
};

}  // namespace dlaperf
