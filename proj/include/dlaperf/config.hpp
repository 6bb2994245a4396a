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

#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "dlaperf/hardware.hpp"
#include "dlaperf/kernelspec.hpp"
#include "dlaperf/modeler.hpp"
#include "dlaperf/timing.hpp"

namespace dlaperf {

enum class BackendKind { Synthetic, Reference, External };
BackendKind parse_backend_kind(std::string_view text);

/// Contents of a JSON config file. Every block is optional:
/// {
///   "machine":    {"largest_cache_bytes", "flops_per_cycle", "element_bytes"},
///   "refinement": {"min_width", "grid", "target_error", "min_box_side",
///                  "degree", "oversample", "error_metric", "max_depth",
///                  "repetitions"},
///   "domain":     {"lo": 8, "hi": 1024},
///   "kernels":    {"<id>": {"domain": [{"lo": [...], "hi": [...]}],
///                           "variants": ["side=R,...|alpha=One", ...]}},
///   "backend":    {"kind": "synthetic" | "reference" | "external",
///                  "synthetic": {...}, "library": {"path", "symbols"},
///                  "pin_core": -1}
/// }
struct Config {
  MachineProfile machine;
  RefinementConfig refinement;
  std::int64_t domain_lo = 8;
  std::int64_t domain_hi = 1024;
  std::map<std::string, std::vector<Box>> kernel_domains;
  std::map<std::string, std::vector<std::string>> kernel_variants;
  BackendKind backend = BackendKind::Synthetic;
  std::string synthetic_json = "{}";
  ExternalLibraryConfig library;
  int pin_core = -1;

  static Config from_json(std::string_view text);
  static Config from_file(const std::string& path);

  std::vector<Box> domain_for(const KernelSignature& sig) const;
  /// Configured variants, else the variants the shipped algorithms issue.
  std::vector<VariantKey> variants_for(const KernelSignature& sig) const;
  std::unique_ptr<Backend> make_backend(const KernelRegistry& registry) const;
};

/// Variants of `kernel` appearing in the traces of the shipped algorithms.
std::vector<VariantKey> algorithm_variants(const KernelSignature& sig);

}  // namespace dlaperf
