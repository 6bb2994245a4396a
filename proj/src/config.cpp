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

#include "dlaperf/config.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "dlaperf/algorithms.hpp"
#include "dlaperf/error.hpp"
#include "json.hpp"
#include "json_io.hpp"

namespace dlaperf {

using nlohmann::json;

BackendKind parse_backend_kind(std::string_view t) {
  if (t == "synthetic") return BackendKind::Synthetic;
  if (t == "reference") return BackendKind::Reference;
  if (t == "external") return BackendKind::External;
  fail(ErrorKind::InvalidArgument, "backend must be synthetic, reference or external, got '" +
                                       std::string(t) + "'");
}

Config Config::from_json(std::string_view text) {
  Config c;
  try {
    const json doc = json::parse(text);
    if (!doc.is_object()) fail(ErrorKind::ParseError, "config must be a JSON object");
    for (const auto& [key, v] : doc.items()) {
      if (key == "machine") {
        c.machine = jsonio::machine_from_json(v);
      } else if (key == "refinement") {
        c.refinement = jsonio::refinement_from_json(v);
      } else if (key == "domain") {
        c.domain_lo = v.value("lo", c.domain_lo);
        c.domain_hi = v.value("hi", c.domain_hi);
        if (c.domain_lo < 1 || c.domain_hi < c.domain_lo) {
          fail(ErrorKind::ParseError, "domain needs 1 <= lo <= hi");
        }
      } else if (key == "kernels") {
        for (const auto& [id, k] : v.items()) {
          if (k.contains("domain")) {
            auto& boxes = c.kernel_domains[id];
            for (const json& b : k.at("domain")) boxes.push_back(jsonio::box_from_json(b));
          }
          if (k.contains("variants")) {
            c.kernel_variants[id] = k.at("variants").get<std::vector<std::string>>();
          }
        }
      } else if (key == "backend") {
        if (v.contains("kind")) c.backend = parse_backend_kind(v.at("kind").get<std::string>());
        if (v.contains("synthetic")) c.synthetic_json = v.at("synthetic").dump();
        if (v.contains("library")) {
          const json& lib = v.at("library");
          c.library.path = lib.value("path", std::string());
          c.library.symbols =
              lib.value("symbols", std::map<std::string, std::string>{});
        }
        c.pin_core = v.value("pin_core", -1);
      } else {
        fail(ErrorKind::ParseError, "unknown config key '" + key + "'");
      }
    }
  } catch (const json::exception& e) {
    fail(ErrorKind::ParseError, std::string("config: ") + e.what());
  }
  return c;
}

Config Config::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::ParseError, "cannot open config " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return from_json(ss.str());
}

std::vector<Box> Config::domain_for(const KernelSignature& sig) const {
  if (auto it = kernel_domains.find(sig.id); it != kernel_domains.end()) return it->second;
  Box b;
  b.lo.assign(sig.dims(), domain_lo);
  b.hi.assign(sig.dims(), domain_hi);
  return {b};
}

std::vector<VariantKey> algorithm_variants(const KernelSignature& sig) {
  std::set<VariantKey> seen;
  std::vector<Trace> traces;
  traces.push_back(qr_trace(64, 64, 16));
  for (const auto& id : cholesky_ids()) traces.push_back(chol_trace(id, 64, 16));
  for (const Trace& t : traces) {
    for (const KernelCall& c : t.calls()) {
      if (c.kernel == sig.id) seen.insert(c.variant);
    }
  }
  return {seen.begin(), seen.end()};
}

std::vector<VariantKey> Config::variants_for(const KernelSignature& sig) const {
  if (auto it = kernel_variants.find(sig.id); it != kernel_variants.end()) {
    std::vector<VariantKey> out;
    for (const auto& text : it->second) out.push_back(parse_variant(sig, text));
    return out;
  }
  auto v = algorithm_variants(sig);
  if (v.empty()) v = all_variants(sig);
  return v;
}

std::unique_ptr<Backend> Config::make_backend(const KernelRegistry& registry) const {
  switch (backend) {
    case BackendKind::Synthetic:
      return std::make_unique<SyntheticBackend>(SyntheticSpec::from_json(synthetic_json, registry));
    case BackendKind::Reference:
      if (pin_core >= 0) pin_to_core(pin_core);
      return std::make_unique<HardwareBackend>(make_reference_executor(), machine);
    case BackendKind::External:
      if (pin_core >= 0) pin_to_core(pin_core);
      return std::make_unique<HardwareBackend>(make_external_executor(library), machine);
  }
  fail(ErrorKind::InvalidArgument, "unknown backend");
}

}  // namespace dlaperf
