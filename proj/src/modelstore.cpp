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

#include "dlaperf/modelstore.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "dlaperf/error.hpp"
#include "json.hpp"
#include "json_io.hpp"

namespace dlaperf {

using nlohmann::json;

void PerfModel::add_variant(const VariantKey& key, VariantModels models) {
  variants_[key] = std::move(models);
}

double PerfModel::estimate(const VariantKey& variant, CacheCondition condition,
                           std::span<const std::int64_t> sizes) const {
  const auto it = variants_.find(variant);
  if (it == variants_.end()) {
    fail(ErrorKind::UnknownVariant,
         kernel_ + " has no model for variant " + variant.str());
  }
  try {
    return it->second.at(condition).evaluate(sizes);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::OutOfDomain) throw;
    std::string inner = e.what();
    const std::string prefix = std::string(to_string(ErrorKind::OutOfDomain)) + ": ";
    if (inner.rfind(prefix, 0) == 0) inner.erase(0, prefix.size());
    fail(ErrorKind::OutOfDomain, kernel_ + " " + variant.str() + " (" +
                                     std::string(to_string(condition)) + "): " + inner);
  }
}

namespace {

json piecewise_to_json(const PiecewisePolynomial& p) {
  json domain = json::array();
  for (const Box& b : p.domain()) domain.push_back(jsonio::to_json(b));
  json patches = json::array();
  for (const PolyPatch& patch : p.patches()) {
    patches.push_back({{"box", jsonio::to_json(patch.box)},
                       {"degree", patch.degree},
                       {"coeffs", patch.coeffs},
                       {"fit_error", patch.fit_error},
                       {"samples", patch.sample_count}});
  }
  return {{"domain", domain}, {"patches", patches}};
}

PiecewisePolynomial piecewise_from_json(const json& j) {
  std::vector<Box> domain;
  for (const json& b : j.at("domain")) domain.push_back(jsonio::box_from_json(b));
  std::vector<PolyPatch> patches;
  for (const json& pj : j.at("patches")) {
    PolyPatch p;
    p.box = jsonio::box_from_json(pj.at("box"));
    p.degree = pj.at("degree").get<int>();
    p.coeffs = pj.at("coeffs").get<std::vector<double>>();
    p.fit_error = pj.at("fit_error").get<double>();
    p.sample_count = pj.at("samples").get<std::int64_t>();
    std::size_t expected = 1;
    for (std::size_t d = 0; d < p.box.dims(); ++d) {
      expected *= static_cast<std::size_t>(p.degree + 1);
    }
    if (p.degree < 0 || p.coeffs.size() != expected) {
      fail(ErrorKind::ParseError, "patch " + p.box.str() + " has " +
                                      std::to_string(p.coeffs.size()) +
                                      " coefficients, expected " + std::to_string(expected));
    }
    patches.push_back(std::move(p));
  }
  return PiecewisePolynomial(std::move(domain), std::move(patches));
}

}  // namespace

std::string PerfModel::to_json() const {
  json conditions = {{"ic", json::object()}, {"oc", json::object()}};
  for (const auto& [key, m] : variants_) {
    conditions["ic"][key.str()] = piecewise_to_json(m.ic);
    conditions["oc"][key.str()] = piecewise_to_json(m.oc);
  }
  json doc = {{"version", kModelFileVersion},
              {"kernel", kernel_},
              {"machine", jsonio::to_json(meta_.machine)},
              {"config", jsonio::to_json(meta_.config)},
              {"backend", meta_.backend},
              {"total_samples", meta_.total_samples},
              {"conditions", conditions}};
  if (!meta_.timestamp.empty()) doc["timestamp"] = meta_.timestamp;
  return doc.dump(1) + "\n";
}

PerfModel PerfModel::from_json(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    fail(ErrorKind::ParseError, std::string("model file: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("version")) {
    fail(ErrorKind::VersionError, "model file has no schema version");
  }
  if (!doc["version"].is_number_integer() ||
      doc["version"].get<int>() != kModelFileVersion) {
    fail(ErrorKind::VersionError, "model file version " + doc["version"].dump() +
                                      " is not supported (expected " +
                                      std::to_string(kModelFileVersion) + ")");
  }
  try {
    PerfModel m(doc.at("kernel").get<std::string>());
    m.meta_.machine = jsonio::machine_from_json(doc.at("machine"));
    m.meta_.config = jsonio::refinement_from_json(doc.at("config"));
    m.meta_.backend = doc.at("backend").get<std::string>();
    m.meta_.total_samples = doc.at("total_samples").get<std::int64_t>();
    m.meta_.timestamp = doc.value("timestamp", std::string());
    const json& cond = doc.at("conditions");
    const json& ic = cond.at("ic");
    const json& oc = cond.at("oc");
    if (ic.size() != oc.size()) {
      fail(ErrorKind::ParseError, "ic and oc hold different variant sets");
    }
    for (const auto& [key, value] : ic.items()) {
      if (!oc.contains(key)) {
        fail(ErrorKind::ParseError, "variant " + key + " lacks an out-of-cache model");
      }
      m.variants_[VariantKey::parse(key)] =
          VariantModels{piecewise_from_json(value), piecewise_from_json(oc.at(key))};
    }
    return m;
  } catch (const json::exception& e) {
    fail(ErrorKind::ParseError, std::string("model file: ") + e.what());
  }
}

void PerfModel::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorKind::ResourceError, "cannot write " + path);
  out << to_json();
  if (!out) fail(ErrorKind::ResourceError, "write to " + path + " failed");
}

PerfModel PerfModel::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::ParseError, "cannot open model file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return from_json(ss.str());
}

VariantModels build_variant(Backend& backend, const KernelSignature& sig,
                            const VariantKey& variant,
                            const std::vector<Box>& domain,
                            const RefinementConfig& cfg, std::int64_t* samples) {
  VariantModels out;
  for (CacheCondition c : {CacheCondition::InCache, CacheCondition::OutOfCache}) {
    RefinementResult r = refine(backend, sig, variant, c, domain, cfg);
    if (samples) *samples += r.total_samples;
    PiecewisePolynomial p(domain, std::move(r.patches));
    (c == CacheCondition::InCache ? out.ic : out.oc) = std::move(p);
  }
  return out;
}

PerfModel build_model(Backend& backend, const KernelSignature& sig,
                      const std::vector<VariantKey>& variants,
                      const std::vector<Box>& domain,
                      const RefinementConfig& cfg,
                      const MachineProfile& machine) {
  PerfModel m(sig.id);
  m.metadata().config = cfg;
  m.metadata().backend = backend.id();
  m.metadata().machine = machine;
  for (const VariantKey& v : variants) {
    m.add_variant(v, build_variant(backend, sig, v, domain, cfg, &m.metadata().total_samples));
  }
  return m;
}

ModelLibrary::ModelLibrary(std::string directory, const KernelRegistry& registry)
    : directory_(std::move(directory)), registry_(&registry) {}

void ModelLibrary::add(PerfModel model) {
  std::string k = model.kernel();
  models_.insert_or_assign(std::move(k), std::move(model));
}

const PerfModel& ModelLibrary::model(std::string_view kernel) {
  if (auto it = models_.find(kernel); it != models_.end()) return it->second;
  if (!directory_.empty()) {
    const std::filesystem::path path =
        std::filesystem::path(directory_) / (std::string(kernel) + ".json");
    if (std::filesystem::exists(path)) {
      auto [it, _] = models_.emplace(std::string(kernel), PerfModel::load(path.string()));
      return it->second;
    }
  }
  if (builder_) {
    auto [it, _] = models_.emplace(std::string(kernel), PerfModel(std::string(kernel)));
    return it->second;
  }
  fail(ErrorKind::UnknownVariant, "no model for kernel " + std::string(kernel) +
                                      (directory_.empty() ? "" : " in " + directory_));
}

double ModelLibrary::estimate(std::string_view kernel, const VariantKey& variant,
                              CacheCondition condition,
                              std::span<const std::int64_t> sizes) {
  const PerfModel& m = model(kernel);
  if (!m.has_variant(variant) && builder_) {
    PerfModel& mutable_model = models_.find(kernel)->second;
    mutable_model.add_variant(variant, builder_(registry_->get(kernel), variant));
    if (!directory_.empty()) {
      std::filesystem::create_directories(directory_);
      mutable_model.save(
          (std::filesystem::path(directory_) / (std::string(kernel) + ".json")).string());
    }
  }
  return m.estimate(variant, condition, sizes);
}

}  // namespace dlaperf
