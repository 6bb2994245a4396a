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

#include "dlaperf/kernelspec.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "builtin_manifest.hpp"
#include "dlaperf/error.hpp"
#include "json.hpp"

namespace dlaperf {

using nlohmann::json;

ScalarClass classify_scalar(double value) {
  if (!std::isfinite(value)) {
    fail(ErrorKind::InvalidScalar, "non-finite scalar argument");
  }
  if (value == -1.0) return ScalarClass::MinusOne;
  if (value == 0.0) return ScalarClass::Zero;
  if (value == 1.0) return ScalarClass::One;
  return ScalarClass::General;
}

std::string_view to_string(ScalarClass c) noexcept {
  switch (c) {
    case ScalarClass::MinusOne: return "MinusOne";
    case ScalarClass::Zero: return "Zero";
    case ScalarClass::One: return "One";
    case ScalarClass::General: return "General";
  }
  return "General";
}

ScalarClass parse_scalar_class(std::string_view text) {
  if (text == "MinusOne") return ScalarClass::MinusOne;
  if (text == "Zero") return ScalarClass::Zero;
  if (text == "One") return ScalarClass::One;
  if (text == "General") return ScalarClass::General;
  // Numeric spelling, e.g. "-1" or "0.3".
  std::string owned(text);
  std::size_t used = 0;
  double v = 0;
  try {
    v = std::stod(owned, &used);
  } catch (const std::exception&) {
    fail(ErrorKind::InvalidScalar, "cannot parse scalar '" + owned + "'");
  }
  if (used != owned.size()) {
    fail(ErrorKind::InvalidScalar, "cannot parse scalar '" + owned + "'");
  }
  return classify_scalar(v);
}

double representative_value(ScalarClass c) noexcept {
  switch (c) {
    case ScalarClass::MinusOne: return -1.0;
    case ScalarClass::Zero: return 0.0;
    case ScalarClass::One: return 1.0;
    case ScalarClass::General: return 1.5;
  }
  return 1.5;
}

const FlagParam* KernelSignature::find_flag(std::string_view name) const {
  for (const auto& f : flags) {
    if (f.name == name) return &f;
  }
  return nullptr;
}

std::optional<std::size_t> KernelSignature::operand_index(
    std::string_view name) const {
  for (std::size_t i = 0; i < operands.size(); ++i) {
    if (operands[i].name == name) return i;
  }
  return std::nullopt;
}

const std::string* VariantKey::flag(std::string_view name) const {
  for (const auto& [k, v] : flags) {
    if (k == name) return &v;
  }
  return nullptr;
}

std::string VariantKey::str() const {
  std::string out;
  for (std::size_t i = 0; i < flags.size(); ++i) {
    if (i) out += ',';
    out += flags[i].first + '=' + flags[i].second;
  }
  out += '|';
  for (std::size_t i = 0; i < scalars.size(); ++i) {
    if (i) out += ',';
    out += scalars[i].first + '=' + std::string(to_string(scalars[i].second));
  }
  return out;
}

namespace {

std::vector<std::string> split(std::string_view text, char sep) {
  std::vector<std::string> parts;
  if (text.empty()) return parts;
  std::size_t start = 0;
  while (true) {
    const auto pos = text.find(sep, start);
    parts.emplace_back(text.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

std::pair<std::string, std::string> split_assignment(const std::string& item) {
  const auto eq = item.find('=');
  if (eq == std::string::npos || eq == 0) {
    fail(ErrorKind::ParseError, "expected name=value, got '" + item + "'");
  }
  return {item.substr(0, eq), item.substr(eq + 1)};
}

}  // namespace

VariantKey VariantKey::parse(std::string_view text) {
  VariantKey key;
  const auto bar = text.find('|');
  if (bar == std::string_view::npos) {
    fail(ErrorKind::ParseError, "variant '" + std::string(text) +
                                    "' lacks the '|' separator");
  }
  for (const auto& item : split(text.substr(0, bar), ',')) {
    key.flags.push_back(split_assignment(item));
  }
  for (const auto& item : split(text.substr(bar + 1), ',')) {
    auto [name, cls] = split_assignment(item);
    key.scalars.emplace_back(name, parse_scalar_class(cls));
  }
  return key;
}

VariantKey variant_key(const KernelSignature& sig,
                       const std::map<std::string, std::string>& flags,
                       const std::map<std::string, double>& scalars) {
  VariantKey key;
  for (const auto& f : sig.flags) {
    const auto it = flags.find(f.name);
    if (it == flags.end()) {
      if (f.excluded) continue;
      fail(ErrorKind::InvalidFlag,
           sig.id + ": missing flag '" + f.name + "'");
    }
    if (std::find(f.values.begin(), f.values.end(), it->second) ==
        f.values.end()) {
      fail(ErrorKind::InvalidFlag, sig.id + ": flag " + f.name +
                                       " does not accept '" + it->second + "'");
    }
    if (!f.excluded) key.flags.emplace_back(f.name, it->second);
  }
  for (const auto& [name, value] : flags) {
    if (!sig.find_flag(name)) {
      fail(ErrorKind::InvalidFlag, sig.id + ": unknown flag '" + name + "'");
    }
  }
  for (const auto& s : sig.scalars) {
    const auto it = scalars.find(s);
    if (it == scalars.end()) {
      fail(ErrorKind::InvalidScalar, sig.id + ": missing scalar '" + s + "'");
    }
    key.scalars.emplace_back(s, classify_scalar(it->second));
  }
  return key;
}

namespace {

void check_variant(const KernelSignature& sig, const VariantKey& key) {
  std::size_t expected_flags = 0;
  for (const auto& f : sig.flags) {
    if (f.excluded) continue;
    if (expected_flags >= key.flags.size() ||
        key.flags[expected_flags].first != f.name) {
      fail(ErrorKind::InvalidFlag,
           sig.id + ": variant '" + key.str() + "' does not match signature");
    }
    const auto& v = key.flags[expected_flags].second;
    if (std::find(f.values.begin(), f.values.end(), v) == f.values.end()) {
      fail(ErrorKind::InvalidFlag,
           sig.id + ": flag " + f.name + " does not accept '" + v + "'");
    }
    ++expected_flags;
  }
  if (expected_flags != key.flags.size() ||
      key.scalars.size() != sig.scalars.size()) {
    fail(ErrorKind::InvalidFlag,
         sig.id + ": variant '" + key.str() + "' does not match signature");
  }
  for (std::size_t i = 0; i < sig.scalars.size(); ++i) {
    if (key.scalars[i].first != sig.scalars[i]) {
      fail(ErrorKind::InvalidScalar,
           sig.id + ": variant '" + key.str() + "' does not match signature");
    }
  }
}

}  // namespace

VariantKey parse_variant(const KernelSignature& sig, std::string_view text) {
  if (text.find('=') != std::string_view::npos ||
      text.find('|') != std::string_view::npos) {
    auto key = VariantKey::parse(text);
    check_variant(sig, key);
    return key;
  }
  const auto parts = split(text, ',');
  std::size_t flag_count = 0;
  for (const auto& f : sig.flags) flag_count += f.excluded ? 0 : 1;
  if (parts.size() != flag_count + sig.scalars.size()) {
    fail(ErrorKind::InvalidFlag, sig.id + ": expected " +
                                     std::to_string(flag_count) + " flags and " +
                                     std::to_string(sig.scalars.size()) +
                                     " scalars in '" + std::string(text) + "'");
  }
  VariantKey key;
  std::size_t i = 0;
  for (const auto& f : sig.flags) {
    if (f.excluded) continue;
    key.flags.emplace_back(f.name, parts[i++]);
  }
  for (const auto& s : sig.scalars) {
    key.scalars.emplace_back(s, parse_scalar_class(parts[i++]));
  }
  check_variant(sig, key);
  return key;
}

std::vector<VariantKey> all_variants(const KernelSignature& sig) {
  std::vector<VariantKey> keys(1);
  for (const auto& f : sig.flags) {
    if (f.excluded) continue;
    std::vector<VariantKey> next;
    for (const auto& k : keys) {
      for (const auto& v : f.values) {
        auto copy = k;
        copy.flags.emplace_back(f.name, v);
        next.push_back(std::move(copy));
      }
    }
    keys = std::move(next);
  }
  for (const auto& s : sig.scalars) {
    std::vector<VariantKey> next;
    for (const auto& k : keys) {
      for (auto c : {ScalarClass::MinusOne, ScalarClass::Zero, ScalarClass::One,
                     ScalarClass::General}) {
        auto copy = k;
        copy.scalars.emplace_back(s, c);
        next.push_back(std::move(copy));
      }
    }
    keys = std::move(next);
  }
  return keys;
}

std::int64_t evaluate(const DimExpr& expr, std::span<const std::int64_t> sizes,
                      const VariantKey& variant) {
  switch (expr.kind) {
    case DimExpr::Kind::Constant:
      return expr.value;
    case DimExpr::Kind::Size:
      return sizes[static_cast<std::size_t>(expr.value)];
    case DimExpr::Kind::Min:
      return std::min(evaluate(expr.children[0], sizes, variant),
                      evaluate(expr.children[1], sizes, variant));
    case DimExpr::Kind::FlagCase: {
      const std::string* v = variant.flag(expr.flag);
      if (!v) {
        fail(ErrorKind::InvalidFlag,
             "variant '" + variant.str() + "' lacks flag " + expr.flag);
      }
      for (std::size_t i = 0; i < expr.case_values.size(); ++i) {
        if (expr.case_values[i] == *v) {
          return evaluate(expr.children[i], sizes, variant);
        }
      }
      fail(ErrorKind::InvalidFlag, "flag " + expr.flag + " value '" + *v +
                                       "' has no shape rule");
    }
  }
  return 0;
}

std::vector<OperandExtent> operand_extents(
    const KernelSignature& sig, const VariantKey& variant,
    std::span<const std::int64_t> sizes,
    const std::map<std::string, std::int64_t>& lds) {
  if (sizes.size() != sig.dims()) {
    fail(ErrorKind::InvalidArgument,
         sig.id + ": expected " + std::to_string(sig.dims()) + " sizes");
  }
  for (auto s : sizes) {
    if (s <= 0) fail(ErrorKind::InvalidArgument, sig.id + ": sizes must be positive");
  }
  std::vector<OperandExtent> out;
  out.reserve(sig.operands.size());
  for (const auto& rule : sig.operands) {
    OperandExtent e;
    e.name = rule.name;
    e.rows = evaluate(rule.rows, sizes, variant);
    e.cols = evaluate(rule.cols, sizes, variant);
    e.ld = std::max<std::int64_t>(e.rows, 1);
    if (!rule.ld_param.empty()) {
      if (auto it = lds.find(rule.ld_param); it != lds.end()) {
        if (it->second < e.rows || it->second < 1) {
          fail(ErrorKind::InvalidLeadingDimension,
               sig.id + ": " + rule.ld_param + "=" + std::to_string(it->second) +
                   " < rows " + std::to_string(e.rows) + " of " + rule.name);
        }
        e.ld = it->second;
      }
    }
    out.push_back(std::move(e));
  }
  return out;
}

double kernel_flops(const KernelSignature& sig, const VariantKey& variant,
                    std::span<const std::int64_t> sizes) {
  if (!sig.flops) {
    fail(ErrorKind::UnknownKernel, sig.id + " has no flop formula");
  }
  const FlopFormula& f = *sig.flops;
  const FlopFormula::Case* chosen = nullptr;
  if (f.flag.empty()) {
    chosen = &f.cases.front();
  } else {
    const std::string* v = variant.flag(f.flag);
    for (const auto& c : f.cases) {
      if (v && c.flag_value == *v) chosen = &c;
    }
    if (!chosen) {
      fail(ErrorKind::InvalidFlag,
           sig.id + ": no flop formula for variant " + variant.str());
    }
  }
  std::int64_t common = 1;
  for (const auto& t : chosen->terms) common = std::lcm(common, t.den);
  __int128 numerator = 0;
  for (const auto& t : chosen->terms) {
    __int128 term = t.num * (common / t.den);
    for (std::size_t d = 0; d < sizes.size(); ++d) {
      for (int p = 0; p < t.powers[d]; ++p) term *= sizes[d];
    }
    numerator += term;
  }
  if (numerator % common == 0) {
    return static_cast<double>(numerator / common);
  }
  return static_cast<double>(static_cast<long double>(numerator) /
                             static_cast<long double>(common));
}

// --- manifest parsing -----------------------------------------------------

namespace {

[[noreturn]] void bad_signature(const std::string& id, const std::string& msg) {
  fail(ErrorKind::InvalidSignature, id + ": " + msg);
}

DimExpr parse_dim(const json& j, const KernelSignature& sig) {
  DimExpr e;
  if (j.is_number_integer()) {
    e.kind = DimExpr::Kind::Constant;
    e.value = j.get<std::int64_t>();
    return e;
  }
  if (j.is_string()) {
    const auto name = j.get<std::string>();
    const auto it = std::find(sig.sizes.begin(), sig.sizes.end(), name);
    if (it == sig.sizes.end()) {
      bad_signature(sig.id, "shape rule references undeclared size '" + name + "'");
    }
    e.kind = DimExpr::Kind::Size;
    e.value = it - sig.sizes.begin();
    return e;
  }
  if (j.is_object() && j.contains("min")) {
    const auto& args = j.at("min");
    if (!args.is_array() || args.size() != 2) {
      bad_signature(sig.id, "min takes exactly two arguments");
    }
    e.kind = DimExpr::Kind::Min;
    e.children = {parse_dim(args[0], sig), parse_dim(args[1], sig)};
    return e;
  }
  if (j.is_object() && j.contains("flag")) {
    e.kind = DimExpr::Kind::FlagCase;
    e.flag = j.at("flag").get<std::string>();
    const FlagParam* f = sig.find_flag(e.flag);
    if (!f || f->excluded) {
      bad_signature(sig.id, "shape rule depends on unusable flag '" + e.flag + "'");
    }
    for (const auto& v : f->values) {
      if (!j.at("cases").contains(v)) {
        bad_signature(sig.id, "shape rule for flag " + e.flag +
                                  " misses value '" + v + "'");
      }
      e.case_values.push_back(v);
      e.children.push_back(parse_dim(j.at("cases").at(v), sig));
    }
    return e;
  }
  bad_signature(sig.id, "unrecognised shape rule " + j.dump());
}

FlopFormula::Term parse_term(const json& j, const KernelSignature& sig) {
  FlopFormula::Term t;
  const auto& c = j.at("coeff");
  if (c.is_number_integer()) {
    t.num = c.get<std::int64_t>();
  } else if (c.is_string()) {
    const auto s = c.get<std::string>();
    const auto slash = s.find('/');
    try {
      t.num = std::stoll(s.substr(0, slash));
      if (slash != std::string::npos) t.den = std::stoll(s.substr(slash + 1));
    } catch (const std::exception&) {
      bad_signature(sig.id, "bad flop coefficient '" + s + "'");
    }
    if (t.den <= 0) bad_signature(sig.id, "bad flop coefficient '" + s + "'");
  } else {
    bad_signature(sig.id, "flop coefficients must be integers or \"p/q\"");
  }
  if (j.contains("powers")) {
    for (const auto& [name, p] : j.at("powers").items()) {
      const auto it = std::find(sig.sizes.begin(), sig.sizes.end(), name);
      if (it == sig.sizes.end()) {
        bad_signature(sig.id, "flop term references undeclared size '" + name + "'");
      }
      t.powers[static_cast<std::size_t>(it - sig.sizes.begin())] = p.get<int>();
    }
  }
  return t;
}

std::vector<FlopFormula::Term> parse_terms(const json& j,
                                           const KernelSignature& sig) {
  std::vector<FlopFormula::Term> terms;
  for (const auto& t : j.at("terms")) terms.push_back(parse_term(t, sig));
  return terms;
}

FlopFormula parse_flops(const json& j, const KernelSignature& sig) {
  FlopFormula f;
  if (j.contains("flag")) {
    f.flag = j.at("flag").get<std::string>();
    const FlagParam* flag = sig.find_flag(f.flag);
    if (!flag || flag->excluded) {
      bad_signature(sig.id, "flop formula depends on unusable flag '" + f.flag + "'");
    }
    for (const auto& v : flag->values) {
      if (!j.at("cases").contains(v)) {
        bad_signature(sig.id, "flop formula misses flag value '" + v + "'");
      }
      f.cases.push_back({v, parse_terms(j.at("cases").at(v), sig)});
    }
  } else {
    f.cases.push_back({"", parse_terms(j, sig)});
  }
  return f;
}

KernelSignature parse_signature(const json& j) {
  KernelSignature sig;
  sig.id = j.at("id").get<std::string>();
  for (const auto& f : j.value("flags", json::array())) {
    FlagParam p;
    p.name = f.at("name").get<std::string>();
    p.values = f.at("values").get<std::vector<std::string>>();
    p.excluded = f.value("excluded", false);
    if (p.values.empty()) bad_signature(sig.id, "flag " + p.name + " has no values");
    sig.flags.push_back(std::move(p));
  }
  sig.sizes = j.at("sizes").get<std::vector<std::string>>();
  if (sig.sizes.empty() || sig.sizes.size() > 3) {
    bad_signature(sig.id, "needs between one and three size arguments");
  }
  sig.scalars = j.value("scalars", std::vector<std::string>{});
  for (const auto& o : j.at("operands")) {
    OperandRule rule;
    rule.name = o.at("name").get<std::string>();
    rule.rows = parse_dim(o.at("rows"), sig);
    rule.cols = parse_dim(o.at("cols"), sig);
    rule.ld_param = o.value("ld", std::string{});
    if (!rule.ld_param.empty()) sig.lds.push_back(rule.ld_param);
    sig.operands.push_back(std::move(rule));
  }
  if (sig.operands.empty()) bad_signature(sig.id, "declares no operands");
  if (j.contains("flops")) sig.flops = parse_flops(j.at("flops"), sig);
  return sig;
}

}  // namespace

KernelRegistry KernelRegistry::from_json(std::string_view manifest) {
  json doc;
  try {
    doc = json::parse(manifest);
  } catch (const json::exception& e) {
    fail(ErrorKind::ParseError, std::string("kernel manifest: ") + e.what());
  }
  if (doc.value("version", 0) != 1) {
    fail(ErrorKind::VersionError, "kernel manifest version must be 1");
  }
  KernelRegistry reg;
  try {
    for (const auto& k : doc.at("kernels")) {
      auto sig = parse_signature(k);
      const auto id = sig.id;
      if (!reg.signatures_.emplace(id, std::move(sig)).second) {
        bad_signature(id, "declared twice");
      }
    }
  } catch (const json::exception& e) {
    fail(ErrorKind::ParseError, std::string("kernel manifest: ") + e.what());
  }
  return reg;
}

KernelRegistry KernelRegistry::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::ParseError, "cannot open kernel manifest " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return from_json(buf.str());
}

const KernelRegistry& KernelRegistry::builtin() {
  static const KernelRegistry reg = from_json(builtin_manifest());
  return reg;
}

void KernelRegistry::merge(const KernelRegistry& other) {
  for (const auto& [id, sig] : other.signatures_) signatures_[id] = sig;
}

const KernelSignature& KernelRegistry::get(std::string_view id) const {
  const auto it = signatures_.find(id);
  if (it == signatures_.end()) {
    fail(ErrorKind::UnknownKernel, "no signature for kernel '" + std::string(id) + "'");
  }
  return it->second;
}

bool KernelRegistry::contains(std::string_view id) const {
  return signatures_.find(id) != signatures_.end();
}

std::vector<std::string> KernelRegistry::ids() const {
  std::vector<std::string> out;
  for (const auto& [id, sig] : signatures_) out.push_back(id);
  return out;
}

}  // namespace dlaperf
