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

// JSON mappings shared by the model file and the CLI config reader.

#include <string>

#include "dlaperf/error.hpp"
#include "dlaperf/modeler.hpp"
#include "dlaperf/timing.hpp"
#include "json.hpp"

namespace dlaperf::jsonio {

using nlohmann::json;

inline json to_json(const RefinementConfig& c) {
  return {{"min_width", c.min_width},
          {"grid", std::string(to_string(c.grid_kind))},
          {"target_error", c.target_error},
          {"min_box_side", c.min_box_side},
          {"degree", c.degree},
          {"oversample", c.oversample},
          {"error_metric", std::string(to_string(c.error_metric))},
          {"max_depth", c.max_depth},
          {"repetitions", c.repetitions}};
}

inline RefinementConfig refinement_from_json(const json& j, RefinementConfig c = {}) {
  if (!j.is_object()) fail(ErrorKind::ParseError, "refinement config must be an object");
  for (const auto& [key, v] : j.items()) {
    if (key == "min_width") c.min_width = v.get<std::int64_t>();
    else if (key == "grid") c.grid_kind = parse_grid_kind(v.get<std::string>());
    else if (key == "target_error") c.target_error = v.get<double>();
    else if (key == "min_box_side") c.min_box_side = v.get<std::int64_t>();
    else if (key == "degree") c.degree = v.get<int>();
    else if (key == "oversample") c.oversample = v.get<int>();
    else if (key == "error_metric") c.error_metric = parse_error_metric(v.get<std::string>());
    else if (key == "max_depth") c.max_depth = v.get<int>();
    else if (key == "repetitions") c.repetitions = v.get<int>();
    else fail(ErrorKind::ParseError, "unknown refinement key '" + key + "'");
  }
  c.validate();
  return c;
}

inline json to_json(const MachineProfile& m) {
  return {{"largest_cache_bytes", m.largest_cache_bytes},
          {"flops_per_cycle", m.flops_per_cycle},
          {"element_bytes", m.element_bytes}};
}

inline MachineProfile machine_from_json(const json& j, MachineProfile m = {}) {
  if (!j.is_object()) fail(ErrorKind::ParseError, "machine profile must be an object");
  for (const auto& [key, v] : j.items()) {
    if (key == "largest_cache_bytes") m.largest_cache_bytes = v.get<std::int64_t>();
    else if (key == "flops_per_cycle") m.flops_per_cycle = v.get<double>();
    else if (key == "element_bytes") m.element_bytes = v.get<std::int64_t>();
    else fail(ErrorKind::ParseError, "unknown machine key '" + key + "'");
  }
  m.validate();
  return m;
}

inline json to_json(const Box& b) { return {{"lo", b.lo}, {"hi", b.hi}}; }

inline Box box_from_json(const json& j) {
  Box b;
  b.lo = j.at("lo").get<std::vector<std::int64_t>>();
  b.hi = j.at("hi").get<std::vector<std::int64_t>>();
  if (b.lo.size() != b.hi.size() || b.lo.empty()) {
    fail(ErrorKind::ParseError, "box lo/hi must be non-empty and of equal length");
  }
  return b;
}

}  // namespace dlaperf::jsonio
