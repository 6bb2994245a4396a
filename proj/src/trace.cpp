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

#include "dlaperf/trace.hpp"

#include <algorithm>
#include <istream>
#include <map>
#include <ostream>
#include <unordered_map>

#include "dlaperf/error.hpp"
#include "json.hpp"

namespace dlaperf {

using nlohmann::json;

RegionSet KernelCall::region() const {
  RegionSet r;
  for (const auto& op : operands) r.unite(op.region);
  return r;
}

std::size_t KernelCall::operand_index(std::string_view name) const {
  for (std::size_t i = 0; i < operands.size(); ++i) {
    if (operands[i].name == name || operands[i].label == name) return i;
  }
  fail(ErrorKind::InvalidOperand,
       kernel + " call has no operand '" + std::string(name) + "'");
}

void Trace::add(KernelCall call) {
  RegionSet r = call.region();
  footprint_.unite(r);
  call_regions_.push_back(std::move(r));
  calls_.push_back(std::move(call));
}

std::string_view to_string(Termination t) noexcept {
  switch (t) {
    case Termination::FoundOperand: return "FoundOperand";
    case Termination::ExceededCache: return "ExceededCache";
    case Termination::TraceStart: return "TraceStart";
  }
  return "?";
}

AccessDistance access_distance(const Trace& trace, std::size_t call_index,
                               std::size_t operand, std::int64_t cache_bytes) {
  if (call_index >= trace.size()) {
    fail(ErrorKind::InvalidOperand,
         "call index " + std::to_string(call_index) + " outside a trace of " +
             std::to_string(trace.size()) + " calls");
  }
  const KernelCall& call = trace[call_index];
  if (operand >= call.operands.size()) {
    fail(ErrorKind::InvalidOperand, call.kernel + " call has no operand #" +
                                        std::to_string(operand));
  }

  AccessDistance out;
  RegionSet remaining = call.operands[operand].region;
  for (std::size_t j = call_index; j-- > 0;) {
    const RegionSet& scanned = trace.call_region(j);
    out.regions.unite(scanned);
    if (remaining.intersects(scanned)) remaining = remaining.difference(scanned);
    if (remaining.empty()) {
      out.terminated_by = Termination::FoundOperand;
      out.found_at = j;
      out.bytes = out.regions.measure();
      return out;
    }
    if (out.regions.measure() > cache_bytes) {
      out.terminated_by = Termination::ExceededCache;
      out.bytes = out.regions.measure();
      return out;
    }
  }
  out.regions.unite(trace.footprint());
  out.terminated_by = Termination::TraceStart;
  out.bytes = out.regions.measure();
  return out;
}

AccessDistance access_distance(const Trace& trace, std::size_t call_index,
                               std::string_view operand,
                               std::int64_t cache_bytes) {
  if (call_index >= trace.size()) {
    fail(ErrorKind::InvalidOperand,
         "call index " + std::to_string(call_index) + " outside the trace");
  }
  return access_distance(trace, call_index,
                         trace[call_index].operand_index(operand), cache_bytes);
}

namespace {

std::vector<std::int64_t> lines_of(const RegionSet& r, std::int64_t line_bytes) {
  std::vector<std::int64_t> lines;
  for (const ByteRange& b : r.ranges()) {
    const std::int64_t first = b.begin / line_bytes;
    const std::int64_t last = (b.end - 1) / line_bytes;
    for (std::int64_t l = first; l <= last; ++l) {
      if (lines.empty() || lines.back() != l) lines.push_back(l);
    }
  }
  return lines;
}

class LruCache {
 public:
  explicit LruCache(std::int64_t capacity_lines) : capacity_(capacity_lines) {}

  void touch(std::int64_t line) {
    const auto it = last_use_.find(line);
    if (it != last_use_.end()) {
      by_time_.erase(it->second);
      it->second = clock_;
    } else {
      last_use_.emplace(line, clock_);
    }
    by_time_.emplace(clock_, line);
    ++clock_;
    while (static_cast<std::int64_t>(by_time_.size()) > capacity_) {
      const auto oldest = by_time_.begin();
      last_use_.erase(oldest->second);
      by_time_.erase(oldest);
    }
  }

  bool resident(std::int64_t line) const { return last_use_.contains(line); }

 private:
  std::int64_t capacity_;
  std::uint64_t clock_ = 0;
  std::unordered_map<std::int64_t, std::uint64_t> last_use_;
  std::map<std::uint64_t, std::int64_t> by_time_;
};

void check_lru_args(std::int64_t cache_bytes, std::int64_t line_bytes) {
  if (line_bytes <= 0 || cache_bytes < 0) {
    fail(ErrorKind::InvalidArgument, "LRU line and cache sizes must be positive");
  }
}

}  // namespace

std::vector<std::vector<bool>> lru_residency(const Trace& trace,
                                             std::int64_t cache_bytes,
                                             std::int64_t line_bytes,
                                             LruWarmup warmup) {
  check_lru_args(cache_bytes, line_bytes);
  std::vector<std::vector<std::int64_t>> call_lines;
  call_lines.reserve(trace.size());
  for (std::size_t i = 0; i < trace.size(); ++i) {
    call_lines.push_back(lines_of(trace.call_region(i), line_bytes));
  }

  LruCache cache(cache_bytes / line_bytes);
  if (warmup == LruWarmup::RepeatedExecution) {
    for (const auto& lines : call_lines) {
      for (std::int64_t l : lines) cache.touch(l);
    }
  }

  std::vector<std::vector<bool>> out(trace.size());
  for (std::size_t i = 0; i < trace.size(); ++i) {
    for (const auto& op : trace[i].operands) {
      const auto lines = lines_of(op.region, line_bytes);
      out[i].push_back(std::all_of(lines.begin(), lines.end(),
                                   [&](std::int64_t l) { return cache.resident(l); }));
    }
    for (std::int64_t l : call_lines[i]) cache.touch(l);
  }
  return out;
}

bool lru_oracle(const Trace& trace, std::size_t call_index, std::size_t operand,
                std::int64_t cache_bytes, std::int64_t line_bytes,
                LruWarmup warmup) {
  check_lru_args(cache_bytes, line_bytes);
  if (call_index >= trace.size() ||
      operand >= trace[call_index].operands.size()) {
    fail(ErrorKind::InvalidOperand, "no such call operand in the trace");
  }
  LruCache cache(cache_bytes / line_bytes);
  if (warmup == LruWarmup::RepeatedExecution) {
    for (std::size_t i = 0; i < trace.size(); ++i) {
      for (std::int64_t l : lines_of(trace.call_region(i), line_bytes)) cache.touch(l);
    }
  }
  for (std::size_t i = 0; i < call_index; ++i) {
    for (std::int64_t l : lines_of(trace.call_region(i), line_bytes)) cache.touch(l);
  }
  const auto lines = lines_of(trace[call_index].operands[operand].region, line_bytes);
  return std::all_of(lines.begin(), lines.end(),
                     [&](std::int64_t l) { return cache.resident(l); });
}

void write_trace(std::ostream& out, const Trace& trace) {
  for (std::size_t i = 0; i < trace.size(); ++i) {
    const KernelCall& c = trace[i];
    json ops = json::array();
    for (const auto& op : c.operands) {
      json regions = json::array();
      for (const ByteRange& r : op.region.ranges()) {
        regions.push_back({r.begin, r.length()});
      }
      json o = {{"name", op.name}, {"label", op.label}, {"regions", regions}};
      if (op.ld > 0) {
        o["offset"] = op.offset;
        o["ld"] = op.ld;
      }
      ops.push_back(std::move(o));
    }
    const json rec = {{"index", i},
                      {"kernel", c.kernel},
                      {"variant", c.variant.str()},
                      {"flags", c.flags},
                      {"sizes", c.sizes},
                      {"operands", ops}};
    out << rec.dump() << '\n';
  }
}

Trace read_trace(std::istream& in, const KernelRegistry& registry) {
  Trace trace;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const json rec = json::parse(line);
      KernelCall c;
      c.kernel = rec.at("kernel").get<std::string>();
      const KernelSignature& sig = registry.get(c.kernel);
      c.variant = parse_variant(sig, rec.at("variant").get<std::string>());
      c.flags = rec.value("flags", std::map<std::string, std::string>{});
      c.sizes = rec.at("sizes").get<std::vector<std::int64_t>>();
      for (const json& op : rec.at("operands")) {
        CallOperand o;
        o.name = op.at("name").get<std::string>();
        o.label = op.value("label", o.name);
        o.offset = op.value("offset", std::int64_t{0});
        o.ld = op.value("ld", std::int64_t{0});
        for (const json& r : op.at("regions")) {
          const auto begin = r.at(0).get<std::int64_t>();
          const auto length = r.at(1).get<std::int64_t>();
          if (begin < 0 || length < 0) {
            fail(ErrorKind::ParseError, "negative region");
          }
          o.region.insert(begin, length);
        }
        c.operands.push_back(std::move(o));
      }
      if (rec.contains("index") &&
          rec.at("index").get<std::size_t>() != trace.size()) {
        fail(ErrorKind::ParseError, "call records out of order");
      }
      trace.add(std::move(c));
    } catch (const json::exception& e) {
      fail(ErrorKind::ParseError,
           "trace line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return trace;
}

}  // namespace dlaperf
