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

#include "dlaperf/regionset.hpp"

#include <algorithm>
#include <string>

#include "dlaperf/error.hpp"

namespace dlaperf {

namespace {

std::int64_t total_length(const std::vector<ByteRange>& ranges) {
  std::int64_t sum = 0;
  for (const auto& r : ranges) sum += r.length();
  return sum;
}

// Appends r to a sorted, coalesced vector whose last element starts at or
// before r.begin.
void append_coalescing(std::vector<ByteRange>& out, ByteRange r) {
  if (r.length() <= 0) return;
  if (!out.empty() && r.begin <= out.back().end) {
    out.back().end = std::max(out.back().end, r.end);
  } else {
    out.push_back(r);
  }
}

}  // namespace

RegionSet::RegionSet(std::vector<ByteRange> normalized)
    : ranges_(std::move(normalized)), measure_(total_length(ranges_)) {}

RegionSet RegionSet::range(std::int64_t begin, std::int64_t length) {
  RegionSet set;
  set.insert(begin, length);
  return set;
}

RegionSet RegionSet::submatrix(std::int64_t base, std::int64_t rows,
                               std::int64_t cols, std::int64_t ld,
                               std::int64_t element_bytes) {
  if (rows < 0 || cols < 0 || element_bytes <= 0) {
    fail(ErrorKind::InvalidArgument, "negative sub-matrix extent");
  }
  if (rows > 0 && cols > 1 && ld < rows) {
    fail(ErrorKind::InvalidLeadingDimension,
         "ld " + std::to_string(ld) + " < rows " + std::to_string(rows));
  }
  std::vector<ByteRange> out;
  if (rows == 0 || cols == 0) return RegionSet(std::move(out));
  if (ld == rows || cols == 1) {
    const std::int64_t len = (cols == 1 ? rows : rows * cols) * element_bytes;
    out.push_back({base, base + len});
    return RegionSet(std::move(out));
  }
  out.reserve(static_cast<std::size_t>(cols));
  for (std::int64_t k = 0; k < cols; ++k) {
    const std::int64_t b = base + k * ld * element_bytes;
    append_coalescing(out, {b, b + rows * element_bytes});
  }
  return RegionSet(std::move(out));
}

void RegionSet::insert(std::int64_t begin, std::int64_t length) {
  if (length <= 0) return;
  unite(RegionSet(std::vector<ByteRange>{{begin, begin + length}}));
}

void RegionSet::unite(const RegionSet& other) {
  if (other.empty()) return;
  if (empty()) {
    *this = other;
    return;
  }
  *this = united(other);
}

RegionSet RegionSet::united(const RegionSet& other) const {
  std::vector<ByteRange> out;
  out.reserve(ranges_.size() + other.ranges_.size());
  auto a = ranges_.begin();
  auto b = other.ranges_.begin();
  while (a != ranges_.end() || b != other.ranges_.end()) {
    if (b == other.ranges_.end() ||
        (a != ranges_.end() && a->begin <= b->begin)) {
      append_coalescing(out, *a++);
    } else {
      append_coalescing(out, *b++);
    }
  }
  return RegionSet(std::move(out));
}

RegionSet RegionSet::intersection(const RegionSet& other) const {
  std::vector<ByteRange> out;
  auto a = ranges_.begin();
  auto b = other.ranges_.begin();
  while (a != ranges_.end() && b != other.ranges_.end()) {
    const std::int64_t lo = std::max(a->begin, b->begin);
    const std::int64_t hi = std::min(a->end, b->end);
    if (lo < hi) out.push_back({lo, hi});
    if (a->end < b->end) {
      ++a;
    } else {
      ++b;
    }
  }
  return RegionSet(std::move(out));
}

RegionSet RegionSet::difference(const RegionSet& other) const {
  std::vector<ByteRange> out;
  auto b = other.ranges_.begin();
  for (ByteRange cur : ranges_) {
    while (b != other.ranges_.end() && b->end <= cur.begin) ++b;
    auto probe = b;
    while (probe != other.ranges_.end() && probe->begin < cur.end) {
      if (probe->begin > cur.begin) out.push_back({cur.begin, probe->begin});
      cur.begin = std::max(cur.begin, probe->end);
      if (cur.begin >= cur.end) break;
      ++probe;
    }
    if (cur.begin < cur.end) out.push_back(cur);
  }
  return RegionSet(std::move(out));
}

bool RegionSet::intersects(const RegionSet& other) const {
  auto a = ranges_.begin();
  auto b = other.ranges_.begin();
  while (a != ranges_.end() && b != other.ranges_.end()) {
    if (std::max(a->begin, b->begin) < std::min(a->end, b->end)) return true;
    if (a->end < b->end) {
      ++a;
    } else {
      ++b;
    }
  }
  return false;
}

bool RegionSet::contains(const RegionSet& other) const {
  return other.difference(*this).empty();
}

}  // namespace dlaperf
