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
#include <span>
#include <vector>

namespace dlaperf {

/// Half-open byte interval [begin, end).
struct ByteRange {
  std::int64_t begin = 0;
  std::int64_t end = 0;

  std::int64_t length() const noexcept { return end - begin; }
  friend bool operator==(const ByteRange&, const ByteRange&) = default;
};

/// A union of byte intervals, kept sorted, disjoint and coalesced (no two
/// stored ranges touch). Equality is therefore set equality.
class RegionSet {
 public:
  RegionSet() = default;

  static RegionSet range(std::int64_t begin, std::int64_t length);

  /// Column-major sub-matrix view: `cols` intervals of `rows * element_bytes`
  /// bytes, one every `ld * element_bytes` bytes starting at `base`.
  /// A vector with stride `inc` is the 1 x len view with ld = inc.
  static RegionSet submatrix(std::int64_t base, std::int64_t rows,
                             std::int64_t cols, std::int64_t ld,
                             std::int64_t element_bytes = 8);

  void insert(std::int64_t begin, std::int64_t length);
  void unite(const RegionSet& other);

  RegionSet united(const RegionSet& other) const;
  RegionSet intersection(const RegionSet& other) const;
  RegionSet difference(const RegionSet& other) const;

  bool intersects(const RegionSet& other) const;
  bool contains(const RegionSet& other) const;

  std::int64_t measure() const noexcept { return measure_; }
  bool empty() const noexcept { return ranges_.empty(); }
  std::span<const ByteRange> ranges() const noexcept { return ranges_; }

  friend bool operator==(const RegionSet& a, const RegionSet& b) {
    return a.ranges_ == b.ranges_;
  }

 private:
  explicit RegionSet(std::vector<ByteRange> normalized);

  std::vector<ByteRange> ranges_;
  std::int64_t measure_ = 0;
};

}  // namespace dlaperf
