// Copyright 2026 The aexplain Authors
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

#ifndef AEXPLAIN_KERNELS_HPP_
#define AEXPLAIN_KERNELS_HPP_

#include <cstddef>
#include <limits>
#include <string>
#include <vector>

namespace aexplain::kernels {

inline constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();

struct MinMax {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
};

// Result of a violation scan: how many points violate, the extreme metric
// values among them, and the first/last violating index (kNone when count==0).
struct ScanStats {
  std::size_t count = 0;
  double metric_min = std::numeric_limits<double>::infinity();
  double metric_max = -std::numeric_limits<double>::infinity();
  std::size_t first = kNone;
  std::size_t last = kNone;

  void merge_point(std::size_t index, double metric) {
    ++count;
    if (metric < metric_min) metric_min = metric;
    if (metric > metric_max) metric_max = metric;
    if (first == kNone) first = index;
    last = index;
  }
};

// The hot inner loops of violation detection. Per-point metrics are computed
// with the same IEEE operations in every backend, so ScanStats results are
// bit-identical across backends; sum/dot reduce in a different association
// order and agree only to rounding.
struct KernelTable {
  const char* name;
  MinMax (*min_max)(const double* x, std::size_t n);
  double (*sum)(const double* x, std::size_t n);
  double (*dot)(const double* x, const double* y, std::size_t n);
  // acc[i] += a * x[i]
  void (*axpy)(double* acc, const double* x, double a, std::size_t n);
  // Value-domain scan: metric (x-hi)/denom_hi above, (lo-x)/denom_lo below.
  ScanStats (*band_excess)(const double* x, std::size_t n, double lo, double hi,
                           double denom_lo, double denom_hi);
  // Magnitude scan: metric (|x|-limit)/denom where |x| > limit.
  ScanStats (*abs_over)(const double* x, std::size_t n, double limit,
                        double denom);
  // dst[i] = (x[i+1]-x[i]) / (t_sec[i+1]-t_sec[i]), n-1 outputs.
  void (*rates)(double* dst, const double* x, const double* t_sec,
                std::size_t n);
};

const KernelTable& scalar_table();

// The table picked at startup from CPU capabilities (or forced by tests).
const KernelTable& active();

// Returns false when the named backend ("scalar", "avx2") is unavailable.
bool force_backend(const std::string& name);
void reset_backend();

std::vector<const KernelTable*> available_tables();

}  // namespace aexplain::kernels

#endif  // AEXPLAIN_KERNELS_HPP_
