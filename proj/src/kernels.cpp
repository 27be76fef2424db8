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

#include "aexplain/kernels.hpp"

namespace aexplain::kernels {

#if defined(AEXPLAIN_HAVE_AVX2)
const KernelTable* avx2_table();  // kernels_avx2.cpp
#endif

namespace {

MinMax min_max_scalar(const double* x, std::size_t n) {
  MinMax mm;
  for (std::size_t i = 0; i < n; ++i) {
    if (x[i] < mm.lo) mm.lo = x[i];
    if (x[i] > mm.hi) mm.hi = x[i];
  }
  return mm;
}

double sum_scalar(const double* x, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += x[i];
  return acc;
}

double dot_scalar(const double* x, const double* y, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += x[i] * y[i];
  return acc;
}

void axpy_scalar(double* acc, const double* x, double a, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) acc[i] += a * x[i];
}

ScanStats band_excess_scalar(const double* x, std::size_t n, double lo,
                             double hi, double denom_lo, double denom_hi) {
  ScanStats stats;
  for (std::size_t i = 0; i < n; ++i) {
    if (x[i] > hi) {
      stats.merge_point(i, (x[i] - hi) / denom_hi);
    } else if (x[i] < lo) {
      stats.merge_point(i, (lo - x[i]) / denom_lo);
    }
  }
  return stats;
}

ScanStats abs_over_scalar(const double* x, std::size_t n, double limit,
                          double denom) {
  ScanStats stats;
  for (std::size_t i = 0; i < n; ++i) {
    const double mag = x[i] < 0 ? -x[i] : x[i];
    if (mag > limit) stats.merge_point(i, (mag - limit) / denom);
  }
  return stats;
}

void rates_scalar(double* dst, const double* x, const double* t_sec,
                  std::size_t n) {
  for (std::size_t i = 0; i + 1 < n; ++i) {
    dst[i] = (x[i + 1] - x[i]) / (t_sec[i + 1] - t_sec[i]);
  }
}

const KernelTable kScalarTable = {
    "scalar",        min_max_scalar, sum_scalar,      dot_scalar,
    axpy_scalar,     band_excess_scalar, abs_over_scalar, rates_scalar,
};

const KernelTable* pick_default() {
#if defined(AEXPLAIN_HAVE_AVX2)
  if (__builtin_cpu_supports("avx2")) return avx2_table();
#endif
  return &kScalarTable;
}

const KernelTable*& active_slot() {
  static const KernelTable* slot = pick_default();
  return slot;
}

}  // namespace

const KernelTable& scalar_table() { return kScalarTable; }

const KernelTable& active() { return *active_slot(); }

bool force_backend(const std::string& name) {
  for (const KernelTable* table : available_tables()) {
    if (name == table->name) {
      active_slot() = table;
      return true;
    }
  }
  return false;
}

void reset_backend() { active_slot() = pick_default(); }

std::vector<const KernelTable*> available_tables() {
  std::vector<const KernelTable*> tables = {&kScalarTable};
#if defined(AEXPLAIN_HAVE_AVX2)
  if (__builtin_cpu_supports("avx2")) tables.push_back(avx2_table());
#endif
  return tables;
}

}  // namespace aexplain::kernels
