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

// AVX2 variants of the scan kernels. Per-point metrics use the same IEEE
// divide as the scalar path so ScanStats match bit-for-bit; only sum/dot
// reassociate. This file is compiled with -mavx2 and must only be reached
// after a runtime cpuid check.

#include "aexplain/kernels.hpp"

#if defined(AEXPLAIN_HAVE_AVX2)

#include <immintrin.h>

#include <bit>
#include <cstdint>

namespace aexplain::kernels {
namespace {

double hmin(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  __m128d m = _mm_min_pd(lo, hi);
  m = _mm_min_sd(m, _mm_unpackhi_pd(m, m));
  return _mm_cvtsd_f64(m);
}

double hmax(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  __m128d m = _mm_max_pd(lo, hi);
  m = _mm_max_sd(m, _mm_unpackhi_pd(m, m));
  return _mm_cvtsd_f64(m);
}

double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  __m128d s = _mm_add_pd(lo, hi);
  s = _mm_add_sd(s, _mm_unpackhi_pd(s, s));
  return _mm_cvtsd_f64(s);
}

MinMax min_max_avx2(const double* x, std::size_t n) {
  MinMax mm;
  std::size_t i = 0;
  if (n >= 4) {
    __m256d vmin = _mm256_loadu_pd(x);
    __m256d vmax = vmin;
    for (i = 4; i + 4 <= n; i += 4) {
      __m256d v = _mm256_loadu_pd(x + i);
      vmin = _mm256_min_pd(vmin, v);
      vmax = _mm256_max_pd(vmax, v);
    }
    mm.lo = hmin(vmin);
    mm.hi = hmax(vmax);
  }
  for (; i < n; ++i) {
    if (x[i] < mm.lo) mm.lo = x[i];
    if (x[i] > mm.hi) mm.hi = x[i];
  }
  return mm;
}

double sum_avx2(const double* x, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc = _mm256_add_pd(acc, _mm256_loadu_pd(x + i));
  }
  double total = hsum(acc);
  for (; i < n; ++i) total += x[i];
  return total;
}

double dot_avx2(const double* x, const double* y, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_loadu_pd(x + i),
                                           _mm256_loadu_pd(y + i)));
  }
  double total = hsum(acc);
  for (; i < n; ++i) total += x[i] * y[i];
  return total;
}

void axpy_avx2(double* acc, const double* x, double a, std::size_t n) {
  const __m256d va = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d v = _mm256_add_pd(_mm256_loadu_pd(acc + i),
                              _mm256_mul_pd(va, _mm256_loadu_pd(x + i)));
    _mm256_storeu_pd(acc + i, v);
  }
  for (; i < n; ++i) acc[i] += a * x[i];
}

// Folds one 4-lane block of metrics+mask into the running stats.
inline void fold_block(ScanStats& stats, std::size_t base, __m256d metrics,
                       int mask, __m256d& vmin, __m256d& vmax) {
  if (mask == 0) return;
  // Masked lanes get +inf for the min fold and -inf for the max fold.
  const __m256d inf = _mm256_set1_pd(std::numeric_limits<double>::infinity());
  const __m256d ninf = _mm256_set1_pd(-std::numeric_limits<double>::infinity());
  __m256d lane_sel = _mm256_castsi256_pd(_mm256_set_epi64x(
      (mask & 8) ? -1 : 0, (mask & 4) ? -1 : 0, (mask & 2) ? -1 : 0,
      (mask & 1) ? -1 : 0));
  vmin = _mm256_min_pd(vmin, _mm256_blendv_pd(inf, metrics, lane_sel));
  vmax = _mm256_max_pd(vmax, _mm256_blendv_pd(ninf, metrics, lane_sel));
  stats.count += static_cast<std::size_t>(std::popcount(static_cast<unsigned>(mask)));
  const unsigned umask = static_cast<unsigned>(mask);
  if (stats.first == kNone) stats.first = base + std::countr_zero(umask);
  stats.last = base + (31u - std::countl_zero(umask));
}

ScanStats band_excess_avx2(const double* x, std::size_t n, double lo, double hi,
                           double denom_lo, double denom_hi) {
  ScanStats stats;
  const __m256d vlo = _mm256_set1_pd(lo);
  const __m256d vhi = _mm256_set1_pd(hi);
  const __m256d vdlo = _mm256_set1_pd(denom_lo);
  const __m256d vdhi = _mm256_set1_pd(denom_hi);
  __m256d vmin = _mm256_set1_pd(std::numeric_limits<double>::infinity());
  __m256d vmax = _mm256_set1_pd(-std::numeric_limits<double>::infinity());
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d v = _mm256_loadu_pd(x + i);
    const __m256d above = _mm256_cmp_pd(v, vhi, _CMP_GT_OQ);
    const __m256d below = _mm256_cmp_pd(v, vlo, _CMP_LT_OQ);
    const int mask =
        _mm256_movemask_pd(_mm256_or_pd(above, below));
    if (mask == 0) continue;
    const __m256d m_above = _mm256_div_pd(_mm256_sub_pd(v, vhi), vdhi);
    const __m256d m_below = _mm256_div_pd(_mm256_sub_pd(vlo, v), vdlo);
    // Above wins when both compare true, matching the scalar branch order.
    const __m256d metrics = _mm256_blendv_pd(m_below, m_above, above);
    fold_block(stats, i, metrics, mask, vmin, vmax);
  }
  if (stats.count > 0) {
    stats.metric_min = hmin(vmin);
    stats.metric_max = hmax(vmax);
  }
  for (; i < n; ++i) {
    if (x[i] > hi) {
      stats.merge_point(i, (x[i] - hi) / denom_hi);
    } else if (x[i] < lo) {
      stats.merge_point(i, (lo - x[i]) / denom_lo);
    }
  }
  return stats;
}

ScanStats abs_over_avx2(const double* x, std::size_t n, double limit,
                        double denom) {
  ScanStats stats;
  const __m256d sign_mask = _mm256_set1_pd(-0.0);
  const __m256d vlimit = _mm256_set1_pd(limit);
  const __m256d vdenom = _mm256_set1_pd(denom);
  __m256d vmin = _mm256_set1_pd(std::numeric_limits<double>::infinity());
  __m256d vmax = _mm256_set1_pd(-std::numeric_limits<double>::infinity());
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d v = _mm256_andnot_pd(sign_mask, _mm256_loadu_pd(x + i));
    const int mask = _mm256_movemask_pd(_mm256_cmp_pd(v, vlimit, _CMP_GT_OQ));
    if (mask == 0) continue;
    const __m256d metrics = _mm256_div_pd(_mm256_sub_pd(v, vlimit), vdenom);
    fold_block(stats, i, metrics, mask, vmin, vmax);
  }
  if (stats.count > 0) {
    stats.metric_min = hmin(vmin);
    stats.metric_max = hmax(vmax);
  }
  for (; i < n; ++i) {
    const double mag = x[i] < 0 ? -x[i] : x[i];
    if (mag > limit) stats.merge_point(i, (mag - limit) / denom);
  }
  return stats;
}

void rates_avx2(double* dst, const double* x, const double* t_sec,
                std::size_t n) {
  if (n < 2) return;
  const std::size_t out = n - 1;
  std::size_t i = 0;
  for (; i + 4 <= out; i += 4) {
    const __m256d dx = _mm256_sub_pd(_mm256_loadu_pd(x + i + 1),
                                     _mm256_loadu_pd(x + i));
    const __m256d dt = _mm256_sub_pd(_mm256_loadu_pd(t_sec + i + 1),
                                     _mm256_loadu_pd(t_sec + i));
    _mm256_storeu_pd(dst + i, _mm256_div_pd(dx, dt));
  }
  for (; i < out; ++i) {
    dst[i] = (x[i + 1] - x[i]) / (t_sec[i + 1] - t_sec[i]);
  }
}

const KernelTable kAvx2Table = {
    "avx2",      min_max_avx2, sum_avx2,      dot_avx2,
    axpy_avx2,   band_excess_avx2, abs_over_avx2, rates_avx2,
};

}  // namespace

const KernelTable* avx2_table() { return &kAvx2Table; }

}  // namespace aexplain::kernels

#endif  // AEXPLAIN_HAVE_AVX2
