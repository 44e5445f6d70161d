// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// AVX2 + FMA variants. This translation unit is compiled with -mavx2 -mfma and
// must only be entered after the CPUID check in dispatch.cpp.

#include <immintrin.h>

#include <cmath>

#include "secprec/kernels.hpp"

namespace secprec::kernels {
namespace {

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

// MR x 12 register tile: 3 ymm columns per row.
template <int MR>
inline void tile_12(std::size_t k, const double* a, std::size_t lda, const double* b,
                    std::size_t ldb, double* c, std::size_t ldc, bool accumulate) {
  __m256d acc[MR][3];
  for (int r = 0; r < MR; ++r) {
    if (accumulate) {
      acc[r][0] = _mm256_loadu_pd(c + r * ldc);
      acc[r][1] = _mm256_loadu_pd(c + r * ldc + 4);
      acc[r][2] = _mm256_loadu_pd(c + r * ldc + 8);
    } else {
      acc[r][0] = acc[r][1] = acc[r][2] = _mm256_setzero_pd();
    }
  }
  for (std::size_t p = 0; p < k; ++p) {
    const double* brow = b + p * ldb;
    const __m256d b0 = _mm256_loadu_pd(brow);
    const __m256d b1 = _mm256_loadu_pd(brow + 4);
    const __m256d b2 = _mm256_loadu_pd(brow + 8);
    for (int r = 0; r < MR; ++r) {
      const __m256d ar = _mm256_broadcast_sd(a + r * lda + p);
      acc[r][0] = _mm256_fmadd_pd(ar, b0, acc[r][0]);
      acc[r][1] = _mm256_fmadd_pd(ar, b1, acc[r][1]);
      acc[r][2] = _mm256_fmadd_pd(ar, b2, acc[r][2]);
    }
  }
  for (int r = 0; r < MR; ++r) {
    _mm256_storeu_pd(c + r * ldc, acc[r][0]);
    _mm256_storeu_pd(c + r * ldc + 4, acc[r][1]);
    _mm256_storeu_pd(c + r * ldc + 8, acc[r][2]);
  }
}

template <int MR>
inline void tile_4(std::size_t k, const double* a, std::size_t lda, const double* b,
                   std::size_t ldb, double* c, std::size_t ldc, bool accumulate) {
  __m256d acc[MR];
  for (int r = 0; r < MR; ++r) {
    acc[r] = accumulate ? _mm256_loadu_pd(c + r * ldc) : _mm256_setzero_pd();
  }
  for (std::size_t p = 0; p < k; ++p) {
    const __m256d bv = _mm256_loadu_pd(b + p * ldb);
    for (int r = 0; r < MR; ++r) {
      acc[r] = _mm256_fmadd_pd(_mm256_broadcast_sd(a + r * lda + p), bv, acc[r]);
    }
  }
  for (int r = 0; r < MR; ++r) _mm256_storeu_pd(c + r * ldc, acc[r]);
}

template <int MR>
inline void tile_1(std::size_t k, const double* a, std::size_t lda, const double* b,
                   std::size_t ldb, double* c, std::size_t ldc, bool accumulate) {
  for (int r = 0; r < MR; ++r) {
    double s = accumulate ? c[r * ldc] : 0.0;
    for (std::size_t p = 0; p < k; ++p) s = std::fma(a[r * lda + p], b[p * ldb], s);
    c[r * ldc] = s;
  }
}

template <int MR>
inline void row_block(std::size_t n, std::size_t k, const double* a, std::size_t lda,
                      const double* b, std::size_t ldb, double* c, std::size_t ldc,
                      bool accumulate) {
  std::size_t j = 0;
  for (; j + 12 <= n; j += 12) tile_12<MR>(k, a, lda, b + j, ldb, c + j, ldc, accumulate);
  for (; j + 4 <= n; j += 4) tile_4<MR>(k, a, lda, b + j, ldb, c + j, ldc, accumulate);
  for (; j < n; ++j) tile_1<MR>(k, a, lda, b + j, ldb, c + j, ldc, accumulate);
}

void gemm_nn_avx2(std::size_t m, std::size_t n, std::size_t k, const double* a, std::size_t lda,
                  const double* b, std::size_t ldb, double* c, std::size_t ldc, bool accumulate) {
  if (k == 0) {
    if (!accumulate) {
      for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < n; ++j) c[i * ldc + j] = 0.0;
      }
    }
    return;
  }
  // Panel over k so a 12-wide strip of B stays in L1 across row blocks.
  constexpr std::size_t kc = 256;
  for (std::size_t p0 = 0; p0 < k; p0 += kc) {
    const std::size_t kb = k - p0 < kc ? k - p0 : kc;
    const bool acc = accumulate || p0 > 0;
    std::size_t i = 0;
    for (; i + 4 <= m; i += 4) {
      row_block<4>(n, kb, a + i * lda + p0, lda, b + p0 * ldb, ldb, c + i * ldc, ldc, acc);
    }
    for (; i < m; ++i) {
      row_block<1>(n, kb, a + i * lda + p0, lda, b + p0 * ldb, ldb, c + i * ldc, ldc, acc);
    }
  }
}

double dot_avx2(std::size_t n, const double* x, const double* y) {
  __m256d s0 = _mm256_setzero_pd();
  __m256d s1 = _mm256_setzero_pd();
  __m256d s2 = _mm256_setzero_pd();
  __m256d s3 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 16 <= n; i += 16) {
    s0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), s0);
    s1 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i + 4), _mm256_loadu_pd(y + i + 4), s1);
    s2 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i + 8), _mm256_loadu_pd(y + i + 8), s2);
    s3 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i + 12), _mm256_loadu_pd(y + i + 12), s3);
  }
  for (; i + 4 <= n; i += 4) {
    s0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), s0);
  }
  double s = hsum(_mm256_add_pd(_mm256_add_pd(s0, s1), _mm256_add_pd(s2, s3)));
  for (; i < n; ++i) s = std::fma(x[i], y[i], s);
  return s;
}

void gemv_avx2(std::size_t rows, std::size_t cols, const double* w, const double* x,
               const double* bias, double* y) {
  std::size_t r = 0;
  for (; r + 4 <= rows; r += 4) {
    const double* w0 = w + r * cols;
    const double* w1 = w0 + cols;
    const double* w2 = w1 + cols;
    const double* w3 = w2 + cols;
    __m256d s0 = _mm256_setzero_pd();
    __m256d s1 = _mm256_setzero_pd();
    __m256d s2 = _mm256_setzero_pd();
    __m256d s3 = _mm256_setzero_pd();
    std::size_t j = 0;
    for (; j + 4 <= cols; j += 4) {
      const __m256d xv = _mm256_loadu_pd(x + j);
      s0 = _mm256_fmadd_pd(_mm256_loadu_pd(w0 + j), xv, s0);
      s1 = _mm256_fmadd_pd(_mm256_loadu_pd(w1 + j), xv, s1);
      s2 = _mm256_fmadd_pd(_mm256_loadu_pd(w2 + j), xv, s2);
      s3 = _mm256_fmadd_pd(_mm256_loadu_pd(w3 + j), xv, s3);
    }
    double t0 = hsum(s0), t1 = hsum(s1), t2 = hsum(s2), t3 = hsum(s3);
    for (; j < cols; ++j) {
      t0 = std::fma(w0[j], x[j], t0);
      t1 = std::fma(w1[j], x[j], t1);
      t2 = std::fma(w2[j], x[j], t2);
      t3 = std::fma(w3[j], x[j], t3);
    }
    if (bias) {
      t0 += bias[r];
      t1 += bias[r + 1];
      t2 += bias[r + 2];
      t3 += bias[r + 3];
    }
    y[r] = t0;
    y[r + 1] = t1;
    y[r + 2] = t2;
    y[r + 3] = t3;
  }
  for (; r < rows; ++r) {
    const double s = dot_avx2(cols, w + r * cols, x);
    y[r] = bias ? s + bias[r] : s;
  }
}

void bias_act_avx2(std::size_t m, std::size_t n, const double* bias, double* y, std::size_t ldy,
                   bool relu) {
  const __m256d zero = _mm256_setzero_pd();
  for (std::size_t i = 0; i < m; ++i) {
    double* row = y + i * ldy;
    std::size_t j = 0;
    for (; j + 4 <= n; j += 4) {
      __m256d v = _mm256_loadu_pd(row + j);
      if (bias) v = _mm256_add_pd(v, _mm256_loadu_pd(bias + j));
      // max_pd returns the second operand for NaN input, matching the scalar path.
      if (relu) v = _mm256_max_pd(v, zero);
      _mm256_storeu_pd(row + j, v);
    }
    for (; j < n; ++j) {
      double v = bias ? row[j] + bias[j] : row[j];
      row[j] = (relu && !(v > 0.0)) ? 0.0 : v;
    }
  }
}

void relu_mask_avx2(std::size_t count, const double* act, double* grad) {
  const __m256d zero = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= count; i += 4) {
    const __m256d mask = _mm256_cmp_pd(_mm256_loadu_pd(act + i), zero, _CMP_GT_OQ);
    _mm256_storeu_pd(grad + i, _mm256_and_pd(mask, _mm256_loadu_pd(grad + i)));
  }
  for (; i < count; ++i) {
    if (!(act[i] > 0.0)) grad[i] = 0.0;
  }
}

void col_sum_avx2(std::size_t m, std::size_t n, const double* a, std::size_t lda, double* out,
                  bool accumulate) {
  std::size_t j = 0;
  for (; j + 4 <= n; j += 4) {
    __m256d s = accumulate ? _mm256_loadu_pd(out + j) : _mm256_setzero_pd();
    for (std::size_t i = 0; i < m; ++i) s = _mm256_add_pd(s, _mm256_loadu_pd(a + i * lda + j));
    _mm256_storeu_pd(out + j, s);
  }
  for (; j < n; ++j) {
    double s = accumulate ? out[j] : 0.0;
    for (std::size_t i = 0; i < m; ++i) s += a[i * lda + j];
    out[j] = s;
  }
}

void adam_step_avx2(std::size_t count, double* param, const double* grad, double* m, double* v,
                    const AdamCoeffs& c) {
  const __m256d b1 = _mm256_set1_pd(c.beta1);
  const __m256d b2 = _mm256_set1_pd(c.beta2);
  const __m256d omb1 = _mm256_set1_pd(1.0 - c.beta1);
  const __m256d omb2 = _mm256_set1_pd(1.0 - c.beta2);
  const __m256d ib1 = _mm256_set1_pd(c.inv_bias1);
  const __m256d ib2 = _mm256_set1_pd(c.inv_bias2);
  const __m256d lr = _mm256_set1_pd(c.lr);
  const __m256d eps = _mm256_set1_pd(c.eps);
  std::size_t i = 0;
  for (; i + 4 <= count; i += 4) {
    const __m256d g = _mm256_loadu_pd(grad + i);
    const __m256d mv = _mm256_fmadd_pd(b1, _mm256_loadu_pd(m + i), _mm256_mul_pd(omb1, g));
    const __m256d vv =
        _mm256_fmadd_pd(b2, _mm256_loadu_pd(v + i), _mm256_mul_pd(omb2, _mm256_mul_pd(g, g)));
    _mm256_storeu_pd(m + i, mv);
    _mm256_storeu_pd(v + i, vv);
    const __m256d denom = _mm256_add_pd(_mm256_sqrt_pd(_mm256_mul_pd(vv, ib2)), eps);
    const __m256d upd = _mm256_div_pd(_mm256_mul_pd(lr, _mm256_mul_pd(mv, ib1)), denom);
    _mm256_storeu_pd(param + i, _mm256_sub_pd(_mm256_loadu_pd(param + i), upd));
  }
  for (; i < count; ++i) {
    const double g = grad[i];
    m[i] = c.beta1 * m[i] + (1.0 - c.beta1) * g;
    v[i] = c.beta2 * v[i] + (1.0 - c.beta2) * g * g;
    param[i] -= c.lr * (m[i] * c.inv_bias1) / (std::sqrt(v[i] * c.inv_bias2) + c.eps);
  }
}

}  // namespace

extern const KernelTable kAvx2Table;
const KernelTable kAvx2Table{
    Backend::avx2, "avx2",      gemm_nn_avx2,   gemv_avx2, bias_act_avx2,
    relu_mask_avx2, col_sum_avx2, adam_step_avx2, dot_avx2,
};

}  // namespace secprec::kernels
