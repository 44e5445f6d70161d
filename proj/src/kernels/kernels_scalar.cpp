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

#include <cmath>

#include "secprec/kernels.hpp"

namespace secprec::kernels {
namespace {

void gemm_nn_scalar(std::size_t m, std::size_t n, std::size_t k, const double* a, std::size_t lda,
                    const double* b, std::size_t ldb, double* c, std::size_t ldc, bool accumulate) {
  for (std::size_t i = 0; i < m; ++i) {
    double* crow = c + i * ldc;
    if (!accumulate) {
      for (std::size_t j = 0; j < n; ++j) crow[j] = 0.0;
    }
    const double* arow = a + i * lda;
    for (std::size_t p = 0; p < k; ++p) {
      const double aip = arow[p];
      const double* brow = b + p * ldb;
      for (std::size_t j = 0; j < n; ++j) crow[j] += aip * brow[j];
    }
  }
}

double dot_scalar(std::size_t n, const double* x, const double* y) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += x[i] * y[i];
  return s;
}

void gemv_scalar(std::size_t rows, std::size_t cols, const double* w, const double* x,
                 const double* bias, double* y) {
  for (std::size_t r = 0; r < rows; ++r) {
    const double s = dot_scalar(cols, w + r * cols, x);
    y[r] = bias ? s + bias[r] : s;
  }
}

void bias_act_scalar(std::size_t m, std::size_t n, const double* bias, double* y, std::size_t ldy,
                     bool relu) {
  for (std::size_t i = 0; i < m; ++i) {
    double* row = y + i * ldy;
    for (std::size_t j = 0; j < n; ++j) {
      double v = bias ? row[j] + bias[j] : row[j];
      row[j] = (relu && !(v > 0.0)) ? 0.0 : v;
    }
  }
}

void relu_mask_scalar(std::size_t count, const double* act, double* grad) {
  for (std::size_t i = 0; i < count; ++i) {
    if (!(act[i] > 0.0)) grad[i] = 0.0;
  }
}

void col_sum_scalar(std::size_t m, std::size_t n, const double* a, std::size_t lda, double* out,
                    bool accumulate) {
  if (!accumulate) {
    for (std::size_t j = 0; j < n; ++j) out[j] = 0.0;
  }
  for (std::size_t i = 0; i < m; ++i) {
    const double* row = a + i * lda;
    for (std::size_t j = 0; j < n; ++j) out[j] += row[j];
  }
}

void adam_step_scalar(std::size_t count, double* param, const double* grad, double* m, double* v,
                      const AdamCoeffs& c) {
  for (std::size_t i = 0; i < count; ++i) {
    const double g = grad[i];
    m[i] = c.beta1 * m[i] + (1.0 - c.beta1) * g;
    v[i] = c.beta2 * v[i] + (1.0 - c.beta2) * g * g;
    const double mhat = m[i] * c.inv_bias1;
    const double vhat = v[i] * c.inv_bias2;
    param[i] -= c.lr * mhat / (std::sqrt(vhat) + c.eps);
  }
}

constexpr KernelTable kScalarTable{
    Backend::scalar, "scalar",      gemm_nn_scalar,   gemv_scalar, bias_act_scalar,
    relu_mask_scalar, col_sum_scalar, adam_step_scalar, dot_scalar,
};

}  // namespace

const KernelTable& scalar_table() { return kScalarTable; }

}  // namespace secprec::kernels
