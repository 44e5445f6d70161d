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

#include "secprec/gsvd.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "secprec/wiretap.hpp"

namespace secprec {
namespace {

constexpr double kRankTol = 1e-12;     // relative, on squared singular values
constexpr double kClusterTol = 1e-9;   // on squared cosines
constexpr double kFavorTol = 1e-9;     // sigma1^2 - sigma2^2 margin for a favorable mode

Matrix scaled_columns_product(const Matrix& a, const Matrix& b, const std::vector<double>& diag) {
  // a * diag * b
  Matrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double v = a(i, k) * diag[k];
      if (v == 0.0) continue;
      for (std::size_t j = 0; j < b.cols(); ++j) out(i, j) += v * b(k, j);
    }
  }
  return out;
}

struct Decomposition {
  GsvdFactors factors;
  Matrix precoder;  // T = X^{-T} restricted to the row space; X^T T = I_r
};

Decomposition decompose(const Matrix& h1, const Matrix& h2) {
  if (h1.cols() != h2.cols()) throw std::invalid_argument("gsvd: H1 and H2 have different column counts");
  if (!h1.all_finite() || !h2.all_finite()) throw std::invalid_argument("gsvd: non-finite entries");

  const std::size_t n = h1.cols();
  const std::size_t m1 = h1.rows();
  const std::size_t m2 = h2.rows();

  // Row space of the stacked channel from its Gram matrix.
  SymMatrix g = gram(h1);
  g += gram(h2);
  const EigPair row = sym_eig(g);
  const double top = row.values.empty() ? 0.0 : row.values.front();
  std::size_t r = 0;
  while (r < n && row.values[r] > kRankTol * std::max(top, 1e-300) && row.values[r] > 0.0) ++r;

  std::vector<double> sv(r);
  Matrix w(n, r);
  for (std::size_t k = 0; k < r; ++k) {
    sv[k] = std::sqrt(row.values[k]);
    for (std::size_t i = 0; i < n; ++i) w(i, k) = row.vectors(i, k);
  }

  // Orthonormal column blocks Q1 = H1 W S^-1, Q2 = H2 W S^-1.
  std::vector<double> inv_sv(r);
  for (std::size_t k = 0; k < r; ++k) inv_sv[k] = 1.0 / sv[k];
  const Matrix q1 = scaled_columns_product(h1 * w, Matrix::identity(r), inv_sv);
  const Matrix q2 = scaled_columns_product(h2 * w, Matrix::identity(r), inv_sv);

  // CS step: Q1^T Q1 = Z diag(c^2) Z^T.
  const EigPair cs = sym_eig(gram(q1));
  Matrix z = cs.vectors;

  // Inside a cluster of equal cosines the basis is free; pick the one that
  // makes the precoder columns W S^-1 Z mutually orthogonal.
  for (std::size_t b = 0; b < r;) {
    std::size_t e = b + 1;
    while (e < r && std::abs(cs.values[b] - cs.values[e]) < kClusterTol) ++e;
    if (e - b > 1) {
      const std::size_t sz = e - b;
      Matrix block(sz, sz);
      for (std::size_t i = 0; i < sz; ++i) {
        for (std::size_t j = 0; j < sz; ++j) {
          double s = 0.0;
          for (std::size_t k = 0; k < r; ++k) {
            s += z(k, b + i) * inv_sv[k] * inv_sv[k] * z(k, b + j);
          }
          block(i, j) = s;
        }
      }
      const EigPair rot = sym_eig(SymMatrix(block));
      Matrix zb(r, sz);
      for (std::size_t k = 0; k < r; ++k) {
        for (std::size_t j = 0; j < sz; ++j) {
          double s = 0.0;
          for (std::size_t i = 0; i < sz; ++i) s += z(k, b + i) * rot.vectors(i, j);
          zb(k, j) = s;
        }
      }
      for (std::size_t k = 0; k < r; ++k) {
        for (std::size_t j = 0; j < sz; ++j) z(k, b + j) = zb(k, j);
      }
    }
    b = e;
  }

  const Matrix q1z = q1 * z;
  const Matrix q2z = q2 * z;

  Decomposition out;
  GsvdFactors& f = out.factors;
  f.sigma1.resize(r);
  f.sigma2.resize(r);
  f.left1 = Matrix(m1, r);
  f.left2 = Matrix(m2, r);
  for (std::size_t i = 0; i < r; ++i) {
    double c = 0.0;
    double s = 0.0;
    for (std::size_t row_i = 0; row_i < m1; ++row_i) c += q1z(row_i, i) * q1z(row_i, i);
    for (std::size_t row_i = 0; row_i < m2; ++row_i) s += q2z(row_i, i) * q2z(row_i, i);
    c = std::sqrt(c);
    s = std::sqrt(s);
    const double norm = std::hypot(c, s);
    f.sigma1[i] = c / norm;
    f.sigma2[i] = s / norm;
    // U_k diag(sigma_k) must reproduce Q_k Z, so fold the normalization into U.
    if (c > 1e-12) {
      for (std::size_t row_i = 0; row_i < m1; ++row_i) f.left1(row_i, i) = q1z(row_i, i) / f.sigma1[i];
    }
    if (s > 1e-12) {
      for (std::size_t row_i = 0; row_i < m2; ++row_i) f.left2(row_i, i) = q2z(row_i, i) / f.sigma2[i];
    }
  }

  // X^T = Z^T S W^T and its right inverse T = W S^-1 Z.
  f.right = Matrix(r, n);
  out.precoder = Matrix(n, r);
  for (std::size_t i = 0; i < r; ++i) {
    for (std::size_t c = 0; c < n; ++c) {
      double xr = 0.0;
      double tc = 0.0;
      for (std::size_t k = 0; k < r; ++k) {
        xr += z(k, i) * sv[k] * w(c, k);
        tc += w(c, k) * inv_sv[k] * z(k, i);
      }
      f.right(i, c) = xr;
      out.precoder(c, i) = tc;
    }
  }
  return out;
}

Matrix reconstruct(const Matrix& left, const std::vector<double>& sigma, const Matrix& right) {
  return scaled_columns_product(left, right, sigma);
}

}  // namespace

Matrix GsvdFactors::reconstruct_h1() const { return reconstruct(left1, sigma1, right); }
Matrix GsvdFactors::reconstruct_h2() const { return reconstruct(left2, sigma2, right); }

GsvdFactors gsvd(const Matrix& h1, const Matrix& h2) { return decompose(h1, h2).factors; }

CovariancePair gsvd_precode(const ChannelPair& ch, double power, double alpha) {
  ch.validate();
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw std::invalid_argument("gsvd_precode: alpha must be in [0, 1]");
  if (!(power >= 0.0)) throw std::invalid_argument("gsvd_precode: negative power");

  const Decomposition d = decompose(ch.h1, ch.h2);
  const GsvdFactors& f = d.factors;
  const std::size_t n = ch.nt();
  const std::size_t r = f.pairs();

  // Per-mode gain of the secrecy difference channel per unit transmit power.
  std::vector<double> norm2(r, 0.0);
  for (std::size_t i = 0; i < r; ++i) {
    for (std::size_t c = 0; c < n; ++c) norm2[i] += d.precoder(c, i) * d.precoder(c, i);
  }
  auto build = [&](bool user1, double budget) {
    std::vector<double> gains(r, 0.0);
    for (std::size_t i = 0; i < r; ++i) {
      const double s1 = f.sigma1[i] * f.sigma1[i];
      const double s2 = f.sigma2[i] * f.sigma2[i];
      const double margin = user1 ? s1 - s2 : s2 - s1;
      if (margin > kFavorTol) gains[i] = margin / norm2[i];
    }
    const std::vector<double> powers = waterfill_powers(gains, budget);
    Matrix q(n, n);
    for (std::size_t i = 0; i < r; ++i) {
      if (powers[i] <= 0.0) continue;
      const double scale = powers[i] / norm2[i];
      for (std::size_t a = 0; a < n; ++a) {
        for (std::size_t b = 0; b < n; ++b) q(a, b) += scale * d.precoder(a, i) * d.precoder(b, i);
      }
    }
    return SymMatrix(q);
  };

  CovariancePair out{build(true, alpha * power), build(false, (1.0 - alpha) * power), power};
  // Rounding in the outer products can push the summed trace a hair over P.
  const double tr = out.q1.trace() + out.q2.trace();
  if (tr > power && tr > 0.0) {
    out.q1 *= power / tr;
    out.q2 *= power / tr;
  }
  return out;
}

}  // namespace secprec
