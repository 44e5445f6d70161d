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

#include "secprec/matcore.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace secprec {

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows) {
  rows_ = rows.size();
  cols_ = rows_ ? rows.begin()->size() : 0;
  data_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    if (r.size() != cols_) throw std::invalid_argument("Matrix: ragged initializer");
    data_.insert(data_.end(), r.begin(), r.end());
  }
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::transposed() const {
  Matrix t(cols_, rows_);
  for (std::size_t r = 0; r < rows_; ++r) {
    for (std::size_t c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
  }
  return t;
}

double Matrix::frobenius_norm() const {
  double s = 0.0;
  for (double v : data_) s += v * v;
  return std::sqrt(s);
}

bool Matrix::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

Matrix& Matrix::operator+=(const Matrix& other) {
  if (rows_ != other.rows_ || cols_ != other.cols_) {
    throw std::invalid_argument("Matrix +=: shape mismatch");
  }
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
  return *this;
}

Matrix& Matrix::operator-=(const Matrix& other) {
  if (rows_ != other.rows_ || cols_ != other.cols_) {
    throw std::invalid_argument("Matrix -=: shape mismatch");
  }
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= other.data_[i];
  return *this;
}

Matrix& Matrix::operator*=(double s) {
  for (double& v : data_) v *= s;
  return *this;
}

Matrix operator*(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) throw std::invalid_argument("Matrix *: inner dimension mismatch");
  Matrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
    }
  }
  return c;
}

Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }
Matrix operator*(double s, Matrix a) { return a *= s; }

SymMatrix::SymMatrix(std::size_t dim) : m_(dim, dim) {}

SymMatrix::SymMatrix(const Matrix& a) : m_(a.rows(), a.cols()) {
  if (a.rows() != a.cols()) throw std::invalid_argument("SymMatrix: input is not square");
  const std::size_t n = a.rows();
  for (std::size_t i = 0; i < n; ++i) {
    m_(i, i) = a(i, i);
    for (std::size_t j = i + 1; j < n; ++j) {
      const double v = 0.5 * (a(i, j) + a(j, i));
      m_(i, j) = v;
      m_(j, i) = v;
    }
  }
}

SymMatrix::SymMatrix(std::initializer_list<std::initializer_list<double>> rows)
    : SymMatrix(Matrix(rows)) {}

SymMatrix SymMatrix::identity(std::size_t n) {
  SymMatrix s(n);
  for (std::size_t i = 0; i < n; ++i) s.m_(i, i) = 1.0;
  return s;
}

SymMatrix SymMatrix::diagonal(std::span<const double> values) {
  SymMatrix s(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) s.m_(i, i) = values[i];
  return s;
}

SymMatrix SymMatrix::diagonal(std::initializer_list<double> values) {
  return diagonal(std::span<const double>(values.begin(), values.size()));
}

void SymMatrix::set(std::size_t r, std::size_t c, double v) {
  m_(r, c) = v;
  m_(c, r) = v;
}

double SymMatrix::trace() const {
  double t = 0.0;
  for (std::size_t i = 0; i < dim(); ++i) t += m_(i, i);
  return t;
}

bool SymMatrix::is_zero() const {
  const auto d = m_.data();
  return std::all_of(d.begin(), d.end(), [](double v) { return v == 0.0; });
}

SymMatrix& SymMatrix::operator+=(const SymMatrix& other) {
  m_ += other.m_;
  return *this;
}

SymMatrix& SymMatrix::operator*=(double s) {
  m_ *= s;
  return *this;
}

SymMatrix operator+(SymMatrix a, const SymMatrix& b) { return a += b; }

SymMatrix operator-(const SymMatrix& a, const SymMatrix& b) {
  return SymMatrix(a.matrix() - b.matrix());
}

SymMatrix operator*(double s, SymMatrix a) { return a *= s; }

EigPair sym_eig(const SymMatrix& a) {
  const std::size_t n = a.dim();
  if (n > kMaxSymDim) throw std::invalid_argument("sym_eig: dimension exceeds 16");
  if (!a.all_finite()) throw std::invalid_argument("sym_eig: non-finite entries");

  Matrix m = a.matrix();
  Matrix v = Matrix::identity(n);

  // Cyclic Jacobi sweeps.
  const double scale = m.frobenius_norm();
  for (int sweep = 0; sweep < 100 && n > 1; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) off += m(p, q) * m(p, q);
    }
    if (off == 0.0 || std::sqrt(off) <= 1e-300 + 1e-17 * scale) break;

    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = m(p, q);
        if (apq == 0.0) continue;
        const double theta = (m(q, q) - m(p, p)) / (2.0 * apq);
        const double t = std::copysign(1.0, theta) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        const double tau = s / (1.0 + c);

        m(p, p) -= t * apq;
        m(q, q) += t * apq;
        m(p, q) = 0.0;
        m(q, p) = 0.0;
        for (std::size_t r = 0; r < n; ++r) {
          if (r == p || r == q) continue;
          const double arp = m(r, p);
          const double arq = m(r, q);
          const double nrp = arp - s * (arq + tau * arp);
          const double nrq = arq + s * (arp - tau * arq);
          m(r, p) = nrp;
          m(p, r) = nrp;
          m(r, q) = nrq;
          m(q, r) = nrq;
        }
        for (std::size_t r = 0; r < n; ++r) {
          const double vrp = v(r, p);
          const double vrq = v(r, q);
          v(r, p) = vrp - s * (vrq + tau * vrp);
          v(r, q) = vrq + s * (vrp - tau * vrq);
        }
      }
    }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return m(i, i) > m(j, j); });

  EigPair out;
  out.values.resize(n);
  out.vectors = Matrix(n, n);
  for (std::size_t k = 0; k < n; ++k) {
    out.values[k] = m(order[k], order[k]);
    for (std::size_t r = 0; r < n; ++r) out.vectors(r, k) = v(r, order[k]);
  }
  return out;
}

SymMatrix from_eig(std::span<const double> values, const Matrix& vectors) {
  const std::size_t n = vectors.rows();
  Matrix out(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < values.size(); ++k) {
        s += vectors(i, k) * values[k] * vectors(j, k);
      }
      out(i, j) = s;
      out(j, i) = s;
    }
  }
  return SymMatrix(out);
}

double min_eigenvalue(const SymMatrix& a) {
  if (a.dim() == 0) return 0.0;
  return sym_eig(a).values.back();
}

double logdet_pd(const SymMatrix& a) {
  if (a.dim() == 1) {
    const double v = a(0, 0);
    if (!std::isfinite(v)) throw std::invalid_argument("logdet_pd: non-finite entries");
    if (!(v > 1e-12)) {
      std::ostringstream msg;
      msg << "logdet_pd: matrix is not positive definite (min eigenvalue " << v << ")";
      throw std::domain_error(msg.str());
    }
    return std::log2(v);
  }
  const EigPair e = sym_eig(a);
  if (e.values.empty()) return 0.0;
  const double lmin = e.values.back();
  if (!(lmin > 1e-12)) {
    std::ostringstream msg;
    msg << "logdet_pd: matrix is not positive definite (min eigenvalue " << lmin << ")";
    throw std::domain_error(msg.str());
  }
  double s = 0.0;
  for (double l : e.values) s += std::log2(l);
  return s;
}

SymMatrix inverse_pd(const SymMatrix& a) {
  const EigPair e = sym_eig(a);
  std::vector<double> inv(e.values.size());
  for (std::size_t k = 0; k < inv.size(); ++k) {
    if (!(e.values[k] > 1e-12)) {
      throw std::domain_error("inverse_pd: matrix is not positive definite");
    }
    inv[k] = 1.0 / e.values[k];
  }
  return from_eig(inv, e.vectors);
}

SymMatrix project_psd(const SymMatrix& a, double trace_budget) {
  if (!(trace_budget >= 0.0)) throw std::invalid_argument("project_psd: negative trace budget");
  if (a.dim() == 0) return a;

  const EigPair e = sym_eig(a);
  SymMatrix out = a;
  if (e.values.back() < -kPsdTolerance) {
    std::vector<double> clipped(e.values);
    for (double& l : clipped) l = std::max(l, 0.0);
    out = from_eig(clipped, e.vectors);
  }
  const double tr = out.trace();
  if (tr > trace_budget) out *= trace_budget / tr;
  return out;
}

SymMatrix congruence(const Matrix& h, const SymMatrix& q) {
  if (h.cols() != q.dim()) throw std::invalid_argument("congruence: shape mismatch");
  const Matrix hq = h * q.matrix();
  const std::size_t n = h.rows();
  Matrix out(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < h.cols(); ++k) s += hq(i, k) * h(j, k);
      out(i, j) = s;
      out(j, i) = s;
    }
  }
  return SymMatrix(out);
}

SymMatrix shifted_congruence(const Matrix& h, const SymMatrix& q) {
  SymMatrix s = congruence(h, q);
  for (std::size_t i = 0; i < s.dim(); ++i) s.set(i, i, s(i, i) + 1.0);
  return s;
}

SymMatrix gram(const Matrix& h) {
  const std::size_t n = h.cols();
  Matrix out(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      double s = 0.0;
      for (std::size_t r = 0; r < h.rows(); ++r) s += h(r, i) * h(r, j);
      out(i, j) = s;
      out(j, i) = s;
    }
  }
  return SymMatrix(out);
}

}  // namespace secprec
