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

#pragma once

// Small dense real-matrix support: a row-major Matrix, an exactly symmetric
// SymMatrix, Jacobi eigendecomposition, base-2 log-determinants and PSD repair.
// Dimensions here are tiny (transmit antenna counts), so everything is
// value-semantic and allocation-light rather than BLAS-shaped.

#include <cstddef>
#include <initializer_list>
#include <limits>
#include <span>
#include <vector>

namespace secprec {

inline constexpr std::size_t kMaxSymDim = 16;

class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  Matrix(std::initializer_list<std::initializer_list<double>> rows);

  static Matrix identity(std::size_t n);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool empty() const { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }

  Matrix transposed() const;
  double frobenius_norm() const;
  bool all_finite() const;

  Matrix& operator+=(const Matrix& other);
  Matrix& operator-=(const Matrix& other);
  Matrix& operator*=(double s);

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

Matrix operator*(const Matrix& a, const Matrix& b);
Matrix operator+(Matrix a, const Matrix& b);
Matrix operator-(Matrix a, const Matrix& b);
Matrix operator*(double s, Matrix a);

// Square matrix whose (i,j) and (j,i) entries are bit-identical.
class SymMatrix {
 public:
  SymMatrix() = default;
  explicit SymMatrix(std::size_t dim);
  // Symmetrizes by averaging: S = (A + A^T) / 2. Throws for non-square A.
  explicit SymMatrix(const Matrix& a);
  SymMatrix(std::initializer_list<std::initializer_list<double>> rows);

  static SymMatrix identity(std::size_t n);
  static SymMatrix diagonal(std::span<const double> values);
  static SymMatrix diagonal(std::initializer_list<double> values);

  std::size_t dim() const { return m_.rows(); }
  double operator()(std::size_t r, std::size_t c) const { return m_(r, c); }
  // Writes both mirrored entries.
  void set(std::size_t r, std::size_t c, double v);

  const Matrix& matrix() const { return m_; }
  double trace() const;
  double frobenius_norm() const { return m_.frobenius_norm(); }
  bool all_finite() const { return m_.all_finite(); }
  bool is_zero() const;

  SymMatrix& operator+=(const SymMatrix& other);
  SymMatrix& operator*=(double s);

  friend bool operator==(const SymMatrix&, const SymMatrix&) = default;

 private:
  Matrix m_;
};

SymMatrix operator+(SymMatrix a, const SymMatrix& b);
SymMatrix operator-(const SymMatrix& a, const SymMatrix& b);
SymMatrix operator*(double s, SymMatrix a);

struct EigPair {
  std::vector<double> values;  // descending
  Matrix vectors;              // column k pairs with values[k]
};

EigPair sym_eig(const SymMatrix& a);
SymMatrix from_eig(std::span<const double> values, const Matrix& vectors);
double min_eigenvalue(const SymMatrix& a);

// log2 det(A) for positive definite A (min eigenvalue > 1e-12).
double logdet_pd(const SymMatrix& a);
SymMatrix inverse_pd(const SymMatrix& a);

// Eigenvalue clipping followed by uniform scaling onto tr <= budget. A PSD input
// already within budget comes back bit-identical.
SymMatrix project_psd(const SymMatrix& a,
                      double trace_budget = std::numeric_limits<double>::infinity());

// H Q H^T
SymMatrix congruence(const Matrix& h, const SymMatrix& q);
// H^T H
SymMatrix gram(const Matrix& h);
// I + H Q H^T
SymMatrix shifted_congruence(const Matrix& h, const SymMatrix& q);

// Eigenvalues at or above this are treated as nonnegative.
inline constexpr double kPsdTolerance = 1e-12;

}  // namespace secprec
