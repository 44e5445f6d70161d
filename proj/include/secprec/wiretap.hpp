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

// Covariance design for a single MIMO wiretap channel:
//   maximize 1/2 log2 |I + Hm Q Hm^T| / |I + He Q He^T|  s.t.  Q >= 0, tr(Q) <= budget.

#include <optional>
#include <span>
#include <vector>

#include "secprec/matcore.hpp"

namespace secprec {

struct WiretapProblem {
  Matrix legit;  // Hm
  Matrix eaves;  // He
  double budget = 0.0;

  void validate() const;
};

struct SolverOptions {
  int max_iters = 500;
  std::optional<double> step0;  // defaults to 0.1 * budget
  double tol = 1e-8;            // bits
  // When false every iteration restarts the line search at step0.
  bool adaptive_step = true;
};

struct SolverReport {
  SymMatrix q;
  double rate = 0.0;
  int iterations = 0;
  bool converged = false;
};

// Water-filling levels: p_i = max(0, mu - 1/g_i) with sum p_i = budget.
// Nonpositive gains receive no power. Any ordering of `gains` is accepted.
std::vector<double> waterfill_powers(std::span<const double> gains, double budget);

// Classical water-filling for max 1/2 log2|I + H Q H^T| under tr(Q) <= budget.
SymMatrix waterfill(const Matrix& h, double budget);

// Euclidean gradient of wiretap_objective with respect to Q.
SymMatrix wiretap_gradient(const Matrix& legit, const Matrix& eaves, const SymMatrix& q);

// Projected gradient ascent from the isotropic point (budget/nt) I: step along
// the Euclidean gradient, halve until the objective does not decrease, repair
// with project_psd, stop when the gain drops below tol.
SolverReport solve_wiretap_pga(const WiretapProblem& p, const SolverOptions& opts = {});

// Exhaustive oracle for nt <= 2: eigenvalues on a simplex grid of the given
// resolution and, for nt == 2, eigenvector angle on an 8x finer grid over
// [0, pi). Returns Q = 0 unless some grid point has positive secrecy rate.
SolverReport solve_wiretap_grid(const WiretapProblem& p, int resolution);

}  // namespace secprec
