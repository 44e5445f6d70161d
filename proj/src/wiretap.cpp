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

#include "secprec/wiretap.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "secprec/secrecy_rates.hpp"

namespace secprec {
namespace {

constexpr double kMaxStepGrowth = 1e6;
constexpr int kGridAngleFactor = 8;

}  // namespace

void WiretapProblem::validate() const {
  if (legit.cols() == 0 || legit.cols() != eaves.cols()) {
    throw std::invalid_argument("WiretapProblem: legitimate and eavesdropper channels are not conformal");
  }
  if (!(budget >= 0.0) || !std::isfinite(budget)) {
    throw std::invalid_argument("WiretapProblem: budget must be finite and nonnegative");
  }
  if (!legit.all_finite() || !eaves.all_finite()) {
    throw std::invalid_argument("WiretapProblem: non-finite channel entries");
  }
}

std::vector<double> waterfill_powers(std::span<const double> gains, double budget) {
  if (!(budget >= 0.0)) throw std::invalid_argument("waterfill: negative budget");
  std::vector<double> powers(gains.size(), 0.0);
  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < gains.size(); ++i) {
    if (gains[i] > 0.0 && std::isfinite(gains[i])) order.push_back(i);
  }
  if (order.empty() || budget == 0.0) return powers;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return gains[a] > gains[b]; });

  // Largest active set whose water level clears its weakest mode.
  std::size_t active = order.size();
  double level = 0.0;
  for (; active >= 1; --active) {
    double inv_sum = 0.0;
    for (std::size_t i = 0; i < active; ++i) inv_sum += 1.0 / gains[order[i]];
    level = (budget + inv_sum) / static_cast<double>(active);
    if (level - 1.0 / gains[order[active - 1]] > 0.0) break;
  }
  for (std::size_t i = 0; i < active; ++i) {
    powers[order[i]] = std::max(0.0, level - 1.0 / gains[order[i]]);
  }
  return powers;
}

SymMatrix waterfill(const Matrix& h, double budget) {
  if (!(budget >= 0.0)) throw std::invalid_argument("waterfill: negative budget");
  const EigPair e = sym_eig(gram(h));
  if (e.values.empty()) return SymMatrix(0);
  const double floor = 1e-12 * std::max(1.0, e.values.front());
  std::vector<double> gains(e.values);
  for (double& g : gains) {
    if (g <= floor) g = 0.0;
  }
  const std::vector<double> powers = waterfill_powers(gains, budget);
  return from_eig(powers, e.vectors);
}

SymMatrix wiretap_gradient(const Matrix& legit, const Matrix& eaves, const SymMatrix& q) {
  const SymMatrix a = inverse_pd(shifted_congruence(legit, q));
  const SymMatrix b = inverse_pd(shifted_congruence(eaves, q));
  SymMatrix g = congruence(legit.transposed(), a) - congruence(eaves.transposed(), b);
  g *= 0.5 / std::numbers::ln2;
  return g;
}

SolverReport solve_wiretap_pga(const WiretapProblem& p, const SolverOptions& opts) {
  p.validate();
  const std::size_t n = p.legit.cols();
  SolverReport report{SymMatrix(n), 0.0, 0, true};
  if (p.budget == 0.0) return report;

  const double step0 = opts.step0.value_or(0.1 * p.budget);
  if (!(step0 > 0.0)) throw std::invalid_argument("solve_wiretap_pga: step0 must be positive");
  SymMatrix q = SymMatrix::identity(n);
  q *= p.budget / static_cast<double>(n);
  double f = wiretap_objective(p.legit, p.eaves, q);

  report.converged = false;
  double step = 0.5 * step0;  // doubled before the first trial
  for (int it = 0; it < opts.max_iters; ++it) {
    const SymMatrix g = wiretap_gradient(p.legit, p.eaves, q);
    report.iterations = it + 1;
    // Adaptive rule: restart the search from twice the last accepted step.
    step = opts.adaptive_step ? std::min(2.0 * step, kMaxStepGrowth * step0) : step0;
    bool accepted = false;
    SymMatrix next;
    double fnext = f;
    for (int halving = 0; halving < 60; ++halving, step *= 0.5) {
      SymMatrix trial = q;
      trial += step * g;
      next = project_psd(trial, p.budget);
      fnext = wiretap_objective(p.legit, p.eaves, next);
      if (fnext >= f) {
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      report.converged = true;
      break;
    }
    const double gain = fnext - f;
    q = std::move(next);
    f = fnext;
    if (gain < opts.tol) {
      report.converged = true;
      break;
    }
  }

  if (f <= 0.0) {
    report.q = SymMatrix(n);
    report.rate = 0.0;
  } else {
    report.q = std::move(q);
    report.rate = f;
  }
  return report;
}

SolverReport solve_wiretap_grid(const WiretapProblem& p, int resolution) {
  p.validate();
  const std::size_t n = p.legit.cols();
  if (n > 2) throw std::invalid_argument("solve_wiretap_grid: only nt <= 2 is supported");
  if (resolution < 1) throw std::invalid_argument("solve_wiretap_grid: resolution must be >= 1");

  SolverReport best{SymMatrix(n), 0.0, 0, true};
  const double res = static_cast<double>(resolution);
  auto consider = [&](const SymMatrix& q) {
    const double f = wiretap_objective(p.legit, p.eaves, q);
    ++best.iterations;
    if (f > best.rate) {
      best.rate = f;
      best.q = q;
    }
  };

  if (n == 1) {
    for (int i = 1; i <= resolution; ++i) consider(SymMatrix{{p.budget * i / res}});
    return best;
  }

  // 2x2 closed form via |I + H Q H^T| = |I + H^T H Q|.
  const SymMatrix gm = gram(p.legit);
  const SymMatrix ge = gram(p.eaves);
  auto det_shift = [](const SymMatrix& g, double q00, double q01, double q11) {
    const double a = 1.0 + g(0, 0) * q00 + g(0, 1) * q01;
    const double b = g(0, 0) * q01 + g(0, 1) * q11;
    const double c = g(1, 0) * q00 + g(1, 1) * q01;
    const double d = 1.0 + g(1, 0) * q01 + g(1, 1) * q11;
    return a * d - b * c;
  };
  // The rate is far steeper in beam direction than in the power split.
  const int angle_steps = kGridAngleFactor * resolution;
  for (int i = 0; i <= resolution; ++i) {
    for (int j = 0; i + j <= resolution; ++j) {
      if (i == 0 && j == 0) continue;
      const double p1 = p.budget * i / res;
      const double p2 = p.budget * j / res;
      // Isotropic points do not depend on the angle.
      const int angles = (i == j) ? 1 : angle_steps;
      for (int k = 0; k < angles; ++k) {
        const double theta = std::numbers::pi * k / angle_steps;
        const double c = std::cos(theta);
        const double s = std::sin(theta);
        const double q00 = p1 * c * c + p2 * s * s;
        const double q11 = p1 * s * s + p2 * c * c;
        const double q01 = (p1 - p2) * c * s;
        const double f = 0.5 * std::log2(det_shift(gm, q00, q01, q11) / det_shift(ge, q00, q01, q11));
        ++best.iterations;
        if (f > best.rate) {
          best.rate = f;
          best.q = SymMatrix{{q00, q01}, {q01, q11}};
        }
      }
    }
  }
  return best;
}

}  // namespace secprec
