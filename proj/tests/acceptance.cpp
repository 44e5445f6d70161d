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

// Acceptance suite. Prints one PASS/FAIL line per criterion and exits nonzero
// if any criterion fails. `acceptance 1 3 7` runs a subset.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "secprec/channels.hpp"
#include "secprec/dataset.hpp"
#include "secprec/eval.hpp"
#include "secprec/features.hpp"
#include "secprec/kernels.hpp"
#include "secprec/mlp.hpp"
#include "secprec/noma.hpp"
#include "secprec/parallel.hpp"
#include "secprec/random.hpp"
#include "secprec/secrecy_rates.hpp"
#include "secprec/wiretap.hpp"

using namespace secprec;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

Matrix random_matrix(Rng& rng, std::size_t rows, std::size_t cols) {
  Matrix m(rows, cols);
  for (double& v : m.data()) v = rng.normal();
  return m;
}

SymMatrix random_psd(Rng& rng, std::size_t n, double scale) {
  const Matrix b = random_matrix(rng, n, n);
  SymMatrix s(b * b.transposed());
  s *= scale / static_cast<double>(n);
  return s;
}

// Partial-pivot elimination in long double, for non-symmetric input.
long double det(const Matrix& a) {
  const std::size_t n = a.rows();
  std::vector<long double> m(a.data().begin(), a.data().end());
  long double d = 1.0L;
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < n; ++r) {
      if (std::fabs(m[r * n + c]) > std::fabs(m[piv * n + c])) piv = r;
    }
    if (m[piv * n + c] == 0.0L) return 0.0L;
    if (piv != c) {
      for (std::size_t j = 0; j < n; ++j) std::swap(m[c * n + j], m[piv * n + j]);
      d = -d;
    }
    d *= m[c * n + c];
    for (std::size_t r = c + 1; r < n; ++r) {
      const long double f = m[r * n + c] / m[c * n + c];
      for (std::size_t j = c; j < n; ++j) m[r * n + j] -= f * m[c * n + j];
    }
  }
  return d;
}

// ---------------------------------------------------------------------------

Outcome identity_suite() {
  const auto t0 = Clock::now();
  Rng rng(0x1d);
  double worst_det = 0.0, worst_whiten = 0.0;
  for (int t = 0; t < 1000; ++t) {
    const std::size_t nt = 1 + rng.below(3);
    const std::size_t n1 = 1 + rng.below(3);
    const std::size_t n2 = 1 + rng.below(3);
    const ChannelPair ch{random_matrix(rng, n1, nt), random_matrix(rng, n2, nt)};
    const SymMatrix q1 = random_psd(rng, nt, 5.0);
    const SymMatrix q2 = random_psd(rng, nt, 5.0);

    const Matrix& h = ch.h1;
    const long double lhs = det(h * q1.matrix() * h.transposed() + Matrix::identity(n1));
    const long double rhs = det(h.transposed() * h * q1.matrix() + Matrix::identity(nt));
    const double via_eig = std::exp2(logdet_pd(shifted_congruence(h, q1)));
    worst_det = std::max({worst_det, static_cast<double>(std::fabs(lhs - rhs) / std::fabs(lhs)),
                          std::abs(via_eig - static_cast<double>(lhs)) / static_cast<double>(lhs)});

    const SymMatrix total = q1 + q2;
    const double direct = 0.5 * (logdet_pd(shifted_congruence(ch.h2, total)) -
                                 logdet_pd(shifted_congruence(ch.h2, q1)) -
                                 logdet_pd(shifted_congruence(ch.h1, total)) +
                                 logdet_pd(shifted_congruence(ch.h1, q1)));
    const double whitened = wiretap_objective(whiten(ch.h2, q1), whiten(ch.h1, q1), q2);
    const double scale = std::max({std::abs(direct), std::abs(whitened), 1e-300});
    worst_whiten = std::max(worst_whiten, std::abs(direct - whitened) / scale);
  }
  const double secs = seconds_since(t0);
  return {worst_det <= 1e-8 && worst_whiten <= 1e-8 && secs < 10.0,
          fmt("1000 instances, worst rel det %.2e, worst rel whitening %.2e, %.2f s", worst_det,
              worst_whiten, secs)};
}

Outcome solver_vs_oracle() {
  const auto t0 = Clock::now();
  double worst_excess = 0.0;  // |pga - grid| - allowance
  double worst_gap = 0.0;
  int failures = 0;
  for (std::uint64_t s = 0; s < 50; ++s) {
    const ChannelPair ch = sample_channel_pair(2, 1, 1, derive_seed(0xc2, s));
    const WiretapProblem p{ch.h1, ch.h2, 10.0};
    const double pga = solve_wiretap_pga(p).rate;
    const double grid = solve_wiretap_grid(p, 64).rate;
    const double allowance = std::max(0.01 * grid, 0.01);
    worst_gap = std::max(worst_gap, std::abs(pga - grid));
    worst_excess = std::max(worst_excess, std::abs(pga - grid) - allowance);
    failures += std::abs(pga - grid) > allowance;
  }
  Rng rng(0xc3);
  double worst_scalar = 0.0;
  for (int t = 0; t < 200; ++t) {
    const double hm = rng.normal(), he = rng.normal();
    const double budget = 0.1 + 20.0 * rng.uniform();
    const double closed =
        hm * hm > he * he ? 0.5 * std::log2((1.0 + hm * hm * budget) / (1.0 + he * he * budget)) : 0.0;
    const SolverReport r = solve_wiretap_pga({Matrix{{hm}}, Matrix{{he}}, budget});
    const double expect_q = hm * hm > he * he ? budget : 0.0;
    worst_scalar = std::max({worst_scalar, std::abs(r.rate - closed), std::abs(r.q(0, 0) - expect_q) / budget});
  }
  const double secs = seconds_since(t0);
  return {failures == 0 && worst_scalar <= 1e-4 && secs < 120.0,
          fmt("%d/50 outside tolerance (worst |pga-grid| %.2e bits), scalar worst %.2e, %.1f s", failures,
              worst_gap, worst_scalar, secs)};
}

Outcome endpoints() {
  int bad = 0;
  for (std::uint64_t s = 0; s < 200; ++s) {
    const Dims d{2 + s % 2, 1 + s % 3, 1 + (s / 3) % 2};
    const ChannelPair ch = sample_channel_pair(d, derive_seed(0xe0, s));
    const SplitResult a0 = split_solve(ch, SplitConfig{0.0, 10.0, {}});
    const SplitResult a1 = split_solve(ch, SplitConfig{1.0, 10.0, {}});
    bad += !(a0.q.q1.is_zero() && a0.rates.r1 == 0.0);
    bad += !(a1.q.q2.is_zero() && a1.rates.r2 == 0.0);
  }
  return {bad == 0, fmt("200 channels (n_t 2 and 3), %d endpoint violations", bad)};
}

// Shared state for the training-based criteria.
struct TrainedSet {
  std::vector<double> alphas{0.0, 0.3, 0.5, 0.7, 1.0};
  ModelSet models;
  std::vector<ChannelPair> test;
  std::optional<RegionCurve> solver, dnn, gsvd;
  double train_seconds = 0.0;
  bool ok = false;
  std::string error;
};

constexpr int kMaxEpochs = 30;

TrainedSet& trained() {
  static TrainedSet set = [] {
    TrainedSet s;
    const auto t0 = Clock::now();
    const unsigned threads = default_threads();
    try {
      for (std::size_t i = 0; i < s.alphas.size(); ++i) {
        GenerateOptions g;
        g.alpha = s.alphas[i];
        g.power = 10.0;
        g.dims = Dims{2, 1, 1};
        g.threads = threads;
        g.count = 50000;
        g.seed = derive_seed(0x7a, i);
        const Dataset tr = generate_dataset(g);
        g.count = 10000;
        g.seed = derive_seed(0x7b, i);
        const Dataset va = generate_dataset(g);

        TrainConfig cfg;
        cfg.max_epochs = kMaxEpochs;
        cfg.seed = derive_seed(0x7c, i);
        const auto ti = Clock::now();
        TrainResult r = train(cfg, tr, va);
        std::printf("  trained alpha=%.1f: %zu iterations, %d epochs, best val_mse %.4g, %.0f s\n",
                    s.alphas[i], r.log.iterations, r.log.epochs_run, r.log.best_val_mse, seconds_since(ti));
        std::fflush(stdout);
        s.models.add(std::move(r.model));
      }
      s.test = sample_channel_set(Dims{2, 1, 1}, 1000, 0x7e57);
      const std::uint64_t region_seed = 0x7e57;
      s.solver = region_curve({Method::solver, 10.0, {}, nullptr}, s.test, s.alphas, region_seed, threads);
      s.dnn = region_curve({Method::dnn, 10.0, {}, &s.models}, s.test, s.alphas, region_seed, threads);
      s.gsvd = region_curve({Method::gsvd, 10.0, {}, nullptr}, s.test, s.alphas, region_seed, threads);
      s.ok = true;
    } catch (const std::exception& e) {
      s.error = e.what();
    }
    s.train_seconds = seconds_since(t0);
    return s;
  }();
  return set;
}

Outcome training_reproduction() {
  TrainedSet& s = trained();
  if (!s.ok) return {false, "training pipeline failed: " + s.error};
  const double frac = capacity_fraction(*s.dnn, *s.solver);
  std::string per_alpha;
  for (std::size_t i = 0; i < s.alphas.size(); ++i) {
    const RegionPoint& d = s.dnn->points[i];
    const RegionPoint& r = s.solver->points[i];
    per_alpha += fmt(" a=%.1f:%.4f/%.4f", d.alpha, d.r1 + d.r2, r.r1 + r.r2);
  }
  return {frac >= 95.0,
          fmt("capacity fraction %.2f%% (need >= 95%%), %d max epochs, %.0f s total;", frac, kMaxEpochs,
              s.train_seconds) +
              per_alpha};
}

Outcome gsvd_dominance() {
  TrainedSet& s = trained();
  if (!s.ok) return {false, "training pipeline failed: " + s.error};
  bool all = true;
  std::string detail;
  for (std::size_t i = 0; i < s.alphas.size(); ++i) {
    const double a = s.alphas[i];
    if (a == 0.0 || a == 1.0) continue;
    const double d = s.dnn->points[i].r1 + s.dnn->points[i].r2;
    const double g = s.gsvd->points[i].r1 + s.gsvd->points[i].r2;
    all = all && d > g;
    detail += fmt(" a=%.1f dnn %.4f gsvd %.4f;", a, d, g);
  }
  return {all, "mean R1+R2 at interior alphas:" + detail};
}

Outcome latency() {
  TrainedSet& s = trained();
  bool all = true;
  std::string detail;
  std::vector<double> ratios;
  for (std::size_t nt : {2u, 3u}) {
    const Dims d{nt, 1, 1};
    ModelSet models;
    const PrecoderModel* m = nt == 2 && s.ok ? s.models.find(0.5) : nullptr;
    if (m) {
      models.add(*m);
    } else {
      // Inference cost does not depend on the weight values.
      models.add(PrecoderModel::initialized(PrecoderModel::default_widths(nt),
                                            ModelContext{d, 0.5, 10.0, kFeatureVersion}, 0x1a7));
    }
    const auto channels = sample_channel_set(d, 200, 0x1a7 + nt);
    BenchOptions o;
    o.repetitions = 400;
    o.warmup = 20;
    o.alpha = 0.5;
    const auto res = bench_methods({{Method::solver, 10.0, {}, nullptr}, {Method::dnn, 10.0, {}, &models}},
                                   channels, o);
    const double ratio = res[1].mean_ms / res[0].mean_ms;
    ratios.push_back(ratio);
    all = all && ratio <= 1.0 / 3.0;
    // Context only: the same solver restarting every line search at step0.
    SolverOptions fixed;
    fixed.adaptive_step = false;
    o.repetitions = 100;
    const auto lit = bench_methods({{Method::solver, 10.0, fixed, nullptr}}, channels, o);
    detail += fmt(" n_t=%zu: pga %.4f ms, dnn %.4f ms, dnn/pga %.3f (need <= 0.333) [fixed-step pga %.4f ms];",
                  nt, res[0].mean_ms, res[1].mean_ms, ratio, lit[0].mean_ms);
  }
  detail += fmt(" gap %s from n_t=2 to n_t=3", ratios[1] < ratios[0] ? "widens" : "does not widen");
  return {all, "400 paired reps," + detail};
}

Outcome gradient_oracle() {
  const auto t0 = Clock::now();
  const ModelContext ctx{Dims{1, 1, 1}, 0.5, 10.0, kFeatureVersion};
  PrecoderModel m = PrecoderModel::initialized({6, 8, 7, 2}, ctx, 0x9d);
  Rng rng(0x9e);
  for (std::size_t l = 0; l < m.layer_count(); ++l) {
    for (double& b : m.biases(l)) b = 0.1 * rng.normal();
  }
  const std::size_t batch = 5;
  std::vector<double> in(batch * 6), tgt(batch * 2);
  for (double& v : in) v = rng.normal();
  for (double& v : tgt) v = rng.normal();

  double worst = 0.0;
  std::size_t checked = 0;
  for (auto backend : {kernels::Backend::scalar, kernels::Backend::avx2}) {
    if (!kernels::backend_available(backend)) continue;
    const kernels::Backend before = kernels::active_backend();
    kernels::set_backend(backend);
    std::vector<double> grad(m.params().size()), tmp(grad.size());
    loss_and_gradient(m, in, tgt, batch, grad);
    const double h = 1e-6;
    for (std::size_t p = 0; p < grad.size(); ++p) {
      PrecoderModel up = m, dn = m;
      up.params()[p] += h;
      dn.params()[p] -= h;
      const double fd =
          (loss_and_gradient(up, in, tgt, batch, tmp) - loss_and_gradient(dn, in, tgt, batch, tmp)) / (2 * h);
      worst = std::max(worst, std::abs(fd - grad[p]) / std::max(1.0, std::abs(grad[p])));
      ++checked;
    }
    kernels::set_backend(before);
  }
  const double secs = seconds_since(t0);
  return {worst <= 1e-5 && secs < 5.0,
          fmt("%zu parameter checks, worst relative error %.2e, %.2f s", checked, worst, secs)};
}

Outcome feasibility_sweep() {
  TrainedSet& s = trained();
  std::vector<PrecoderModel> models;
  if (s.ok) {
    for (double a : s.alphas) models.push_back(*s.models.find(a));
  }
  models.push_back(PrecoderModel::initialized(PrecoderModel::default_widths(3),
                                              ModelContext{Dims{3, 1, 1}, 0.5, 10.0, kFeatureVersion}, 0xfe));
  const std::size_t total = 100000;
  std::size_t bad = 0;
  double worst_eig = 0.0, worst_trace = 0.0;
  for (std::size_t i = 0; i < total; ++i) {
    const PrecoderModel& m = models[i % models.size()];
    const ChannelPair ch = sample_channel_pair(m.context().dims, derive_seed(0xfea5, i));
    const CovariancePair q = predict_covariances(m, ch);
    const double lmin = std::min(min_eigenvalue(q.q1), min_eigenvalue(q.q2));
    const double tr = q.q1.trace() + q.q2.trace();
    worst_eig = std::min(worst_eig, lmin);
    worst_trace = std::max(worst_trace, tr / m.context().power);
    bad += !(lmin >= -1e-9 && tr <= m.context().power * (1.0 + 1e-9));
  }
  return {bad == 0, fmt("%zu predictions from %zu models, %zu infeasible, min eigenvalue %.2e, max trace/P %.12f",
                        total, models.size(), bad, worst_eig, worst_trace)};
}

Outcome feature_range() {
  bool all = true;
  std::string detail;
  for (std::size_t nt : {2u, 3u}) {
    std::size_t inside = 0, count = 0;
    for (const ChannelPair& ch : sample_channel_set(Dims{nt, 1, 1}, 1000, 0xf9 + nt)) {
      for (double v : build_input(ch)) {
        inside += v >= -1.0 && v <= 1.0;
        ++count;
      }
    }
    const double frac = 100.0 * static_cast<double>(inside) / static_cast<double>(count);
    all = all && frac >= 99.0;
    detail += fmt(" n_t=%zu %.3f%%;", nt, frac);
  }
  return {all, "entries in [-1,1]:" + detail};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"identity suite", identity_suite},
      {"solver vs grid oracle", solver_vs_oracle},
      {"decomposition endpoints", endpoints},
      {"desk-scale training reproduction", training_reproduction},
      {"GSVD dominance", gsvd_dominance},
      {"latency", latency},
      {"gradient oracle", gradient_oracle},
      {"feasibility sweep", feasibility_sweep},
      {"feature range", feature_range},
  };
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));

  std::printf("kernels: %s\n", std::string(kernels::backend_name(kernels::active_backend())).c_str());
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!only.empty() && !only.count(id)) continue;
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("%s criterion %d (%s): %s\n", o.pass ? "PASS" : "FAIL", id, criteria[i].first, o.detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
