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

#include "secprec/eval.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "secprec/gsvd.hpp"
#include "secprec/noma.hpp"
#include "secprec/parallel.hpp"

namespace secprec {

std::string_view method_name(Method m) {
  switch (m) {
    case Method::solver: return "solver";
    case Method::dnn: return "dnn";
    case Method::gsvd: return "gsvd";
  }
  return "unknown";
}

Method parse_method(std::string_view name) {
  if (name == "solver") return Method::solver;
  if (name == "dnn") return Method::dnn;
  if (name == "gsvd") return Method::gsvd;
  throw std::invalid_argument("unknown method '" + std::string(name) + "' (expected solver, dnn or gsvd)");
}

void ModelSet::add(PrecoderModel model) {
  const double a = model.context().alpha;
  models_.insert_or_assign(a, std::move(model));
}

const PrecoderModel* ModelSet::find(double alpha) const {
  auto it = models_.lower_bound(alpha - 1e-9);
  if (it != models_.end() && std::abs(it->first - alpha) <= 1e-9) return &it->second;
  return nullptr;
}

CovariancePair produce_covariances(const CovarianceRequest& req, const ChannelPair& ch, double alpha) {
  switch (req.method) {
    case Method::solver:
      return split_solve(ch, SplitConfig{alpha, req.power, req.solver}).q;
    case Method::gsvd:
      return gsvd_precode(ch, req.power, alpha);
    case Method::dnn: {
      const PrecoderModel* m = req.models ? req.models->find(alpha) : nullptr;
      if (!m) {
        throw std::invalid_argument("no trained model for alpha=" + std::to_string(alpha));
      }
      if (m->context().power != req.power) {
        throw std::invalid_argument("model for alpha=" + std::to_string(alpha) +
                                    " was trained for a different power budget");
      }
      return predict_covariances(*m, ch);
    }
  }
  throw std::logic_error("unreachable method");
}

RegionCurve region_curve(const CovarianceRequest& req, const std::vector<ChannelPair>& channels,
                         const std::vector<double>& alphas, std::uint64_t seed, unsigned threads) {
  if (channels.empty()) throw std::invalid_argument("region_curve: empty channel set");
  if (req.method == Method::dnn) {
    for (double a : alphas) {
      if (!req.models || !req.models->find(a)) {
        throw std::invalid_argument("region_curve: missing model for alpha=" + std::to_string(a));
      }
    }
  }
  RegionCurve curve;
  curve.method = req.method;
  curve.dims = {channels.front().nt(), channels.front().n1(), channels.front().n2()};
  curve.power = req.power;
  curve.n_channels = channels.size();
  curve.seed = seed;

  for (double a : alphas) {
    std::vector<RatePair> rates(channels.size());
    parallel_for(channels.size(), threads, [&](std::size_t i) {
      rates[i] = secrecy_rates(produce_covariances(req, channels[i], a), channels[i]);
    });
    RegionPoint p{a, 0.0, 0.0};
    for (const RatePair& r : rates) {
      p.r1 += r.r1;
      p.r2 += r.r2;
    }
    p.r1 /= static_cast<double>(channels.size());
    p.r2 /= static_cast<double>(channels.size());
    curve.points.push_back(p);
  }
  return curve;
}

double capacity_fraction(const RegionCurve& test, const RegionCurve& reference) {
  if (test.points.size() != reference.points.size() || test.power != reference.power ||
      test.n_channels != reference.n_channels || !(test.dims == reference.dims) ||
      test.seed != reference.seed) {
    throw std::invalid_argument("capacity_fraction: curves do not share alphas, channels and power");
  }
  double sum = 0.0;
  std::size_t used = 0;
  for (std::size_t i = 0; i < test.points.size(); ++i) {
    const RegionPoint& t = test.points[i];
    const RegionPoint& r = reference.points[i];
    if (std::abs(t.alpha - r.alpha) > 1e-12) {
      throw std::invalid_argument("capacity_fraction: alpha grids differ");
    }
    const double ref = r.r1 + r.r2;
    if (ref < 1e-9) continue;
    sum += (t.r1 + t.r2) / ref;
    ++used;
  }
  if (used == 0) throw std::invalid_argument("capacity_fraction: reference curve has no positive points");
  return 100.0 * sum / static_cast<double>(used);
}

double label_mse(const PrecoderModel& model, const Dataset& test) {
  const ModelContext& ctx = model.context();
  const DatasetHeader& h = test.header();
  if (!(ctx.dims == h.dims) || ctx.alpha != h.alpha || ctx.power != h.power) {
    throw std::invalid_argument("label_mse: model context does not match the dataset header");
  }
  return dataset_mse(model, test);
}

std::vector<BenchResult> bench_methods(const std::vector<CovarianceRequest>& methods,
                                       const std::vector<ChannelPair>& channels,
                                       const BenchOptions& opts) {
  if (opts.repetitions < 30) throw std::invalid_argument("bench_methods: at least 30 repetitions required");
  if (channels.empty() || methods.empty()) throw std::invalid_argument("bench_methods: nothing to measure");

  using clock = std::chrono::steady_clock;
  std::vector<std::vector<double>> samples(methods.size());
  volatile double sink = 0.0;
  for (std::size_t w = 0; w < opts.warmup; ++w) {
    for (const auto& m : methods) sink = sink + produce_covariances(m, channels[w % channels.size()], opts.alpha).q1.trace();
  }
  for (std::size_t rep = 0; rep < opts.repetitions; ++rep) {
    const ChannelPair& ch = channels[rep % channels.size()];
    for (std::size_t k = 0; k < methods.size(); ++k) {
      const auto t0 = clock::now();
      const CovariancePair q = produce_covariances(methods[k], ch, opts.alpha);
      const auto t1 = clock::now();
      sink = sink + q.q1(0, 0);
      samples[k].push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());
    }
  }

  std::vector<BenchResult> out;
  for (std::size_t k = 0; k < methods.size(); ++k) {
    std::vector<double>& s = samples[k];
    std::sort(s.begin(), s.end());
    auto quantile = [&](double q) {
      const double pos = q * static_cast<double>(s.size() - 1);
      const auto lo = static_cast<std::size_t>(std::floor(pos));
      const std::size_t hi = std::min(lo + 1, s.size() - 1);
      return s[lo] + (pos - static_cast<double>(lo)) * (s[hi] - s[lo]);
    };
    BenchResult r;
    r.method = methods[k].method;
    r.nt = channels.front().nt();
    double total = 0.0;
    for (double v : s) total += v;
    r.mean_ms = total / static_cast<double>(s.size());
    r.p50_ms = quantile(0.5);
    r.p95_ms = quantile(0.95);
    r.reps = s.size();
    out.push_back(r);
  }
  return out;
}

std::string region_csv(const std::vector<RegionCurve>& curves) {
  if (curves.empty()) throw std::invalid_argument("export_region_csv: no curves");
  std::ostringstream out;
  for (const RegionCurve& c : curves) {
    out << "# method=" << method_name(c.method) << " n_t=" << c.dims.nt << " n1=" << c.dims.n1
        << " n2=" << c.dims.n2 << " P=" << c.power << " n_channels=" << c.n_channels
        << " seed=" << c.seed << '\n';
  }
  out << "method,alpha,R1,R2\n";
  char buf[96];
  for (const RegionCurve& c : curves) {
    for (const RegionPoint& p : c.points) {
      std::snprintf(buf, sizeof buf, "%.12g,%.17g,%.17g", p.alpha, p.r1, p.r2);
      out << method_name(c.method) << ',' << buf << '\n';
    }
  }
  return out.str();
}

void export_region_csv(const std::vector<RegionCurve>& curves, const std::filesystem::path& path) {
  const std::string text = region_csv(curves);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open region CSV for writing: " + path.string());
  out << text;
  if (!out) throw std::runtime_error("failed writing region CSV: " + path.string());
}

void write_bench_json(const std::vector<BenchResult>& results, const std::filesystem::path& path) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const BenchResult& r : results) {
    arr.push_back({{"method", std::string(method_name(r.method))},
                   {"n_t", r.nt},
                   {"mean_ms", r.mean_ms},
                   {"p50_ms", r.p50_ms},
                   {"p95_ms", r.p95_ms},
                   {"reps", r.reps}});
  }
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open benchmark report for writing: " + path.string());
  out << arr.dump(2) << '\n';
  if (!out) throw std::runtime_error("failed writing benchmark report: " + path.string());
}

}  // namespace secprec
