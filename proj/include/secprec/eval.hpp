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

// Rate-region sweeps, capacity fractions, label error and latency benchmarks.
// Every rate reported here is recomputed from the method's covariances on the
// original channels; methods never self-report.

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "secprec/channels.hpp"
#include "secprec/mlp.hpp"
#include "secprec/wiretap.hpp"

namespace secprec {

enum class Method { solver, dnn, gsvd };

std::string_view method_name(Method m);
Method parse_method(std::string_view name);

// One trained network per power-splitting factor.
class ModelSet {
 public:
  void add(PrecoderModel model);
  // Nearest model within 1e-9 of alpha, or null.
  const PrecoderModel* find(double alpha) const;
  bool empty() const { return models_.empty(); }
  std::size_t size() const { return models_.size(); }

 private:
  std::map<double, PrecoderModel> models_;
};

struct CovarianceRequest {
  Method method = Method::solver;
  double power = 10.0;
  SolverOptions solver{};
  const ModelSet* models = nullptr;
};

// Produces (Q1, Q2) for one channel and alpha with the requested method.
CovariancePair produce_covariances(const CovarianceRequest& req, const ChannelPair& ch, double alpha);

struct RegionPoint {
  double alpha = 0.0;
  double r1 = 0.0;  // mean over channels
  double r2 = 0.0;
};

struct RegionCurve {
  Method method = Method::solver;
  std::vector<RegionPoint> points;
  Dims dims;
  double power = 0.0;
  std::size_t n_channels = 0;
  std::uint64_t seed = 0;
};

RegionCurve region_curve(const CovarianceRequest& req, const std::vector<ChannelPair>& channels,
                         const std::vector<double>& alphas, std::uint64_t seed = 0,
                         unsigned threads = 1);

// Mean over alpha of (R1t + R2t) / (R1r + R2r) in percent, skipping points
// whose reference sum is below 1e-9.
double capacity_fraction(const RegionCurve& test, const RegionCurve& reference);

// MSE between predicted and stored labels; rejects context mismatch.
double label_mse(const PrecoderModel& model, const Dataset& test);

struct BenchResult {
  Method method = Method::solver;
  std::size_t nt = 0;
  double mean_ms = 0.0;
  double p50_ms = 0.0;
  double p95_ms = 0.0;
  std::size_t reps = 0;
};

struct BenchOptions {
  std::size_t repetitions = 100;
  std::size_t warmup = 5;
  double alpha = 0.5;
};

// Round-robin over methods on the same channel each repetition, so samples are paired.
std::vector<BenchResult> bench_methods(const std::vector<CovarianceRequest>& methods,
                                       const std::vector<ChannelPair>& channels,
                                       const BenchOptions& opts);

void export_region_csv(const std::vector<RegionCurve>& curves, const std::filesystem::path& path);
std::string region_csv(const std::vector<RegionCurve>& curves);
void write_bench_json(const std::vector<BenchResult>& results, const std::filesystem::path& path);

}  // namespace secprec
