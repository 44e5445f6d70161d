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

#include <doctest.h>

#include <stdexcept>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "secprec/channels.hpp"
#include "secprec/eval.hpp"
#include "secprec/features.hpp"
#include "secprec/hashing.hpp"
#include "secprec/noma.hpp"

using namespace secprec;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "secprec_test_eval";
  fs::create_directories(dir);
  return dir / name;
}

RegionCurve fake_curve(Method m, std::vector<double> sums) {
  RegionCurve c;
  c.method = m;
  c.power = 10.0;
  c.n_channels = 5;
  for (std::size_t i = 0; i < sums.size(); ++i) {
    c.points.push_back({0.1 * static_cast<double>(i), 0.25 * sums[i], 0.75 * sums[i]});
  }
  return c;
}

}  // namespace

TEST_CASE("method names") {
  for (Method m : {Method::solver, Method::dnn, Method::gsvd}) CHECK(parse_method(method_name(m)) == m);
  CHECK_THROWS(parse_method("rotation"));
}

TEST_CASE("capacity fraction") {
  const RegionCurve ref = fake_curve(Method::solver, {0.0, 1.0, 2.0, 3.0});
  CHECK(capacity_fraction(ref, ref) == 100.0);
  CHECK(capacity_fraction(fake_curve(Method::dnn, {0.0, 0.0, 0.0, 0.0}), ref) == 0.0);
  CHECK(capacity_fraction(fake_curve(Method::dnn, {5.0, 0.5, 1.0, 1.5}), ref) == doctest::Approx(50.0));
  CHECK_THROWS(capacity_fraction(fake_curve(Method::dnn, {1.0}), ref));
  RegionCurve other = ref;
  other.seed = 9;
  CHECK_THROWS(capacity_fraction(other, ref));
  CHECK_THROWS(capacity_fraction(fake_curve(Method::dnn, {0.0}), fake_curve(Method::solver, {0.0})));
}

TEST_CASE("label mse of a zero model") {
  GenerateOptions o;
  o.count = 50;
  o.seed = 2;
  const Dataset ds = generate_dataset(o);
  const PrecoderModel zero({24, 8, 6}, ModelContext{o.dims, o.alpha, o.power, kFeatureVersion});
  double expect = 0.0;
  for (double v : ds.label_block()) expect += v * v;
  expect /= static_cast<double>(ds.label_block().size());
  CHECK(label_mse(zero, ds) == doctest::Approx(expect).epsilon(1e-14));

  const PrecoderModel wrong({24, 8, 6}, ModelContext{o.dims, 0.7, o.power, kFeatureVersion});
  CHECK_THROWS(label_mse(wrong, ds));
}

TEST_CASE("region curves and CSV export") {
  const auto channels = sample_channel_set(Dims{}, 20, 5);
  const auto alphas = parse_alpha_grid("0:0.1:1");
  std::vector<RegionCurve> curves;
  for (Method m : {Method::solver, Method::gsvd}) {
    curves.push_back(region_curve(CovarianceRequest{m, 10.0, {}, nullptr}, channels, alphas, 5, 2));
  }
  CHECK(curves[0].points.front().r1 == 0.0);
  CHECK(curves[0].points.back().r2 == 0.0);

  // A model set holding one model per alpha stands in for the trained DNNs.
  ModelSet models;
  for (double a : alphas) {
    models.add(PrecoderModel::initialized({24, 16, 6}, ModelContext{Dims{}, a, 10.0, kFeatureVersion}, 1));
  }
  CHECK(models.size() == 11);
  CHECK(models.find(0.3000000000001) != nullptr);
  CHECK(models.find(0.35) == nullptr);
  curves.push_back(region_curve(CovarianceRequest{Method::dnn, 10.0, {}, &models}, channels, alphas, 5, 1));

  // Thread count does not change results.
  const RegionCurve single = region_curve(CovarianceRequest{Method::solver, 10.0, {}, nullptr}, channels, alphas, 5, 1);
  for (std::size_t i = 0; i < alphas.size(); ++i) CHECK(single.points[i].r2 == curves[0].points[i].r2);

  export_region_csv(curves, scratch("r1.csv"));
  export_region_csv(curves, scratch("r2.csv"));
  CHECK(file_digest(scratch("r1.csv")) == file_digest(scratch("r2.csv")));

  std::ifstream in(scratch("r1.csv"));
  std::string line;
  std::size_t rows = 0;
  bool header = false;
  while (std::getline(in, line)) {
    if (line.starts_with("#")) continue;
    if (!header) {
      CHECK(line == "method,alpha,R1,R2");
      header = true;
      continue;
    }
    std::stringstream ss(line);
    std::string method, a, r1, r2;
    std::getline(ss, method, ',');
    std::getline(ss, a, ',');
    std::getline(ss, r1, ',');
    std::getline(ss, r2, ',');
    const RegionCurve& c = curves[rows / 11];
    const RegionPoint& p = c.points[rows % 11];
    CHECK(method == method_name(c.method));
    CHECK(std::abs(std::stod(a) - p.alpha) <= 1e-12);
    CHECK(std::abs(std::stod(r1) - p.r1) <= 1e-12 * std::max(1.0, std::abs(p.r1)));
    CHECK(std::abs(std::stod(r2) - p.r2) <= 1e-12 * std::max(1.0, std::abs(p.r2)));
    ++rows;
  }
  CHECK(rows == 33);

  ModelSet partial;
  partial.add(PrecoderModel::initialized({24, 16, 6}, ModelContext{Dims{}, 0.5, 10.0, kFeatureVersion}, 1));
  CHECK_THROWS(region_curve(CovarianceRequest{Method::dnn, 10.0, {}, &partial}, channels, alphas));
  CHECK_THROWS(export_region_csv({}, scratch("empty.csv")));
}

TEST_CASE("benchmark harness") {
  const auto channels = sample_channel_set(Dims{}, 10, 6);
  std::vector<CovarianceRequest> methods{{Method::solver, 10.0, {}, nullptr}, {Method::gsvd, 10.0, {}, nullptr}};
  BenchOptions o;
  o.repetitions = 30;
  const auto res = bench_methods(methods, channels, o);
  REQUIRE(res.size() == 2);
  for (const BenchResult& r : res) {
    CHECK(r.reps == 30);
    CHECK(r.nt == 2);
    CHECK(r.mean_ms > 0.0);
    CHECK(r.p50_ms <= r.p95_ms);
  }
  write_bench_json(res, scratch("bench.json"));
  CHECK(fs::file_size(scratch("bench.json")) > 0);
  o.repetitions = 10;
  CHECK_THROWS(bench_methods(methods, channels, o));
}
