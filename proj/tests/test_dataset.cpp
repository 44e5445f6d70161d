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
#include <filesystem>
#include <fstream>

#include "secprec/dataset.hpp"
#include "secprec/features.hpp"
#include "secprec/hashing.hpp"
#include "secprec/random.hpp"

using namespace secprec;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "secprec_test_dataset";
  fs::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST_CASE("generation is deterministic and byte-identical on disk") {
  GenerateOptions opts;
  opts.count = 1000;
  opts.seed = 7;
  opts.threads = 2;
  const Dataset a = generate_dataset(opts);
  opts.threads = 1;
  const Dataset b = generate_dataset(opts);
  write_dataset(scratch("a.bin"), a);
  write_dataset(scratch("b.bin"), b);
  CHECK(file_digest(scratch("a.bin")) == file_digest(scratch("b.bin")));

  opts.seed = 8;
  write_dataset(scratch("c.bin"), generate_dataset(opts));
  CHECK(file_digest(scratch("a.bin")) != file_digest(scratch("c.bin")));
}

TEST_CASE("stored labels are feasible and reproduce the stored rates") {
  GenerateOptions opts;
  opts.count = 1000;
  opts.seed = 3;
  opts.threads = 2;
  const Dataset ds = generate_dataset(opts);
  double stored = 0.0, recomputed = 0.0;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const auto lab = ds.labels(i);
    const CovariancePair q = unpack_labels(lab, 2, 10.0);
    CHECK(q.feasible());
    const ChannelPair ch = sample_channel_pair(opts.dims, derive_seed(opts.seed, i));
    const auto f = build_input(ch);
    CHECK(std::equal(f.begin(), f.end(), ds.features(i).begin()));
    const RatePair r = secrecy_rates(q, ch);
    stored += ds.r1(i) + ds.r2(i);
    recomputed += r.r1 + r.r2;
  }
  stored /= static_cast<double>(ds.size());
  recomputed /= static_cast<double>(ds.size());
  CHECK(std::abs(stored - recomputed) <= 1e-6);
  CHECK(stored > 0.0);
}

TEST_CASE("read back and corruption handling") {
  GenerateOptions opts;
  opts.count = 20;
  opts.dims = Dims{3, 2, 1};
  opts.alpha = 0.3;
  opts.seed = 11;
  const Dataset ds = generate_dataset(opts);
  const fs::path p = scratch("rt.bin");
  write_dataset(p, ds);
  const Dataset back = read_dataset(p);
  CHECK(back.header().dims == opts.dims);
  CHECK(back.header().alpha == 0.3);
  CHECK(back.size() == 20);
  for (std::size_t i = 0; i < ds.size(); ++i) {
    CHECK(std::equal(ds.labels(i).begin(), ds.labels(i).end(), back.labels(i).begin()));
    CHECK(ds.r2(i) == back.r2(i));
  }

  const auto size = fs::file_size(p);
  fs::copy_file(p, scratch("trunc.bin"), fs::copy_options::overwrite_existing);
  fs::resize_file(scratch("trunc.bin"), size - 8);
  CHECK_THROWS(read_dataset(scratch("trunc.bin")));

  fs::copy_file(p, scratch("tail.bin"), fs::copy_options::overwrite_existing);
  {
    std::ofstream out(scratch("tail.bin"), std::ios::binary | std::ios::app);
    out << "x";
  }
  CHECK_THROWS(read_dataset(scratch("tail.bin")));
  CHECK_THROWS(read_dataset(scratch("missing.bin")));

  export_dataset_csv(scratch("rt.csv"), ds);
  std::ifstream csv(scratch("rt.csv"));
  std::string line;
  std::size_t lines = 0;
  while (std::getline(csv, line)) ++lines;
  CHECK(lines >= 21);
}

TEST_CASE("hashing") {
  CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
  CHECK(hex64(fnv1a64("a")) == "af63dc4c8601ec8c");
}
