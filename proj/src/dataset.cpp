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

#include "secprec/dataset.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "secprec/features.hpp"
#include "secprec/noma.hpp"
#include "secprec/parallel.hpp"
#include "secprec/random.hpp"

namespace secprec {

std::size_t DatasetHeader::feature_dim() const { return feature_length(dims.nt); }
std::size_t DatasetHeader::label_dim() const { return label_length(dims.nt); }

Dataset::Dataset(DatasetHeader header)
    : header_(header),
      features_(header.count * header.feature_dim()),
      labels_(header.count * header.label_dim()),
      rates_(2 * header.count) {}

std::span<const double> Dataset::features(std::size_t i) const {
  const std::size_t w = header_.feature_dim();
  return std::span<const double>(features_).subspan(i * w, w);
}
std::span<const double> Dataset::labels(std::size_t i) const {
  const std::size_t w = header_.label_dim();
  return std::span<const double>(labels_).subspan(i * w, w);
}
std::span<double> Dataset::features(std::size_t i) {
  const std::size_t w = header_.feature_dim();
  return std::span<double>(features_).subspan(i * w, w);
}
std::span<double> Dataset::labels(std::size_t i) {
  const std::size_t w = header_.label_dim();
  return std::span<double>(labels_).subspan(i * w, w);
}
void Dataset::set_rates(std::size_t i, double r1, double r2) {
  rates_[2 * i] = r1;
  rates_[2 * i + 1] = r2;
}

Dataset generate_dataset(const GenerateOptions& opts) {
  if (opts.count == 0) throw std::invalid_argument("generate_dataset: count must be >= 1");
  DatasetHeader h;
  h.dims = opts.dims;
  h.alpha = opts.alpha;
  h.power = opts.power;
  h.seed = opts.seed;
  h.count = opts.count;
  Dataset ds(h);
  const SplitConfig cfg{opts.alpha, opts.power, opts.solver};
  cfg.validate();

  parallel_for(opts.count, opts.threads, [&](std::size_t i) {
    const ChannelPair ch = sample_channel_pair(opts.dims, derive_seed(opts.seed, i));
    const SplitResult r = split_solve(ch, cfg);
    build_input(ch, ds.features(i));
    const std::vector<double> lab = pack_labels(r.q);
    std::copy(lab.begin(), lab.end(), ds.labels(i).begin());
    ds.set_rates(i, r.rates.r1, r.rates.r2);
  });
  return ds;
}

void append_f64_le(std::string& out, double v) {
  std::uint64_t bits = std::bit_cast<std::uint64_t>(v);
  for (int b = 0; b < 8; ++b) {
    out.push_back(static_cast<char>(bits & 0xffu));
    bits >>= 8;
  }
}

double read_f64_le(const unsigned char* p) {
  std::uint64_t bits = 0;
  for (int b = 7; b >= 0; --b) bits = (bits << 8) | p[b];
  return std::bit_cast<double>(bits);
}

namespace {

nlohmann::ordered_json header_json(const DatasetHeader& h) {
  nlohmann::ordered_json j;
  j["format"] = "secprec-dataset";
  j["version"] = h.version;
  j["n_t"] = h.dims.nt;
  j["n1"] = h.dims.n1;
  j["n2"] = h.dims.n2;
  j["alpha"] = h.alpha;
  j["P"] = h.power;
  j["seed"] = h.seed;
  j["count"] = h.count;
  j["record"] = {{"features", h.feature_dim()}, {"labels", h.label_dim()}, {"rates", 2}};
  return j;
}

}  // namespace

void write_dataset(const std::filesystem::path& path, const Dataset& ds) {
  const DatasetHeader& h = ds.header();
  std::string buf = header_json(h).dump();
  buf.push_back('\n');
  buf.reserve(buf.size() + h.count * h.record_width() * 8);
  for (std::size_t i = 0; i < h.count; ++i) {
    for (double v : ds.features(i)) append_f64_le(buf, v);
    for (double v : ds.labels(i)) append_f64_le(buf, v);
    append_f64_le(buf, ds.r1(i));
    append_f64_le(buf, ds.r2(i));
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open dataset for writing: " + path.string());
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!out) throw std::runtime_error("failed writing dataset: " + path.string());
}

Dataset read_dataset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open dataset: " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("dataset has no header: " + path.string());

  DatasetHeader h;
  try {
    const auto j = nlohmann::json::parse(line);
    if (j.at("format").get<std::string>() != "secprec-dataset") {
      throw std::runtime_error("not a secprec dataset");
    }
    h.version = j.at("version").get<int>();
    h.dims.nt = j.at("n_t").get<std::size_t>();
    h.dims.n1 = j.at("n1").get<std::size_t>();
    h.dims.n2 = j.at("n2").get<std::size_t>();
    h.alpha = j.at("alpha").get<double>();
    h.power = j.at("P").get<double>();
    h.seed = j.at("seed").get<std::uint64_t>();
    h.count = j.at("count").get<std::size_t>();
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error("malformed dataset header in " + path.string() + ": " + e.what());
  }
  if (h.version != kDatasetVersion) {
    throw std::runtime_error("unsupported dataset version " + std::to_string(h.version) + " in " +
                             path.string());
  }
  if (h.dims.nt == 0 || h.dims.nt > kMaxSymDim) throw std::runtime_error("dataset header has invalid n_t");

  const std::size_t bytes = h.count * h.record_width() * 8;
  std::vector<unsigned char> body(bytes);
  in.read(reinterpret_cast<char*>(body.data()), static_cast<std::streamsize>(bytes));
  if (static_cast<std::size_t>(in.gcount()) != bytes) {
    throw std::runtime_error("dataset truncated: expected " + std::to_string(h.count) +
                             " records in " + path.string());
  }
  if (in.peek() != std::char_traits<char>::eof()) {
    throw std::runtime_error("dataset has trailing bytes: " + path.string());
  }

  Dataset ds(h);
  const unsigned char* p = body.data();
  for (std::size_t i = 0; i < h.count; ++i) {
    for (double& v : ds.features(i)) { v = read_f64_le(p); p += 8; }
    for (double& v : ds.labels(i)) { v = read_f64_le(p); p += 8; }
    const double r1 = read_f64_le(p);
    const double r2 = read_f64_le(p + 8);
    p += 16;
    ds.set_rates(i, r1, r2);
  }
  return ds;
}

void export_dataset_csv(const std::filesystem::path& path, const Dataset& ds) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open CSV for writing: " + path.string());
  const DatasetHeader& h = ds.header();
  for (std::size_t k = 0; k < h.feature_dim(); ++k) out << "v" << k << ',';
  for (std::size_t k = 0; k < h.label_dim(); ++k) out << "q" << k << ',';
  out << "R1,R2\n";
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (std::size_t i = 0; i < h.count; ++i) {
    for (double v : ds.features(i)) out << v << ',';
    for (double v : ds.labels(i)) out << v << ',';
    out << ds.r1(i) << ',' << ds.r2(i) << '\n';
  }
  if (!out) throw std::runtime_error("failed writing CSV: " + path.string());
}

}  // namespace secprec
