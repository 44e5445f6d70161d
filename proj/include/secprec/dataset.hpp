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

// Labeled training data and its on-disk format.
//
// File layout: one line of JSON header text terminated by '\n', followed by
// `count` fixed-width records of little-endian float64:
//   [features (6 nt^2) | labels (nt(nt+1)) | R1 | R2]

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "secprec/channels.hpp"
#include "secprec/wiretap.hpp"

namespace secprec {

inline constexpr int kDatasetVersion = 1;

struct DatasetHeader {
  int version = kDatasetVersion;
  Dims dims;
  double alpha = 0.0;
  double power = 0.0;
  std::uint64_t seed = 0;
  std::size_t count = 0;

  std::size_t feature_dim() const;
  std::size_t label_dim() const;
  std::size_t record_width() const { return feature_dim() + label_dim() + 2; }
};

class Dataset {
 public:
  Dataset() = default;
  explicit Dataset(DatasetHeader header);

  const DatasetHeader& header() const { return header_; }
  std::size_t size() const { return header_.count; }

  std::span<const double> features(std::size_t i) const;
  std::span<const double> labels(std::size_t i) const;
  std::span<double> features(std::size_t i);
  std::span<double> labels(std::size_t i);
  double r1(std::size_t i) const { return rates_[2 * i]; }
  double r2(std::size_t i) const { return rates_[2 * i + 1]; }
  void set_rates(std::size_t i, double r1, double r2);

  // Row-major count x feature_dim / count x label_dim blocks.
  std::span<const double> feature_block() const { return features_; }
  std::span<const double> label_block() const { return labels_; }

 private:
  DatasetHeader header_;
  std::vector<double> features_;
  std::vector<double> labels_;
  std::vector<double> rates_;
};

struct GenerateOptions {
  std::size_t count = 1000;
  double alpha = 0.5;
  double power = 10.0;
  Dims dims;
  std::uint64_t seed = 0;
  unsigned threads = 1;
  SolverOptions solver{};
};

// Sample i uses channel seed derive_seed(seed, i); output is independent of `threads`.
Dataset generate_dataset(const GenerateOptions& opts);

void write_dataset(const std::filesystem::path& path, const Dataset& ds);
Dataset read_dataset(const std::filesystem::path& path);
void export_dataset_csv(const std::filesystem::path& path, const Dataset& ds);

// Little-endian float64 helpers shared with the model format.
void append_f64_le(std::string& out, double v);
double read_f64_le(const unsigned char* p);

}  // namespace secprec
