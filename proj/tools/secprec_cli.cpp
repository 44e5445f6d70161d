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

// secprec: dataset generation, training, solving, region evaluation and
// latency benchmarks for secure two-user MIMO-NOMA precoding.

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <system_error>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "secprec/channels.hpp"
#include "secprec/dataset.hpp"
#include "secprec/eval.hpp"
#include "secprec/features.hpp"
#include "secprec/hashing.hpp"
#include "secprec/kernels.hpp"
#include "secprec/mlp.hpp"
#include "secprec/noma.hpp"
#include "secprec/parallel.hpp"

namespace fs = std::filesystem;
using namespace secprec;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitNumeric = 3;
constexpr int kExitIo = 4;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  // shared
  Dims dims;
  double power = 10.0;
  std::uint64_t seed = 0;
  unsigned threads = default_threads();
  std::string out_dir = ".";
  int max_iters = 500;
  double tol = 1e-8;

  // gen-data / solve / bench
  double alpha = 0.5;
  std::size_t count = 1000;
  std::string out;
  std::string csv;

  // train
  std::string train_path;
  std::string val_path;
  std::string log_path;
  TrainConfig train;

  // solve
  std::string method = "solver";
  std::string channel_path;
  std::vector<std::string> models;

  // region / bench
  std::string alphas = "0:0.1:1";
  std::vector<std::string> methods;
  std::size_t reps = 100;
  std::size_t warmup = 5;

  SolverOptions solver() const {
    SolverOptions o;
    o.max_iters = max_iters;
    o.tol = tol;
    return o;
  }
};

// Output files are written next to their destination and renamed into place
// on commit; anything not committed is removed.
class Outputs {
 public:
  ~Outputs() {
    for (const auto& [tmp, dst] : pending_) {
      std::error_code ec;
      fs::remove(tmp, ec);
    }
  }

  fs::path stage(const fs::path& dst) {
    if (dst.has_parent_path()) {
      std::error_code ec;
      fs::create_directories(dst.parent_path(), ec);
      if (ec) throw IoError("cannot create directory " + dst.parent_path().string() + ": " + ec.message());
    }
    fs::path tmp = dst;
    tmp += ".partial";
    pending_.emplace_back(tmp, dst);
    return tmp;
  }

  void commit() {
    for (const auto& [tmp, dst] : pending_) {
      std::error_code ec;
      fs::rename(tmp, dst, ec);
      if (ec) throw IoError("cannot move output into place at " + dst.string() + ": " + ec.message());
      committed_.push_back(dst);
    }
    pending_.clear();
  }

  const std::vector<fs::path>& committed() const { return committed_; }

 private:
  std::vector<std::pair<fs::path, fs::path>> pending_;
  std::vector<fs::path> committed_;
};

fs::path default_path(const RunConfig& c, const std::string& explicit_path, const std::string& name) {
  if (!explicit_path.empty()) return explicit_path;
  return fs::path(c.out_dir) / name;
}

void reject_overwrite(const fs::path& out, const std::vector<std::string>& inputs) {
  std::error_code ec;
  for (const std::string& in : inputs) {
    if (in.empty()) continue;
    if (fs::exists(out, ec) && fs::equivalent(out, in, ec)) {
      throw UsageError("output " + out.string() + " would overwrite input " + in);
    }
  }
}

void require_file(const std::string& path, const char* what) {
  if (path.empty()) throw UsageError(std::string("missing ") + what);
  if (!fs::is_regular_file(path)) throw IoError(std::string(what) + " not found: " + path);
}

// The manifest is a config file: `secprec --config run.manifest.toml` replays
// the run. Hashes of inputs and outputs are kept as comments.
void write_manifest(const CLI::App& app, const std::string& command, const fs::path& primary,
                    const std::vector<std::string>& inputs, const std::vector<fs::path>& outputs) {
  fs::path path = primary;
  path += ".manifest.toml";
  std::ostringstream text;
  text << "# secprec run manifest\n# command: " << command << '\n';
  text << "# kernels: " << kernels::backend_name(kernels::active_backend()) << '\n';
  for (const std::string& in : inputs) {
    if (!in.empty()) text << "# input " << in << " fnv1a64=" << file_digest(in) << '\n';
  }
  for (const fs::path& out : outputs) {
    text << "# output " << out.string() << " fnv1a64=" << file_digest(out) << '\n';
  }
  text << app.config_to_str(true, false);

  Outputs staged;
  const fs::path tmp = staged.stage(path);
  {
    std::ofstream f(tmp, std::ios::trunc);
    if (!f) throw IoError("cannot write manifest " + path.string());
    f << text.str();
    if (!f) throw IoError("failed writing manifest " + path.string());
  }
  staged.commit();
}

ChannelPair load_channel(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open channel file " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw UsageError("malformed channel file " + path + ": " + e.what());
  }
  auto to_matrix = [&](const char* key) {
    if (!j.contains(key) || !j[key].is_array() || j[key].empty()) {
      throw UsageError(std::string("channel file needs a non-empty '") + key + "' matrix");
    }
    const auto& rows = j[key];
    Matrix m(rows.size(), rows[0].size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
      if (rows[r].size() != m.cols()) throw UsageError(std::string("ragged matrix '") + key + "'");
      for (std::size_t c = 0; c < m.cols(); ++c) m(r, c) = rows[r][c].get<double>();
    }
    return m;
  };
  ChannelPair ch{to_matrix("h1"), to_matrix("h2")};
  try {
    ch.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  return ch;
}

ModelSet load_models(const std::vector<std::string>& paths, const RunConfig& c) {
  ModelSet set;
  for (const std::string& p : paths) {
    require_file(p, "model file");
    PrecoderModel m = load_model(p);
    const ModelContext& ctx = m.context();
    if (!(ctx.dims == c.dims) || ctx.power != c.power) {
      throw UsageError("model " + p + " was trained for different dimensions or power");
    }
    set.add(std::move(m));
  }
  return set;
}

std::vector<Method> parse_methods(const std::vector<std::string>& names) {
  std::vector<Method> out;
  for (const std::string& n : names) {
    try {
      out.push_back(parse_method(n));
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
  }
  if (out.empty()) throw UsageError("no methods selected");
  return out;
}

nlohmann::ordered_json matrix_json(const SymMatrix& q) {
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (std::size_t r = 0; r < q.dim(); ++r) {
    nlohmann::ordered_json row = nlohmann::ordered_json::array();
    for (std::size_t c = 0; c < q.dim(); ++c) row.push_back(q(r, c));
    rows.push_back(row);
  }
  return rows;
}

void print_matrix(const char* name, const SymMatrix& q) {
  std::printf("%s =\n", name);
  for (std::size_t r = 0; r < q.dim(); ++r) {
    std::printf("  [");
    for (std::size_t c = 0; c < q.dim(); ++c) std::printf("%s% .9g", c ? ", " : "", q(r, c));
    std::printf("]\n");
  }
}

int cmd_gen_data(const CLI::App& app, const RunConfig& c) {
  const fs::path out = default_path(c, c.out, "dataset.bin");
  GenerateOptions o;
  o.count = c.count;
  o.alpha = c.alpha;
  o.power = c.power;
  o.dims = c.dims;
  o.seed = c.seed;
  o.threads = c.threads;
  o.solver = c.solver();
  const Dataset ds = generate_dataset(o);

  Outputs files;
  write_dataset(files.stage(out), ds);
  if (!c.csv.empty()) export_dataset_csv(files.stage(c.csv), ds);
  files.commit();
  write_manifest(app, "gen-data", out, {}, files.committed());
  std::printf("wrote %zu samples to %s (fnv1a64 %s)\n", ds.size(), out.string().c_str(),
              file_digest(out).c_str());
  return kExitOk;
}

int cmd_train(const CLI::App& app, const RunConfig& c) {
  require_file(c.train_path, "training set (--train)");
  require_file(c.val_path, "validation set (--val)");
  const fs::path out = default_path(c, c.out, "model.bin");
  reject_overwrite(out, {c.train_path, c.val_path});
  fs::path log_path = c.log_path;
  if (log_path.empty()) {
    log_path = out;
    log_path += ".log.csv";
  }

  const Dataset tr = read_dataset(c.train_path);
  const Dataset va = read_dataset(c.val_path);
  TrainConfig cfg = c.train;
  cfg.seed = c.seed;
  try {
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }

  const TrainResult r = train(cfg, tr, va, [](const PrecoderModel&, const ValidationRecord& rec) {
    std::fprintf(stderr, "iter %zu epoch %d val_mse %.6g (best)\n", rec.iteration, rec.epoch, rec.val_mse);
  });

  Outputs files;
  save_model(files.stage(out), r.model);
  {
    std::ofstream log(files.stage(log_path), std::ios::trunc);
    log << "iteration,epoch,learning_rate,train_mse,val_mse,improved\n";
    char buf[160];
    for (const ValidationRecord& rec : r.log.records) {
      std::snprintf(buf, sizeof buf, "%zu,%d,%.9g,%.12g,%.12g,%d\n", rec.iteration, rec.epoch,
                    rec.learning_rate, rec.train_mse, rec.val_mse, rec.improved ? 1 : 0);
      log << buf;
    }
    if (!log) throw IoError("failed writing training log " + log_path.string());
  }
  files.commit();
  write_manifest(app, "train", out, {c.train_path, c.val_path}, files.committed());
  std::printf("trained %zu iterations over %d epochs%s; best val_mse %.6g at iteration %zu -> %s\n",
              r.log.iterations, r.log.epochs_run, r.log.early_stopped ? " (early stop)" : "",
              r.log.best_val_mse, r.log.best_iteration, out.string().c_str());
  return kExitOk;
}

int cmd_solve(const CLI::App& app, const RunConfig& c) {
  const ChannelPair ch = c.channel_path.empty() ? sample_channel_pair(c.dims, c.seed) : load_channel(c.channel_path);
  const Method method = parse_methods({c.method}).front();
  ModelSet models;
  if (method == Method::dnn) {
    if (c.models.empty()) throw UsageError("--method dnn needs --model");
    RunConfig mc = c;
    mc.dims = Dims{ch.nt(), ch.n1(), ch.n2()};
    models = load_models(c.models, mc);
  }
  const CovarianceRequest req{method, c.power, c.solver(), &models};
  const CovariancePair q = produce_covariances(req, ch, c.alpha);
  const RatePair r = secrecy_rates(q, ch);

  print_matrix("Q1", q.q1);
  print_matrix("Q2", q.q2);
  std::printf("R1 = %.9g\nR2 = %.9g\n", r.r1, r.r2);

  const fs::path out = default_path(c, c.out, "solve.json");
  nlohmann::ordered_json j;
  j["method"] = std::string(method_name(method));
  j["alpha"] = c.alpha;
  j["P"] = c.power;
  j["Q1"] = matrix_json(q.q1);
  j["Q2"] = matrix_json(q.q2);
  j["R1"] = r.r1;
  j["R2"] = r.r2;
  Outputs files;
  {
    std::ofstream f(files.stage(out), std::ios::trunc);
    f << j.dump(2) << '\n';
    if (!f) throw IoError("failed writing " + out.string());
  }
  files.commit();
  std::vector<std::string> inputs{c.channel_path};
  inputs.insert(inputs.end(), c.models.begin(), c.models.end());
  write_manifest(app, "solve", out, inputs, files.committed());
  return kExitOk;
}

int cmd_region(const CLI::App& app, const RunConfig& c) {
  std::vector<double> alphas;
  try {
    alphas = parse_alpha_grid(c.alphas);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  const auto methods = parse_methods(c.methods.empty() ? std::vector<std::string>{"solver", "gsvd"} : c.methods);
  const ModelSet models = load_models(c.models, c);
  const auto channels = sample_channel_set(c.dims, c.count, c.seed);
  const fs::path out = default_path(c, c.out, "region.csv");
  reject_overwrite(out, c.models);

  std::vector<RegionCurve> curves;
  for (Method m : methods) {
    const CovarianceRequest req{m, c.power, c.solver(), &models};
    curves.push_back(region_curve(req, channels, alphas, c.seed, c.threads));
  }
  Outputs files;
  export_region_csv(curves, files.stage(out));
  files.commit();
  write_manifest(app, "region", out, c.models, files.committed());

  const auto ref = std::find_if(curves.begin(), curves.end(), [](const RegionCurve& rc) { return rc.method == Method::solver; });
  for (const RegionCurve& rc : curves) {
    if (ref != curves.end() && &rc != &*ref) {
      std::printf("%s: %.3f%% of solver sum rate\n", std::string(method_name(rc.method)).c_str(),
                  capacity_fraction(rc, *ref));
    }
  }
  std::printf("wrote %zu curves x %zu alphas to %s\n", curves.size(), alphas.size(), out.string().c_str());
  return kExitOk;
}

int cmd_bench(const CLI::App& app, const RunConfig& c) {
  const auto methods = parse_methods(c.methods.empty() ? std::vector<std::string>{"solver", "gsvd"} : c.methods);
  const ModelSet models = load_models(c.models, c);
  const auto channels = sample_channel_set(c.dims, c.count, c.seed);
  std::vector<CovarianceRequest> reqs;
  for (Method m : methods) reqs.push_back({m, c.power, c.solver(), &models});
  BenchOptions o;
  o.repetitions = c.reps;
  o.warmup = c.warmup;
  o.alpha = c.alpha;
  const auto results = bench_methods(reqs, channels, o);

  const fs::path out = default_path(c, c.out, "bench.json");
  Outputs files;
  write_bench_json(results, files.stage(out));
  files.commit();
  write_manifest(app, "bench", out, c.models, files.committed());
  for (const BenchResult& r : results) {
    std::printf("%-6s n_t=%zu mean %.4f ms  p50 %.4f ms  p95 %.4f ms  (%zu reps)\n",
                std::string(method_name(r.method)).c_str(), r.nt, r.mean_ms, r.p50_ms, r.p95_ms, r.reps);
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  RunConfig c;
  CLI::App app{"Secure MIMO-NOMA covariance design: labeling, training, evaluation"};
  app.set_config("--config", "", "TOML-style key = value file; command-line flags take precedence");
  app.require_subcommand(1);
  app.fallthrough();

  const auto positive = CLI::PositiveNumber;
  app.add_option("--nt", c.dims.nt, "transmit antennas")->check(CLI::Range(1, 16))->capture_default_str();
  app.add_option("--n1", c.dims.n1, "antennas at user 1")->check(CLI::Range(1, 16))->capture_default_str();
  app.add_option("--n2", c.dims.n2, "antennas at user 2")->check(CLI::Range(1, 16))->capture_default_str();
  app.add_option("--power", c.power, "total transmit power P")->check(CLI::NonNegativeNumber)->capture_default_str();
  app.add_option("--seed", c.seed, "base seed")->capture_default_str();
  app.add_option("--threads", c.threads, "worker threads (results do not depend on this)")
      ->check(CLI::Range(1u, 1024u))
      ->capture_default_str();
  app.add_option("--out-dir", c.out_dir, "directory for outputs without an explicit path")
      ->envname("SECPREC_OUT_DIR")
      ->capture_default_str();
  app.add_option("--max-iters", c.max_iters, "solver iteration cap")->check(positive)->capture_default_str();
  app.add_option("--tol", c.tol, "solver stopping gain in bits")->check(positive)->capture_default_str();

  auto* gen = app.add_subcommand("gen-data", "label random channels with the two-stage solver");
  gen->add_option("--alpha", c.alpha, "power split")->check(CLI::Range(0.0, 1.0))->capture_default_str();
  gen->add_option("--count", c.count, "samples")->check(positive)->capture_default_str();
  gen->add_option("--out", c.out, "dataset file (default <out-dir>/dataset.bin)");
  gen->add_option("--csv", c.csv, "also export the dataset as CSV");

  auto* tr = app.add_subcommand("train", "train one network on a labeled dataset");
  tr->add_option("--train", c.train_path, "training dataset")->required();
  tr->add_option("--val", c.val_path, "validation dataset")->required();
  tr->add_option("--out", c.out, "model file (default <out-dir>/model.bin)");
  tr->add_option("--log", c.log_path, "validation log CSV (default <model>.log.csv)");
  tr->add_option("--epochs", c.train.max_epochs)->check(positive)->capture_default_str();
  tr->add_option("--lr", c.train.learning_rate)->check(positive)->capture_default_str();
  tr->add_option("--drop-factor", c.train.drop_factor)->check(positive)->capture_default_str();
  tr->add_option("--drop-period", c.train.drop_period, "epochs between learning-rate drops")
      ->check(positive)
      ->capture_default_str();
  tr->add_option("--batch", c.train.batch_size)->check(positive)->capture_default_str();
  tr->add_option("--val-freq", c.train.validation_frequency, "iterations between validations")
      ->check(positive)
      ->capture_default_str();
  tr->add_option("--patience", c.train.validation_patience)->check(positive)->capture_default_str();
  tr->add_option("--widths", c.train.widths, "layer widths including input and output (default: standard net)")
      ->delimiter(',');

  auto* sv = app.add_subcommand("solve", "covariances and secrecy rates for one channel");
  sv->add_option("--alpha", c.alpha)->check(CLI::Range(0.0, 1.0))->capture_default_str();
  sv->add_option("--method", c.method, "solver, dnn or gsvd")->capture_default_str();
  sv->add_option("--model", c.models, "model file for --method dnn");
  sv->add_option("--channel", c.channel_path, "JSON file with h1 and h2 row arrays (default: sample from --seed)");
  sv->add_option("--out", c.out, "result JSON (default <out-dir>/solve.json)");

  auto* rg = app.add_subcommand("region", "averaged rate regions over random channels");
  rg->add_option("--alphas", c.alphas, "start:step:end or a single value")->capture_default_str();
  rg->add_option("--methods", c.methods, "comma separated subset of solver,dnn,gsvd (default solver,gsvd)")
      ->delimiter(',');
  rg->add_option("--model", c.models, "trained model files, one per alpha")->delimiter(',');
  rg->add_option("--count", c.count, "channels")->check(positive)->capture_default_str();
  rg->add_option("--out", c.out, "CSV file (default <out-dir>/region.csv)");

  auto* bn = app.add_subcommand("bench", "paired latency benchmark");
  bn->add_option("--methods", c.methods, "comma separated subset of solver,dnn,gsvd (default solver,gsvd)")
      ->delimiter(',');
  bn->add_option("--model", c.models, "model file for dnn")->delimiter(',');
  bn->add_option("--alpha", c.alpha)->check(CLI::Range(0.0, 1.0))->capture_default_str();
  bn->add_option("--reps", c.reps)->check(CLI::Range(30, 100000000))->capture_default_str();
  bn->add_option("--warmup", c.warmup)->capture_default_str();
  bn->add_option("--count", c.count, "distinct channels cycled through")->check(positive)->capture_default_str();
  bn->add_option("--out", c.out, "JSON report (default <out-dir>/bench.json)");

  for (CLI::App* sub : {gen, tr, sv, rg, bn}) sub->configurable();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  CLI::App* active = app.get_subcommands().front();
  // Manifests record only the subcommand that ran.
  for (CLI::App* sub : {gen, tr, sv, rg, bn}) {
    if (sub != active) app.remove_subcommand(sub);
  }

  try {
    if (active == gen) return cmd_gen_data(app, c);
    if (active == tr) return cmd_train(app, c);
    if (active == sv) return cmd_solve(app, c);
    if (active == rg) return cmd_region(app, c);
    if (active == bn) return cmd_bench(app, c);
  } catch (const UsageError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitUsage;
  } catch (const IoError& e) {
    std::fprintf(stderr, "I/O error: %s\n", e.what());
    return kExitIo;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitUsage;
  } catch (const std::domain_error& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return kExitNumeric;
  } catch (const std::range_error& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return kExitNumeric;
  } catch (const fs::filesystem_error& e) {
    std::fprintf(stderr, "I/O error: %s\n", e.what());
    return kExitIo;
  } catch (const std::exception& e) {
    // Library I/O failures surface as runtime_error.
    std::fprintf(stderr, "I/O error: %s\n", e.what());
    return kExitIo;
  }
  return kExitUsage;
}
