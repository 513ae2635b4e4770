// Copyright 2026 The semdedup Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// semdedup command line driver. Talks to the engine exclusively through the
// C interface in semdedup/semdedup.h.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "semdedup/semdedup.h"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Process exit codes.
constexpr int kExitOk = 0;
constexpr int kExitInternal = 1;
constexpr int kExitValidation = 2;
constexpr int kExitFormat = 3;
constexpr int kExitData = 4;
constexpr int kExitNotConverged = 5;

class CliFailure : public std::runtime_error {
 public:
  CliFailure(int code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  int code() const noexcept { return code_; }

 private:
  int code_;
};

int exit_code_of(semd_status s) {
  switch (s) {
    case SEMD_OK: return kExitOk;
    case SEMD_ERR_INVALID_ARGUMENT:
    case SEMD_ERR_BRACKET:
    case SEMD_ERR_CONSTRUCTION:
    case SEMD_ERR_IO: return kExitValidation;
    case SEMD_ERR_FORMAT: return kExitFormat;
    case SEMD_ERR_DATA:
    case SEMD_ERR_DEGENERATE_ROW: return kExitData;
    case SEMD_ERR_INTERNAL: return kExitInternal;
  }
  return kExitInternal;
}

void check(semd_status s, const std::string& context) {
  if (s == SEMD_OK) return;
  throw CliFailure(exit_code_of(s), context + ": " + semd_status_name(s) +
                                        ": " + semd_last_error());
}

[[noreturn]] void invalid(const std::string& what) {
  throw CliFailure(kExitValidation, what);
}

struct MatrixDeleter {
  void operator()(semd_matrix* m) const { semd_matrix_free(m); }
};
struct ModelDeleter {
  void operator()(semd_model* m) const { semd_model_free(m); }
};
struct ResultDeleter {
  void operator()(semd_result* r) const { semd_result_free(r); }
};
using Matrix = std::unique_ptr<semd_matrix, MatrixDeleter>;
using Model = std::unique_ptr<semd_model, ModelDeleter>;
using Result = std::unique_ptr<semd_result, ResultDeleter>;

// ---------------------------------------------------------------------------
// Configuration

struct PipelineConfig {
  std::string input;
  std::string format = "binary";
  std::uint32_t k = 1024;
  std::uint32_t kmeans_iterations = 100;
  std::uint64_t seed = 0;
  std::optional<double> epsilon;
  std::optional<double> target_fraction;
  std::string strategy = "low";
  double sample_fraction = 0.1;
  std::uint32_t neighbors = 20;
  std::string output_dir = "semdedup_out";
  std::uint32_t threads = 0;
  std::uint32_t tile = 1024;
  std::uint32_t histogram_bins = 200;
  double eps_lo = 0.0005;
  double eps_hi = 0.5;
  double tol_fraction = 0.02;
  std::uint32_t max_probes = 8;
};

json to_json(const PipelineConfig& c) {
  json j = {{"input", c.input},
            {"format", c.format},
            {"k", c.k},
            {"kmeans_iterations", c.kmeans_iterations},
            {"seed", c.seed},
            {"strategy", c.strategy},
            {"sample_fraction", c.sample_fraction},
            {"neighbors", c.neighbors},
            {"output_dir", c.output_dir},
            {"threads", c.threads},
            {"tile", c.tile},
            {"histogram_bins", c.histogram_bins},
            {"eps_lo", c.eps_lo},
            {"eps_hi", c.eps_hi},
            {"tol_fraction", c.tol_fraction},
            {"max_probes", c.max_probes}};
  j["epsilon"] = c.epsilon ? json(*c.epsilon) : json(nullptr);
  j["target_fraction"] =
      c.target_fraction ? json(*c.target_fraction) : json(nullptr);
  return j;
}

PipelineConfig config_from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) invalid("cannot open config file " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw CliFailure(kExitFormat, "config " + path + ": " + e.what());
  }
  if (!j.is_object()) throw CliFailure(kExitFormat, "config must be an object");

  PipelineConfig c;
  try {
    auto get = [&](const char* key, auto& field) {
      if (j.contains(key) && !j[key].is_null()) {
        field = j[key].get<std::decay_t<decltype(field)>>();
      }
    };
    auto get_opt = [&](const char* key, std::optional<double>& field) {
      if (j.contains(key) && !j[key].is_null()) field = j[key].get<double>();
    };
    get("input", c.input);
    get("format", c.format);
    get("k", c.k);
    get("kmeans_iterations", c.kmeans_iterations);
    get("seed", c.seed);
    get_opt("epsilon", c.epsilon);
    get_opt("target_fraction", c.target_fraction);
    get("strategy", c.strategy);
    get("sample_fraction", c.sample_fraction);
    get("neighbors", c.neighbors);
    get("output_dir", c.output_dir);
    get("threads", c.threads);
    get("tile", c.tile);
    get("histogram_bins", c.histogram_bins);
    get("eps_lo", c.eps_lo);
    get("eps_hi", c.eps_hi);
    get("tol_fraction", c.tol_fraction);
    get("max_probes", c.max_probes);
  } catch (const json::exception& e) {
    throw CliFailure(kExitFormat, "config " + path + ": " + e.what());
  }
  return c;
}

// Collects flag values and replays the ones the user actually passed on top
// of the config file.
class Flags {
 public:
  explicit Flags(CLI::App* app) : app_(app) {
    app_->add_option("-c,--config", config_path_, "JSON pipeline config");
  }

  template <typename T>
  void add(const std::string& name, T PipelineConfig::*field,
           const std::string& help) {
    auto value = std::make_shared<T>();
    auto* opt = app_->add_option(name, *value, help);
    setters_.push_back([opt, value, field](PipelineConfig& c) {
      if (opt->count() > 0) c.*field = *value;
    });
  }

  void add_optional(const std::string& name,
                    std::optional<double> PipelineConfig::*field,
                    const std::string& help) {
    auto value = std::make_shared<double>();
    auto* opt = app_->add_option(name, *value, help);
    setters_.push_back([opt, value, field](PipelineConfig& c) {
      if (opt->count() > 0) c.*field = *value;
    });
  }

  PipelineConfig resolve() const {
    PipelineConfig c =
        config_path_.empty() ? PipelineConfig{} : config_from_file(config_path_);
    for (const auto& set : setters_) set(c);
    if (c.threads == 0) {
      if (const char* env = std::getenv("SEMDEDUP_THREADS")) {
        try {
          c.threads = static_cast<std::uint32_t>(std::stoul(env));
        } catch (const std::exception&) {
          invalid(std::string("SEMDEDUP_THREADS is not a number: ") + env);
        }
      }
    }
    return c;
  }

 private:
  CLI::App* app_;
  std::string config_path_;
  std::vector<std::function<void(PipelineConfig&)>> setters_;
};

void add_input_flags(Flags& f) {
  f.add("-i,--input", &PipelineConfig::input, "embedding file");
  f.add("--format", &PipelineConfig::format, "binary | text");
  f.add("-o,--out", &PipelineConfig::output_dir, "output directory");
  f.add("--threads", &PipelineConfig::threads, "worker threads (0 = auto)");
  f.add("--seed", &PipelineConfig::seed, "random seed");
}

void add_dedup_flags(Flags& f) {
  f.add_optional("-e,--epsilon", &PipelineConfig::epsilon,
                 "dissimilarity threshold in (0,1)");
  f.add_optional("--target-fraction", &PipelineConfig::target_fraction,
                 "tune epsilon to keep this fraction");
  f.add("--strategy", &PipelineConfig::strategy, "low | high | random");
  f.add("--tile", &PipelineConfig::tile, "similarity tile size");
  f.add("--sample-fraction", &PipelineConfig::sample_fraction,
        "share of clusters probed while tuning");
  f.add("--eps-lo", &PipelineConfig::eps_lo, "lower tuning bracket");
  f.add("--eps-hi", &PipelineConfig::eps_hi, "upper tuning bracket");
  f.add("--tol", &PipelineConfig::tol_fraction, "tuning tolerance on fraction");
  f.add("--max-probes", &PipelineConfig::max_probes, "tuning probe budget");
}

semd_strategy strategy_code(const std::string& s) {
  if (s == "low") return SEMD_KEEP_LOW_CENTROID_SIM;
  if (s == "high") return SEMD_KEEP_HIGH_CENTROID_SIM;
  if (s == "random") return SEMD_KEEP_RANDOM;
  invalid("unknown strategy '" + s + "' (expected low, high or random)");
}

void validate_common(const PipelineConfig& c) {
  if (c.input.empty()) invalid("no input file given (--input or config)");
  if (c.format != "binary" && c.format != "text") {
    invalid("format must be binary or text, got " + c.format);
  }
  if (c.epsilon && c.target_fraction) {
    invalid("set exactly one of epsilon and target_fraction");
  }
  if (!(c.sample_fraction > 0.0 && c.sample_fraction <= 1.0)) {
    invalid("sample_fraction must lie in (0, 1]");
  }
  strategy_code(c.strategy);
}

// ---------------------------------------------------------------------------
// I/O helpers

Matrix load_unit(const PipelineConfig& c) {
  if (!fs::exists(c.input)) invalid("input file not found: " + c.input);
  semd_matrix* raw = nullptr;
  check(semd_matrix_load(c.input.c_str(),
                         c.format == "text" ? SEMD_FORMAT_TEXT
                                            : SEMD_FORMAT_BINARY,
                         &raw),
        "loading " + c.input);
  Matrix m(raw);
  semd_matrix* unit = nullptr;
  check(semd_matrix_normalize(m.get(), &unit), "normalizing " + c.input);
  return Matrix(unit);
}

Model load_model_file(const std::string& path) {
  if (!fs::exists(path)) invalid("model file not found: " + path);
  semd_model* raw = nullptr;
  check(semd_model_load(path.c_str(), &raw), "loading model " + path);
  return Model(raw);
}

void check_model_matches(const semd_matrix* e, const semd_model* m) {
  if (semd_model_size(m) != semd_matrix_rows(e) ||
      semd_model_dim(m) != semd_matrix_dim(e)) {
    invalid("model (n=" + std::to_string(semd_model_size(m)) +
            ", d=" + std::to_string(semd_model_dim(m)) +
            ") does not match the corpus (n=" +
            std::to_string(semd_matrix_rows(e)) +
            ", d=" + std::to_string(semd_matrix_dim(e)) + ")");
  }
}

fs::path prepare_output(const PipelineConfig& c) {
  const fs::path dir(c.output_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) invalid("cannot create output directory " + dir.string());
  std::ofstream(dir / "config.json") << to_json(c).dump(2) << "\n";
  return dir;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) invalid("cannot write " + path.string());
  out << text;
}

std::vector<std::uint64_t> read_keep_list(const std::string& path) {
  std::ifstream in(path);
  if (!in) invalid("cannot open keep-list " + path);
  std::vector<std::uint64_t> ids;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      std::size_t used = 0;
      ids.push_back(std::stoull(line, &used));
      if (line.find_first_not_of(" \t\r", used) != std::string::npos) {
        throw std::invalid_argument("trailing text");
      }
    } catch (const std::exception&) {
      throw CliFailure(kExitFormat, path + ":" + std::to_string(line_no) +
                                        ": not an id");
    }
  }
  return ids;
}

std::vector<double> parse_epsilon_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.find_first_not_of(" \t") == std::string::npos) continue;
    try {
      out.push_back(std::stod(item));
    } catch (const std::exception&) {
      invalid("bad epsilon value '" + item + "'");
    }
  }
  if (out.empty()) invalid("epsilon list is empty");
  for (std::size_t i = 1; i < out.size(); ++i) {
    if (!(out[i] > out[i - 1])) invalid("epsilon list must be strictly increasing");
  }
  for (double e : out) {
    if (!(e > 0.0 && e < 1.0)) invalid("epsilon values must lie in (0, 1)");
  }
  return out;
}

// Shortest representation that reads back to the same double.
std::string fmt(double v) {
  char buf[64];
  const double a = std::abs(v);
  const bool plain = a == 0.0 || (a >= 1e-6 && a < 1e15);
  const auto res =
      plain ? std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::fixed)
            : std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string curve_csv(const std::vector<double>& eps,
                      const std::vector<double>& frac) {
  std::string out = "epsilon,kept_fraction\n";
  for (std::size_t i = 0; i < eps.size(); ++i) {
    out += fmt(eps[i]) + "," + fmt(frac[i]) + "\n";
  }
  return out;
}

semd_dedup_params dedup_params(const PipelineConfig& c, double epsilon) {
  semd_dedup_params p = semd_dedup_params_default();
  p.epsilon = epsilon;
  p.strategy = strategy_code(c.strategy);
  p.seed = c.seed;
  p.tile = c.tile;
  p.threads = c.threads;
  return p;
}

struct TuneRun {
  semd_tune_outcome outcome{};
  std::size_t sampled_clusters = 0;
  std::vector<double> probe_eps;
  std::vector<double> probe_frac;
};

TuneRun run_tuner(const PipelineConfig& c, const semd_matrix* e,
                  const semd_model* m) {
  if (!c.target_fraction) invalid("tuning needs target_fraction");
  TuneRun run;
  check(semd_sample_clusters(m, c.sample_fraction, c.seed, nullptr, 0,
                             &run.sampled_clusters),
        "sampling clusters");
  std::vector<std::uint32_t> sample(run.sampled_clusters);
  check(semd_sample_clusters(m, c.sample_fraction, c.seed, sample.data(),
                             sample.size(), &run.sampled_clusters),
        "sampling clusters");

  semd_tune_params p = semd_tune_params_default();
  p.target_fraction = *c.target_fraction;
  p.eps_lo = c.eps_lo;
  p.eps_hi = c.eps_hi;
  p.tol_fraction = c.tol_fraction;
  p.max_probes = c.max_probes;
  p.strategy = strategy_code(c.strategy);
  p.seed = c.seed;
  p.tile = c.tile;
  p.threads = c.threads;
  run.probe_eps.assign(c.max_probes, 0.0);
  run.probe_frac.assign(c.max_probes, 0.0);
  check(semd_tune(e, m, sample.data(), sample.size(), &p, &run.outcome,
                  run.probe_eps.data(), run.probe_frac.data()),
        "tuning epsilon");
  run.probe_eps.resize(run.outcome.probes_used);
  run.probe_frac.resize(run.outcome.probes_used);
  return run;
}

json tune_json(const TuneRun& run) {
  json curve = json::array();
  for (std::size_t i = 0; i < run.probe_eps.size(); ++i) {
    curve.push_back({run.probe_eps[i], run.probe_frac[i]});
  }
  return {{"epsilon", run.outcome.epsilon},
          {"achieved_fraction", run.outcome.achieved_fraction},
          {"probes", run.outcome.probes_used},
          {"converged", run.outcome.converged != 0},
          {"sampled_clusters", run.sampled_clusters},
          {"curve", curve}};
}

std::string model_path_for(const PipelineConfig& c, const std::string& flag) {
  return flag.empty() ? (fs::path(c.output_dir) / "model.semk").string() : flag;
}

// ---------------------------------------------------------------------------
// Subcommands

int cmd_cluster(const PipelineConfig& c) {
  validate_common(c);
  Matrix e = load_unit(c);
  semd_kmeans_params p = semd_kmeans_params_default();
  p.k = c.k;
  p.iterations = c.kmeans_iterations;
  p.seed = c.seed;
  p.threads = c.threads;
  semd_model* raw = nullptr;
  check(semd_kmeans_fit(e.get(), &p, &raw), "clustering");
  Model m(raw);

  const auto dir = prepare_output(c);
  check(semd_model_save(m.get(), (dir / "model.semk").c_str()), "saving model");

  const double* trace = nullptr;
  std::size_t iters = 0;
  semd_model_objective_trace(m.get(), &trace, &iters);
  std::cerr << "cluster: n=" << semd_matrix_rows(e.get()) << " k=" << c.k
            << " iterations=" << iters << " objective " << trace[0] << " -> "
            << trace[iters - 1] << "\n";
  return kExitOk;
}

int cmd_dedup(const PipelineConfig& c, const std::string& model_flag) {
  validate_common(c);
  if (!c.epsilon && !c.target_fraction) {
    invalid("set exactly one of epsilon and target_fraction");
  }
  Matrix e = load_unit(c);
  Model m = load_model_file(model_path_for(c, model_flag));
  check_model_matches(e.get(), m.get());

  std::optional<TuneRun> tuned;
  double epsilon = c.epsilon.value_or(0.0);
  if (c.target_fraction) {
    tuned = run_tuner(c, e.get(), m.get());
    epsilon = tuned->outcome.epsilon;
  }
  const auto params = dedup_params(c, epsilon);
  semd_result* raw = nullptr;
  check(semd_dedup_run(e.get(), m.get(), &params, &raw), "deduplicating");
  Result r(raw);

  const std::uint64_t n = semd_result_size(r.get());
  const std::uint8_t* mask = semd_result_keep_mask(r.get());
  const std::uint64_t* ids = semd_matrix_ids(e.get());
  std::vector<std::uint64_t> kept;
  for (std::uint64_t i = 0; i < n; ++i) {
    if (mask[i]) kept.push_back(ids[i]);
  }
  std::sort(kept.begin(), kept.end());

  std::uint32_t k = 0;
  const std::uint64_t* removed = semd_result_cluster_removed(r.get(), &k);
  json summary = {{"n", n},
                  {"kept", semd_result_kept(r.get())},
                  {"kept_fraction", semd_result_kept_fraction(r.get())},
                  {"epsilon", epsilon},
                  {"strategy", c.strategy},
                  {"seed", c.seed},
                  {"k", k},
                  {"comparisons", semd_result_comparisons(r.get())},
                  {"per_cluster_removed",
                   std::vector<std::uint64_t>(removed, removed + k)}};
  if (tuned) {
    summary["tuning"] = tune_json(*tuned);
    summary["tuning"]["target_fraction"] = *c.target_fraction;
  }

  const auto dir = prepare_output(c);
  std::string keep_text;
  for (auto id : kept) keep_text += std::to_string(id) + "\n";
  write_text(dir / "keep.txt", keep_text);
  write_text(dir / "summary.json", summary.dump(2) + "\n");
  std::cerr << "dedup: kept " << kept.size() << " of " << n << " at epsilon "
            << epsilon << "\n";
  return tuned && !tuned->outcome.converged ? kExitNotConverged : kExitOk;
}

int cmd_tune(const PipelineConfig& c, const std::string& model_flag,
             const std::string& csv_path) {
  validate_common(c);
  if (!c.target_fraction) invalid("tune needs --target-fraction");
  Matrix e = load_unit(c);
  Model m = load_model_file(model_path_for(c, model_flag));
  check_model_matches(e.get(), m.get());
  const TuneRun run = run_tuner(c, e.get(), m.get());

  const auto dir = prepare_output(c);
  auto j = tune_json(run);
  j["target_fraction"] = *c.target_fraction;
  write_text(dir / "tune.json", j.dump(2) + "\n");
  if (!csv_path.empty()) {
    std::vector<std::size_t> order(run.probe_eps.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return run.probe_eps[a] < run.probe_eps[b];
    });
    std::vector<double> eps;
    std::vector<double> frac;
    for (auto i : order) {
      eps.push_back(run.probe_eps[i]);
      frac.push_back(run.probe_frac[i]);
    }
    write_text(csv_path, curve_csv(eps, frac));
  }
  std::cout << j.dump(2) << "\n";
  return run.outcome.converged ? kExitOk : kExitNotConverged;
}

int cmd_sweep(const PipelineConfig& c, const std::string& model_flag,
              const std::string& eps_text) {
  validate_common(c);
  const auto eps = parse_epsilon_list(eps_text);
  Matrix e = load_unit(c);
  Model m = load_model_file(model_path_for(c, model_flag));
  check_model_matches(e.get(), m.get());
  std::vector<double> frac(eps.size());
  const auto params = dedup_params(c, eps.front());
  check(semd_sweep(e.get(), m.get(), &params, eps.data(), eps.size(),
                   frac.data()),
        "sweeping epsilon");
  const auto dir = prepare_output(c);
  write_text(dir / "curve.csv", curve_csv(eps, frac));
  return kExitOk;
}

int cmd_stats(const PipelineConfig& c, const std::string& model_flag,
              const std::string& summary_flag, const std::string& sweep_text) {
  validate_common(c);
  const std::string summary_path =
      summary_flag.empty() ? (fs::path(c.output_dir) / "summary.json").string()
                           : summary_flag;
  if (!fs::exists(summary_path)) invalid("summary not found: " + summary_path);
  json summary;
  try {
    std::ifstream(summary_path) >> summary;
  } catch (const json::exception& ex) {
    throw CliFailure(kExitFormat, "summary " + summary_path + ": " + ex.what());
  }
  if (!summary.contains("epsilon") || !summary.contains("kept")) {
    throw CliFailure(kExitFormat, "summary " + summary_path +
                                      " lacks epsilon/kept fields");
  }
  std::vector<double> sweep_eps;
  if (!sweep_text.empty()) sweep_eps = parse_epsilon_list(sweep_text);

  Matrix e = load_unit(c);
  Model m = load_model_file(model_path_for(c, model_flag));
  check_model_matches(e.get(), m.get());

  PipelineConfig run_cfg = c;
  run_cfg.strategy = summary.value("strategy", c.strategy);
  run_cfg.seed = summary.value("seed", c.seed);
  const double epsilon = summary["epsilon"].get<double>();
  const auto params = dedup_params(run_cfg, epsilon);
  semd_result* raw = nullptr;
  check(semd_dedup_run(e.get(), m.get(), &params, &raw), "deduplicating");
  Result r(raw);
  if (semd_result_kept(r.get()) != summary["kept"].get<std::uint64_t>()) {
    invalid("summary " + summary_path +
            " was not produced from this corpus and model");
  }

  const std::uint32_t k = semd_model_k(m.get());
  std::vector<std::uint64_t> hist(c.histogram_bins);
  check(semd_similarity_histogram(e.get(), m.get(), c.histogram_bins,
                                  c.threads, hist.data()),
        "histogram");
  double incidence = 0.0;
  check(semd_duplicate_incidence(e.get(), m.get(), epsilon, c.threads,
                                 &incidence),
        "duplicate incidence");
  const std::uint32_t neighbors = k > 1 ? std::min(c.neighbors, k - 1) : 1;
  semd_efficiency eff{};
  check(semd_dedup_efficiency(e.get(), m.get(), epsilon, neighbors, c.threads,
                              &eff),
        "dedup efficiency");
  std::vector<std::uint64_t> sizes(k), removed(k);
  std::vector<double> removed_frac(k);
  check(semd_result_cluster_stats(r.get(), m.get(), sizes.data(),
                                  removed.data(), removed_frac.data()),
        "cluster stats");
  std::vector<double> sweep_frac(sweep_eps.size());
  if (!sweep_eps.empty()) {
    check(semd_sweep(e.get(), m.get(), &params, sweep_eps.data(),
                     sweep_eps.size(), sweep_frac.data()),
          "sweeping epsilon");
  }

  std::uint64_t total_pairs = 0;
  for (auto v : hist) total_pairs += v;
  json per_cluster = json::array();
  std::ostringstream pc_csv;
  pc_csv << "cluster,size,removed,fraction\n";
  for (std::uint32_t cl = 0; cl < k; ++cl) {
    per_cluster.push_back({{"cluster", cl},
                           {"size", sizes[cl]},
                           {"removed", removed[cl]},
                           {"removed_fraction", removed_frac[cl]}});
    pc_csv << cl << "," << sizes[cl] << "," << removed[cl] << ","
           << fmt(removed_frac[cl]) << "\n";
  }
  std::ostringstream h_csv;
  h_csv << "bin_lo,bin_hi,count\n";
  for (std::size_t b = 0; b < hist.size(); ++b) {
    const double lo = -1.0 + 2.0 * static_cast<double>(b) / hist.size();
    const double hi = -1.0 + 2.0 * static_cast<double>(b + 1) / hist.size();
    h_csv << fmt(lo) << "," << fmt(hi) << "," << hist[b] << "\n";
  }
  json report = {{"epsilon", epsilon},
                 {"n", semd_matrix_rows(e.get())},
                 {"k", k},
                 {"kept_fraction", semd_result_kept_fraction(r.get())},
                 {"duplicate_incidence", incidence},
                 {"eta", eff.eta},
                 {"within_pairs", eff.within_pairs},
                 {"candidate_pairs", eff.candidate_pairs},
                 {"neighbors", eff.neighbors},
                 {"similarity_histogram",
                  {{"bins", hist.size()},
                   {"total_pairs", total_pairs},
                   {"counts", hist}}},
                 {"per_cluster", per_cluster},
                 {"intersection", nullptr}};

  const auto dir = prepare_output(c);
  write_text(dir / "metrics.json", report.dump(2) + "\n");
  write_text(dir / "histogram.csv", h_csv.str());
  write_text(dir / "per_cluster.csv", pc_csv.str());
  if (!sweep_eps.empty()) {
    write_text(dir / "curve.csv", curve_csv(sweep_eps, sweep_frac));
  }
  return kExitOk;
}

int cmd_intersect(const std::string& a_path, const std::string& b_path,
                  const std::string& out_path) {
  const auto a = read_keep_list(a_path);
  const auto b = read_keep_list(b_path);
  double pct = 0.0;
  check(semd_intersection_pct(a.data(), a.size(), b.data(), b.size(), &pct),
        "intersection");
  const json j = {{"intersection", pct}, {"n", a.size()}};
  if (!out_path.empty()) write_text(out_path, j.dump(2) + "\n");
  std::cout << j.dump(2) << "\n";
  return kExitOk;
}

int cmd_efficiency(const PipelineConfig& c, const std::string& model_flag) {
  validate_common(c);
  if (!c.epsilon) invalid("efficiency needs --epsilon");
  Matrix e = load_unit(c);
  Model m = load_model_file(model_path_for(c, model_flag));
  check_model_matches(e.get(), m.get());
  semd_efficiency eff{};
  check(semd_dedup_efficiency(e.get(), m.get(), *c.epsilon, c.neighbors,
                              c.threads, &eff),
        "dedup efficiency");
  const json j = {{"eta", eff.eta},
                  {"within_pairs", eff.within_pairs},
                  {"candidate_pairs", eff.candidate_pairs},
                  {"neighbors", eff.neighbors},
                  {"epsilon", *c.epsilon},
                  {"k", semd_model_k(m.get())}};
  const auto dir = prepare_output(c);
  write_text(dir / "efficiency.json", j.dump(2) + "\n");
  std::cout << j.dump(2) << "\n";
  return kExitOk;
}

struct SynthArgs {
  std::uint64_t groups = 100;
  std::uint64_t group_size = 5;
  std::uint32_t dim = 64;
  double within = 0.999;
  double max_center_cos = 0.45;
  std::uint64_t seed = 0;
  std::string out = "synth_out";
};

int cmd_synth(const SynthArgs& a) {
  semd_planted_params p = semd_planted_params_default();
  p.n_groups = a.groups;
  p.group_size = a.group_size;
  p.dim = a.dim;
  p.within_sim_target = a.within;
  p.seed = a.seed;
  p.max_center_cosine = a.max_center_cos;
  std::vector<std::uint64_t> group_of(a.groups * a.group_size);
  double within = 0.0;
  double across = 0.0;
  semd_matrix* raw = nullptr;
  check(semd_generate_planted(&p, &raw, group_of.data(), &within, &across),
        "generating planted corpus");
  Matrix m(raw);

  json groups = json::array();
  std::vector<std::vector<std::uint64_t>> members(a.groups);
  for (std::uint64_t i = 0; i < group_of.size(); ++i) {
    members[group_of[i]].push_back(i);
  }
  for (const auto& g : members) groups.push_back(g);
  const json sidecar = {{"n_groups", a.groups},   {"group_size", a.group_size},
                        {"dim", a.dim},           {"seed", a.seed},
                        {"within_sim", within},   {"across_sim", across},
                        {"groups", groups}};

  std::error_code ec;
  fs::create_directories(a.out, ec);
  if (ec) invalid("cannot create output directory " + a.out);
  check(semd_matrix_save(m.get(), (fs::path(a.out) / "corpus.semd").c_str()),
        "writing corpus");
  write_text(fs::path(a.out) / "groups.json", sidecar.dump(2) + "\n");
  std::cerr << "synth: " << group_of.size() << " points, within_sim=" << within
            << " across_sim=" << across << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Semantic deduplication of embedding corpora"};
  app.require_subcommand(1);

  auto* cluster = app.add_subcommand("cluster", "fit spherical k-means");
  Flags cluster_flags(cluster);
  add_input_flags(cluster_flags);
  cluster_flags.add("-k,--k", &PipelineConfig::k, "number of clusters");
  cluster_flags.add("--iterations", &PipelineConfig::kmeans_iterations,
                    "k-means iterations");

  std::string model_flag;
  std::string summary_flag;
  std::string csv_flag;
  std::string eps_list;
  std::string sweep_list;

  auto* dedup = app.add_subcommand("dedup", "deduplicate within clusters");
  Flags dedup_flags(dedup);
  add_input_flags(dedup_flags);
  add_dedup_flags(dedup_flags);
  dedup->add_option("-m,--model", model_flag, "SEMK1 model file");

  auto* tune = app.add_subcommand("tune", "tune epsilon on sampled clusters");
  Flags tune_flags(tune);
  add_input_flags(tune_flags);
  add_dedup_flags(tune_flags);
  tune->add_option("-m,--model", model_flag, "SEMK1 model file");
  tune->add_option("--csv", csv_flag, "write the probe curve as CSV");

  auto* sweep = app.add_subcommand("sweep", "kept fraction for an epsilon grid");
  Flags sweep_flags(sweep);
  add_input_flags(sweep_flags);
  add_dedup_flags(sweep_flags);
  sweep->add_option("-m,--model", model_flag, "SEMK1 model file");
  sweep->add_option("--epsilons", eps_list, "comma-separated, increasing")
      ->required();

  auto* stats = app.add_subcommand("stats", "redundancy metrics report");
  Flags stats_flags(stats);
  add_input_flags(stats_flags);
  add_dedup_flags(stats_flags);
  stats_flags.add("--neighbors", &PipelineConfig::neighbors,
                  "neighbor clusters for eta");
  stats_flags.add("--bins", &PipelineConfig::histogram_bins, "histogram bins");
  stats->add_option("-m,--model", model_flag, "SEMK1 model file");
  stats->add_option("--summary", summary_flag, "summary.json from dedup");
  stats->add_option("--sweep", sweep_list, "also write curve.csv");

  std::string keep_a;
  std::string keep_b;
  std::string intersect_out;
  auto* intersect =
      app.add_subcommand("intersect", "overlap of two equal-size keep-lists");
  intersect->add_option("keep_a", keep_a, "first keep.txt")->required();
  intersect->add_option("keep_b", keep_b, "second keep.txt")->required();
  intersect->add_option("-o,--out", intersect_out, "write JSON here too");

  auto* efficiency =
      app.add_subcommand("efficiency", "share of duplicate pairs found in-cluster");
  Flags efficiency_flags(efficiency);
  add_input_flags(efficiency_flags);
  efficiency_flags.add_optional("-e,--epsilon", &PipelineConfig::epsilon,
                                "dissimilarity threshold");
  efficiency_flags.add("--neighbors", &PipelineConfig::neighbors,
                       "neighbor clusters");
  efficiency->add_option("-m,--model", model_flag, "SEMK1 model file");

  SynthArgs synth_args;
  auto* synth = app.add_subcommand("synth", "write a planted-duplicate corpus");
  synth->add_option("--groups", synth_args.groups, "number of groups");
  synth->add_option("--group-size", synth_args.group_size, "points per group");
  synth->add_option("--dim", synth_args.dim, "dimension");
  synth->add_option("--within", synth_args.within, "min within-group cosine");
  synth->add_option("--max-center-cos", synth_args.max_center_cos,
                    "cap on center-center cosine");
  synth->add_option("--seed", synth_args.seed, "random seed");
  synth->add_option("-o,--out", synth_args.out, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitValidation;
  }

  try {
    if (cluster->parsed()) return cmd_cluster(cluster_flags.resolve());
    if (dedup->parsed()) return cmd_dedup(dedup_flags.resolve(), model_flag);
    if (tune->parsed()) {
      return cmd_tune(tune_flags.resolve(), model_flag, csv_flag);
    }
    if (sweep->parsed()) {
      return cmd_sweep(sweep_flags.resolve(), model_flag, eps_list);
    }
    if (stats->parsed()) {
      return cmd_stats(stats_flags.resolve(), model_flag, summary_flag,
                       sweep_list);
    }
    if (intersect->parsed()) return cmd_intersect(keep_a, keep_b, intersect_out);
    if (efficiency->parsed()) {
      return cmd_efficiency(efficiency_flags.resolve(), model_flag);
    }
    if (synth->parsed()) return cmd_synth(synth_args);
  } catch (const CliFailure& e) {
    std::cerr << "semdedup: " << e.what() << "\n";
    return e.code();
  } catch (const std::exception& e) {
    std::cerr << "semdedup: " << e.what() << "\n";
    return kExitInternal;
  }
  return kExitInternal;
}
