// qbplab: simulate benchmark datasets, run classifier benchmarks, export
// ROC curves. Subcommands: simulate, bench, roc.

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "qbplab/classifier.hpp"
#include "qbplab/cv.hpp"
#include "qbplab/dataset.hpp"
#include "qbplab/metrics.hpp"
#include "qbplab/simgen.hpp"

namespace {

constexpr const char* kVersion = "0.1.0";

using nlohmann::json;

std::string iso_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

json load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open config '" + path + "'");
  }
  return json::parse(in);
}

// Fills options not given on the command line from the config document.
template <typename T>
void config_fill(const CLI::App* cmd, const json& cfg, const char* flag,
                 const char* key, T& target) {
  if (cmd->count(flag) == 0 && cfg.contains(key)) {
    target = cfg.at(key).get<T>();
  }
}

void config_fill_methods(const CLI::App* cmd, const json& cfg,
                         std::vector<std::string>& methods) {
  if (cmd->count("--methods") != 0 || !cfg.contains("methods")) return;
  const json& value = cfg.at("methods");
  methods.clear();
  if (value.is_string()) {
    std::string text = value.get<std::string>();
    std::size_t start = 0;
    while (start <= text.size()) {
      std::size_t end = text.find(',', start);
      if (end == std::string::npos) end = text.size();
      if (end > start) methods.push_back(text.substr(start, end - start));
      start = end + 1;
      if (end == text.size()) break;
    }
  } else {
    methods = value.get<std::vector<std::string>>();
  }
}

void apply_method_options(const json& cfg, qbplab::MethodOptions& options) {
  if (cfg.contains("qbp_rstar")) {
    options.qbp_ratio_bounds =
        cfg.at("qbp_rstar").get<std::vector<std::vector<double>>>();
  }
  if (cfg.contains("qbp_v")) {
    options.qbp_max_scores =
        cfg.at("qbp_v").get<std::vector<std::vector<double>>>();
  }
  if (cfg.contains("knn_candidates")) {
    options.knn_candidates = cfg.at("knn_candidates").get<std::vector<int>>();
  }
}

void validate_methods(const std::vector<std::string>& methods) {
  if (methods.empty()) {
    throw CLI::ValidationError("--methods", "at least one method is required");
  }
  const auto& known = qbplab::known_method_names();
  for (const auto& name : methods) {
    if (std::find(known.begin(), known.end(), name) == known.end()) {
      std::string valid;
      for (const auto& k : known) {
        if (!valid.empty()) valid += ", ";
        valid += k;
      }
      throw CLI::ValidationError("--methods", "unknown method '" + name +
                                                  "'; valid methods: " + valid);
    }
  }
}

qbplab::SimDesign resolve_design(const std::string& id,
                                 const std::string& correlation_path) {
  if (correlation_path.empty()) {
    return qbplab::build_design(id);
  }
  return qbplab::build_design(
      id, qbplab::load_correlation_csv(correlation_path, 35));
}

void write_failure_marker(const std::string& out_dir,
                          const std::string& message) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  std::ofstream marker(out_dir + "/FAILED");
  marker << message << '\n';
}

// --- simulate ---

struct SimulateArgs {
  std::string design;
  std::uint64_t seed = 1;
  std::string out;
  int n_override = 0;
  std::string correlation;
  std::string config;
};

int run_simulate(const SimulateArgs& args) {
  qbplab::SimDesign design = resolve_design(args.design, args.correlation);
  if (args.n_override > 0) {
    design = design.with_n(args.n_override);
  }
  qbplab::RngStream rng(args.seed);
  auto [dataset, mask] = qbplab::sample_dataset(design, rng);
  try {
    qbplab::write_csv(dataset, args.out);
    const json meta{{"schema", "qbplab.dataset_meta"},
                    {"version", 1},
                    {"design", design.id},
                    {"seed", args.seed},
                    {"n", design.n},
                    {"case_proportion", design.case_proportion},
                    {"correlation",
                     args.correlation.empty() ? "identity" : args.correlation},
                    {"relevance_mask", mask.relevant}};
    std::ofstream out(args.out + ".meta.json");
    if (!out) {
      throw std::runtime_error("cannot write '" + args.out + ".meta.json'");
    }
    out << meta.dump(2) << '\n';
  } catch (...) {
    std::error_code ec;
    std::filesystem::remove(args.out, ec);  // no partial outputs
    std::filesystem::remove(args.out + ".meta.json", ec);
    throw;
  }
  std::cout << "wrote " << args.out << " (" << design.n << " subjects, "
            << design.markers.size() << " biomarkers, "
            << mask.count() << " relevant)\n";
  return 0;
}

// --- bench ---

struct BenchArgs {
  std::string design;
  std::string data;
  std::string label = "y";
  std::vector<std::string> methods;
  int reps = 20;
  std::uint64_t seed = 1;
  std::string out;
  int validation_n = 5000;
  int folds = 6;
  int outer_folds = 6;
  int inner_folds = 6;
  int threads = 0;
  std::string correlation;
  double en_alpha = 0.5;
  int lambda_count = 50;
  std::string config;
  qbplab::MethodOptions method_options;
};

std::optional<qbplab::RelevanceMask> sidecar_relevance(
    const std::string& data_path) {
  const std::string meta_path = data_path + ".meta.json";
  std::ifstream in(meta_path);
  if (!in) return std::nullopt;
  try {
    const json meta = json::parse(in);
    qbplab::RelevanceMask mask;
    mask.relevant =
        meta.at("relevance_mask").get<std::vector<std::uint8_t>>();
    return mask;
  } catch (const std::exception&) {
    return std::nullopt;  // sidecar present but not ours
  }
}

int run_bench(BenchArgs args) {
  validate_methods(args.methods);
  const int threads = args.threads > 0
                          ? args.threads
                          : std::max(1u, std::thread::hardware_concurrency());
  args.method_options.en_alpha = args.en_alpha;
  args.method_options.lambda_count = args.lambda_count;

  std::filesystem::create_directories(args.out);
  qbplab::BenchmarkResult result;
  json protocol;
  try {
    if (!args.design.empty()) {
      const qbplab::SimDesign design =
          resolve_design(args.design, args.correlation);
      qbplab::BenchmarkOptions options;
      options.repetitions = args.reps;
      options.master_seed = args.seed;
      options.folds = args.folds;
      options.validation_n = args.validation_n;
      options.threads = threads;
      options.method_options = args.method_options;
      result = qbplab::simulate_benchmark(design, args.methods, options);
      protocol = json{{"protocol", "simulation"},
                      {"design", args.design},
                      {"validation_n", args.validation_n},
                      {"folds", args.folds}};
    } else {
      const qbplab::Dataset ds = qbplab::load_csv(args.data, args.label);
      qbplab::RdcvOptions options;
      options.repetitions = args.reps;
      options.master_seed = args.seed;
      options.outer_folds = args.outer_folds;
      options.inner_folds = args.inner_folds;
      options.threads = threads;
      options.method_options = args.method_options;
      options.relevance = sidecar_relevance(args.data);
      result = qbplab::rdcv(ds, args.methods, options);
      protocol = json{{"protocol", "rdcv"},
                      {"data", args.data},
                      {"label", args.label},
                      {"outer_folds", args.outer_folds},
                      {"inner_folds", args.inner_folds}};
    }

    qbplab::write_rows_csv(result, args.out + "/repetitions.csv");
    qbplab::write_summary_csv(result, args.out + "/summary.csv");

    json provenance{{"tool", "qbplab"},
                    {"version", kVersion},
                    {"command", "bench"},
                    {"seed", args.seed},
                    {"repetitions", args.reps},
                    {"methods", args.methods},
                    {"threads", threads},
                    {"en_alpha", args.en_alpha},
                    {"lambda_count", args.lambda_count},
                    {"correlation", args.correlation.empty()
                                        ? "identity"
                                        : args.correlation},
                    {"timestamp", iso_timestamp()}};
    provenance.update(protocol);
    std::ofstream prov(args.out + "/provenance.json");
    if (!prov) {
      throw std::runtime_error("cannot write provenance.json");
    }
    prov << provenance.dump(2) << '\n';
  } catch (const std::exception& e) {
    write_failure_marker(args.out, e.what());
    throw;
  }

  for (const auto& summary : result.summarize()) {
    std::cout << summary.method << ": mean AUC " << summary.mean_auc
              << " (sd " << summary.sd_auc << ", " << summary.repetitions
              << " repetitions)\n";
  }
  return 0;
}

// --- roc ---

struct RocArgs {
  std::string data;
  std::string label = "y";
  std::string method;
  std::vector<std::string> params;
  std::string out;
  std::string config;
};

qbplab::ParamSetting parse_params(const std::vector<std::string>& params,
                                  const std::string& method,
                                  const qbplab::Dataset& ds) {
  qbplab::ParamSetting setting;
  bool lambda_set = false;
  const auto parse_list = [](const std::string& text) {
    std::vector<double> values;
    std::size_t start = 0;
    while (start <= text.size()) {
      std::size_t end = text.find(',', start);
      if (end == std::string::npos) end = text.size();
      values.push_back(std::stod(text.substr(start, end - start)));
      start = end + 1;
      if (end == text.size()) break;
    }
    return values;
  };
  for (const auto& item : params) {
    const std::size_t eq = item.find('=');
    if (eq == std::string::npos) {
      throw CLI::ValidationError("--param", "expected key=value, got '" +
                                                item + "'");
    }
    const std::string key = item.substr(0, eq);
    const std::string value = item.substr(eq + 1);
    if (key == "lambda") {
      setting.lambda = std::stod(value);
      lambda_set = true;
    } else if (key == "alpha") {
      setting.alpha = std::stod(value);
    } else if (key == "components" || key == "s") {
      setting.components = std::stoi(value);
    } else if (key == "neighbors" || key == "k") {
      setting.neighbors = std::stoi(value);
    } else if (key == "rstar") {
      setting.ratio_bounds = parse_list(value);
    } else if (key == "v") {
      setting.max_scores = parse_list(value);
    } else {
      throw CLI::ValidationError("--param", "unknown parameter '" + key + "'");
    }
  }

  const int n = static_cast<int>(ds.n());
  const int r = static_cast<int>(ds.num_biomarkers());
  if ((method == "plr-lasso" || method == "plr-en" || method == "plr-ridge") &&
      !lambda_set) {
    throw CLI::ValidationError("--param",
                               method + " needs --param lambda=<value>");
  }
  if (method == "knn" && setting.neighbors == 0) {
    setting.neighbors = std::clamp(
        static_cast<int>(std::lround(std::sqrt(static_cast<double>(n)))), 1,
        n);
  }
  if ((method == "pclr" || method == "pls-lda") && setting.components == 0) {
    setting.components = std::max(1, std::min(r, n - 2));
  }
  setting.label = "cli";
  return setting;
}

int run_roc(const RocArgs& args) {
  validate_methods({args.method});
  const qbplab::Dataset ds = qbplab::load_csv(args.data, args.label);
  const auto method = qbplab::make_classifier(args.method);
  const qbplab::ParamSetting setting = parse_params(args.params, args.method, ds);
  const auto model = method->fit(ds, setting);
  const Eigen::VectorXd scores = qbplab::score_all(*model, ds);
  const qbplab::RocCurve curve = qbplab::roc_curve(
      {scores.data(), static_cast<std::size_t>(scores.size())}, ds.labels());
  qbplab::write_roc_csv(curve, args.out);
  std::cout << "wrote " << args.out << " (auc " << curve.auc << ")\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"quantile-based prediction laboratory"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  SimulateArgs sim;
  CLI::App* simulate = app.add_subcommand(
      "simulate", "generate one benchmark dataset as CSV + sidecar JSON");
  simulate->add_option("--design", sim.design, "design id (1..5, 6a..8c)");
  simulate->add_option("--seed", sim.seed, "random seed");
  simulate->add_option("--out", sim.out, "output CSV path");
  simulate->add_option("--n", sim.n_override, "override subject count");
  simulate->add_option("--correlation", sim.correlation,
                       "35x35 latent correlation CSV (default identity)");
  simulate->add_option("--config", sim.config, "JSON config file");

  BenchArgs bench;
  CLI::App* bench_cmd = app.add_subcommand(
      "bench",
      "benchmark methods: simulation protocol for --design, repeated "
      "double CV for --data");
  bench_cmd->add_option("--design", bench.design, "design id (1..5, 6a..8c)");
  bench_cmd->add_option("--data", bench.data, "dataset CSV path");
  bench_cmd->add_option("--label", bench.label, "label column name");
  bench_cmd->add_option("--methods", bench.methods, "comma-separated methods")
      ->delimiter(',');
  bench_cmd->add_option("--reps", bench.reps, "repetitions");
  bench_cmd->add_option("--seed", bench.seed, "master seed");
  bench_cmd->add_option("--out", bench.out,
                        "output directory (default $QBPLAB_OUT_DIR)");
  bench_cmd->add_option("--validation-n", bench.validation_n,
                        "validation subjects per repetition");
  bench_cmd->add_option("--folds", bench.folds, "tuning folds (simulation)");
  bench_cmd->add_option("--outer-folds", bench.outer_folds, "rdCV outer folds");
  bench_cmd->add_option("--inner-folds", bench.inner_folds, "rdCV inner folds");
  bench_cmd->add_option("--threads", bench.threads,
                        "worker threads (default: hardware)");
  bench_cmd->add_option("--correlation", bench.correlation,
                        "35x35 latent correlation CSV");
  bench_cmd->add_option("--en-alpha", bench.en_alpha,
                        "elastic-net mixing proportion");
  bench_cmd->add_option("--lambda-count", bench.lambda_count,
                        "penalty path length");
  bench_cmd->add_option("--config", bench.config, "JSON config file");

  RocArgs roc;
  CLI::App* roc_cmd = app.add_subcommand(
      "roc", "fit one method on a full dataset and export its ROC curve");
  roc_cmd->add_option("--data", roc.data, "dataset CSV path");
  roc_cmd->add_option("--label", roc.label, "label column name");
  roc_cmd->add_option("--method", roc.method, "method name");
  roc_cmd->add_option("--param", roc.params, "method parameter key=value")
      ->take_all();
  roc_cmd->add_option("--out", roc.out, "output ROC CSV path");
  roc_cmd->add_option("--config", roc.config, "JSON config file");

  CLI11_PARSE(app, argc, argv);

  try {
    if (simulate->parsed()) {
      if (!sim.config.empty()) {
        const json cfg = load_config(sim.config);
        config_fill(simulate, cfg, "--design", "design", sim.design);
        config_fill(simulate, cfg, "--seed", "seed", sim.seed);
        config_fill(simulate, cfg, "--out", "out", sim.out);
        config_fill(simulate, cfg, "--n", "n", sim.n_override);
        config_fill(simulate, cfg, "--correlation", "correlation",
                    sim.correlation);
      }
      if (sim.design.empty() || sim.out.empty()) {
        std::cerr << "error: simulate needs --design and --out\n";
        return 2;
      }
      return run_simulate(sim);
    }
    if (bench_cmd->parsed()) {
      if (!bench.config.empty()) {
        const json cfg = load_config(bench.config);
        config_fill(bench_cmd, cfg, "--design", "design", bench.design);
        config_fill(bench_cmd, cfg, "--data", "data", bench.data);
        config_fill(bench_cmd, cfg, "--label", "label", bench.label);
        config_fill_methods(bench_cmd, cfg, bench.methods);
        config_fill(bench_cmd, cfg, "--reps", "reps", bench.reps);
        config_fill(bench_cmd, cfg, "--seed", "seed", bench.seed);
        config_fill(bench_cmd, cfg, "--out", "out", bench.out);
        config_fill(bench_cmd, cfg, "--validation-n", "validation_n",
                    bench.validation_n);
        config_fill(bench_cmd, cfg, "--folds", "folds", bench.folds);
        config_fill(bench_cmd, cfg, "--outer-folds", "outer_folds",
                    bench.outer_folds);
        config_fill(bench_cmd, cfg, "--inner-folds", "inner_folds",
                    bench.inner_folds);
        config_fill(bench_cmd, cfg, "--threads", "threads", bench.threads);
        config_fill(bench_cmd, cfg, "--correlation", "correlation",
                    bench.correlation);
        config_fill(bench_cmd, cfg, "--en-alpha", "en_alpha", bench.en_alpha);
        config_fill(bench_cmd, cfg, "--lambda-count", "lambda_count",
                    bench.lambda_count);
        apply_method_options(cfg, bench.method_options);
      }
      if (bench.out.empty()) {
        if (const char* env = std::getenv("QBPLAB_OUT_DIR")) {
          bench.out = env;
        }
      }
      const bool has_design = !bench.design.empty();
      const bool has_data = !bench.data.empty();
      if (has_design == has_data) {
        std::cerr << "error: bench needs exactly one of --design or --data\n";
        return 2;
      }
      if (bench.methods.empty()) {
        std::cerr << "error: bench needs --methods\n";
        return 2;
      }
      if (bench.out.empty()) {
        std::cerr << "error: bench needs --out (or QBPLAB_OUT_DIR)\n";
        return 2;
      }
      return run_bench(std::move(bench));
    }
    if (roc_cmd->parsed()) {
      if (!roc.config.empty()) {
        const json cfg = load_config(roc.config);
        config_fill(roc_cmd, cfg, "--data", "data", roc.data);
        config_fill(roc_cmd, cfg, "--label", "label", roc.label);
        config_fill(roc_cmd, cfg, "--method", "method", roc.method);
        config_fill(roc_cmd, cfg, "--out", "out", roc.out);
      }
      if (roc.data.empty() || roc.method.empty() || roc.out.empty()) {
        std::cerr << "error: roc needs --data, --method and --out\n";
        return 2;
      }
      return run_roc(roc);
    }
  } catch (const CLI::ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
