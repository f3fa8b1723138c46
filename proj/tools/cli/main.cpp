#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pipeline.hpp"
#include "wifimode/errors.hpp"
#include "wifimode/eval.hpp"
#include "wifimode/io.hpp"

namespace fs = std::filesystem;
using namespace wifimode;
using namespace wifimode::pipeline;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitTraining = 4;

int run_stage(const std::string& stage, const std::function<void()>& body) {
  try {
    body();
    return 0;
  } catch (const ConfigError& e) {
    std::cerr << "wifimode " << stage << ": configuration error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const TrainingError& e) {
    std::cerr << "wifimode " << stage << ": training error: " << e.what() << "\n";
    return kExitTraining;
  } catch (const DataError& e) {
    std::cerr << "wifimode " << stage << ": data error: " << e.what() << "\n";
    return kExitData;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "wifimode " << stage << ": data error: " << e.what() << "\n";
    return kExitData;
  }
}

// Shared flags: the pipeline config supplies defaults, explicit flags win.
struct Common {
  std::string config;
  std::optional<RngSeed> seed;
  std::optional<double> test_fraction;

  PipelineConfig load() const {
    PipelineConfig cfg = config.empty() ? PipelineConfig{} : pipeline_config_from_json(read_json_argument(config));
    if (seed) cfg.seed = *seed;
    if (test_fraction) cfg.test_fraction = *test_fraction;
    cfg.validate();
    return cfg;
  }
};

void add_config(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config, "Pipeline config: JSON file path or inline JSON object");
}
void add_seed(CLI::App* cmd, Common& c) {
  cmd->add_option("--seed", c.seed, "Master seed; stage seeds are derived from it (default 42 or the config's)");
}
void add_fraction(CLI::App* cmd, Common& c) {
  cmd->add_option("--test-fraction", c.test_fraction, "Held-out test share of each class (default 0.4)")
      ->check(CLI::Range(0.0, 1.0));
}

std::array<std::size_t, kNumModes> parse_trips(const std::string& text) {
  std::array<std::size_t, kNumModes> out{};
  std::stringstream ss(text);
  std::string part;
  std::size_t i = 0;
  while (std::getline(ss, part, ',')) {
    if (i == kNumModes) throw ConfigError("--trips-per-mode takes exactly three counts W,B,D");
    try {
      std::size_t used = 0;
      const long long v = std::stoll(part, &used);
      if (used != part.size() || v < 0) throw std::invalid_argument(part);
      out[i++] = static_cast<std::size_t>(v);
    } catch (const std::logic_error&) {
      throw ConfigError("--trips-per-mode: invalid count '" + part + "'");
    }
  }
  if (i != kNumModes) throw ConfigError("--trips-per-mode takes exactly three counts W,B,D");
  return out;
}

ModelKind parse_kind(const std::string& s) {
  const auto k = parse_model_kind(s);
  if (!k) throw ConfigError("unknown model '" + s + "', expected dt, bdt, rf or mlp");
  return *k;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mobility mode detection from WiFi probe detections"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "wifimode 0.1.0");

  // simulate
  Common sim_c;
  std::string trips_text, det_out, truth_out;
  auto* simulate = app.add_subcommand("simulate", "Simulate pod detections and ground truth");
  add_config(simulate, sim_c);
  add_seed(simulate, sim_c);
  simulate->add_option("--trips-per-mode", trips_text, "Trip counts as W,B,D (default 142,108,150)");
  simulate->add_option("--out-detections", det_out, "Detection CSV to write")->required();
  simulate->add_option("--out-truth", truth_out, "Ground-truth CSV to write")->required();

  // extract
  Common ext_c;
  std::string det_in, truth_in, geometry_arg, features_out;
  auto* extract = app.add_subcommand("extract", "Segment trips and compute the 15 features");
  add_config(extract, ext_c);
  add_seed(extract, ext_c);
  extract->add_option("--detections", det_in, "Detection CSV")->required();
  extract->add_option("--truth", truth_in, "Ground-truth CSV")->required();
  extract->add_option("--geometry", geometry_arg,
                      "Loop geometry JSON (file or inline object); overrides the config's geometry");
  extract->add_option("--out", features_out, "Feature CSV to write (a .meta.json sidecar is written next to it)")
      ->required();

  // rank
  Common rank_c;
  std::string rank_features, rank_out;
  std::optional<std::size_t> rank_k, rank_samples;
  auto* rank = app.add_subcommand("rank", "Rank features by ReliefF weight");
  add_config(rank, rank_c);
  add_seed(rank, rank_c);
  rank->add_option("--features", rank_features, "Feature CSV")->required();
  rank->add_option("--k", rank_k, "Nearest hits/misses per instance (default 10)");
  rank->add_option("--sample-count", rank_samples, "Sampled instances, 0 = all rows (default all)");
  rank->add_option("--out", rank_out, "Ranking JSON to write")->required();

  // train
  Common train_c;
  std::string train_kind, train_features, train_params, train_out, train_trace;
  auto* train = app.add_subcommand("train", "Train one classifier on the training split");
  add_config(train, train_c);
  add_seed(train, train_c);
  add_fraction(train, train_c);
  train->add_option("--model", train_kind, "Model kind: dt, bdt, rf or mlp")->required();
  train->add_option("--features", train_features, "Feature CSV")->required();
  train->add_option("--params", train_params,
                    "Model parameters: JSON file or inline object; overrides the config's entry");
  train->add_option("--out", train_out, "Model JSON to write")->required();
  train->add_option("--trace", train_trace, "Per-epoch MLP trace CSV to write");

  // evaluate
  Common eval_c;
  std::string eval_model, eval_features, eval_out;
  auto* evaluate = app.add_subcommand("evaluate", "Score a trained model on the test split");
  add_config(evaluate, eval_c);
  add_seed(evaluate, eval_c);
  add_fraction(evaluate, eval_c);
  evaluate->add_option("--model", eval_model, "Model JSON written by train")->required();
  evaluate->add_option("--features", eval_features, "Feature CSV")->required();
  evaluate->add_option("--out", eval_out, "Report JSON to write; the table goes to stdout");

  // report
  Common report_c;
  std::vector<std::string> report_inputs;
  std::string report_out, report_trace;
  bool plot_data = false;
  auto* report = app.add_subcommand("report", "Combine evaluation reports into tables and metrics");
  add_config(report, report_c);
  add_seed(report, report_c);
  report->add_option("--reports", report_inputs, "Report JSON files, in display order")->required();
  report->add_option("--out", report_out, "Output directory")->required();
  report->add_flag("--emit-plot-data", plot_data, "Also write plot_accuracy.csv and plot_epochs.csv");
  report->add_option("--trace", report_trace, "MLP trace CSV to include as plot_epochs.csv");

  // reproduce
  Common rep_c;
  std::string rep_out;
  auto* reproduce = app.add_subcommand("reproduce", "Run the full pipeline with one seed");
  add_config(reproduce, rep_c);
  add_seed(reproduce, rep_c);
  reproduce->add_option("--out", rep_out, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  if (simulate->parsed()) {
    return run_stage("simulate", [&] {
      PipelineConfig cfg = sim_c.load();
      if (!trips_text.empty()) cfg.simulation.trips_per_mode = parse_trips(trips_text);
      const auto res = run_simulate(cfg.simulation, cfg.seed, det_out, truth_out);
      std::cerr << "simulate: " << res.detections.size() << " detections, " << res.truth.size() << " trips\n";
    });
  }
  if (extract->parsed()) {
    return run_stage("extract", [&] {
      PipelineConfig cfg = ext_c.load();
      LoopGeometry geo = cfg.simulation.geometry;
      if (!geometry_arg.empty()) geo = geometry_from_json(read_json_argument(geometry_arg), geo);
      const auto detections = load_detections(det_in);
      const auto truth = load_truth(truth_in);
      const auto built = run_extract(detections, truth, geo, features_out);
      std::cerr << "extract: " << built.dataset.size() << " rows, " << built.skipped.size() << " skipped\n";
    });
  }
  if (rank->parsed()) {
    return run_stage("rank", [&] {
      PipelineConfig cfg = rank_c.load();
      if (rank_k) cfg.relieff.k_neighbors = *rank_k;
      if (rank_samples) cfg.relieff.sample_count = *rank_samples;
      const Dataset ds = load_dataset(rank_features);
      const auto w = run_rank(ds, cfg.relieff, cfg.seed, rank_out);
      std::cerr << "rank: top feature f" << w.ranking.front() << "\n";
    });
  }
  if (train->parsed()) {
    return run_stage("train", [&] {
      PipelineConfig cfg = train_c.load();
      const ModelKind kind = parse_kind(train_kind);
      ModelConfig mc = cfg.model(kind);
      if (!train_params.empty()) mc = model_config_from_json(kind, read_json_argument(train_params));
      if (!train_trace.empty() && kind != ModelKind::Mlp)
        throw ConfigError("--trace is only produced by the mlp model");
      const Dataset ds = load_dataset(train_features);
      run_train(ds, mc, cfg.test_fraction, cfg.seed, train_out, train_trace);
      std::cerr << "train: " << train_kind << " written to " << train_out << "\n";
    });
  }
  if (evaluate->parsed()) {
    return run_stage("evaluate", [&] {
      PipelineConfig cfg = eval_c.load();
      const TrainedModel model = model_from_json(read_text_file(eval_model));
      const Dataset ds = load_dataset(eval_features);
      const MetricsReport r = run_evaluate(model, ds, cfg.test_fraction, cfg.seed, eval_out);
      std::cout << format_report_table(r);
    });
  }
  if (report->parsed()) {
    return run_stage("report", [&] {
      report_c.load();  // only validated; reports carry their own seeds
      std::vector<MetricsReport> reports;
      for (const auto& path : report_inputs) reports.push_back(report_from_json(read_text_file(path)));
      std::optional<std::string> trace;
      if (!report_trace.empty()) trace = read_text_file(report_trace);
      run_report(reports, report_out, plot_data, trace ? &*trace : nullptr);
      std::cout << summary_table(reports);
    });
  }
  if (reproduce->parsed()) {
    return run_stage("reproduce", [&] {
      const PipelineConfig cfg = rep_c.load();
      const auto reports = run_reproduce(cfg, rep_out);
      std::cout << summary_table(reports);
    });
  }
  return kExitConfig;
}
