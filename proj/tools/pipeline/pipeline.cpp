#include "pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <initializer_list>
#include <iostream>
#include <sstream>
#include <type_traits>

#include <nlohmann/json.hpp>

#include "wifimode/errors.hpp"
#include "wifimode/io.hpp"
#include "wifimode/rng.hpp"
#include "wifimode/split.hpp"

namespace wifimode::pipeline {
namespace {

using nlohmann::json;

void reject_unknown(const json& j, std::initializer_list<std::string_view> allowed, const std::string& what) {
  if (!j.is_object()) throw ConfigError(what + ": expected a JSON object");
  for (const auto& [key, value] : j.items())
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
      throw ConfigError(what + ": unknown key '" + key + "'");
}

// nlohmann converts -1 to a huge size_t without complaint, so counts are checked first.
std::size_t unsigned_value(const json& v, std::string_view key) {
  if (!v.is_number_unsigned()) throw ConfigError(std::string(key) + ": expected a non-negative integer");
  return v.get<std::size_t>();
}

template <class T>
void read(const json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  if constexpr (std::is_same_v<T, std::size_t>) out = unsigned_value(j.at(key), key);
  else out = j.at(key).get<T>();
}

json parse_object(std::string_view text, const std::string& what) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(what + ": " + e.what());
  }
  if (!j.is_object()) throw ConfigError(what + ": expected a JSON object");
  return j;
}

// Wraps nlohmann type errors (wrong value types) as ConfigError.
template <class Fn>
auto config_guard(const std::string& what, Fn&& fn) {
  try {
    return fn();
  } catch (const json::exception& e) {
    throw ConfigError(what + ": " + e.what());
  }
}

LoopGeometry geometry_from(const json& j, LoopGeometry g) {
  reject_unknown(j, {"perimeter_m", "pod_positions_m", "coverage_radius_m", "pod_setback_m"}, "geometry");
  read(j, "perimeter_m", g.perimeter_m);
  read(j, "pod_positions_m", g.pod_positions_m);
  read(j, "coverage_radius_m", g.coverage_radius_m);
  read(j, "pod_setback_m", g.pod_setback_m);
  return g;
}

json geometry_json(const LoopGeometry& g) {
  return {{"perimeter_m", g.perimeter_m},
          {"pod_positions_m", g.pod_positions_m},
          {"coverage_radius_m", g.coverage_radius_m},
          {"pod_setback_m", g.pod_setback_m}};
}

ModeKinematics kinematics_from(const json& j, ModeKinematics k, const std::string& what) {
  reject_unknown(j,
                 {"mean_speed_mps", "speed_sd_mps", "min_speed_mps", "max_speed_mps", "stop_probability",
                  "stop_min_s", "stop_max_s"},
                 what);
  read(j, "mean_speed_mps", k.mean_speed_mps);
  read(j, "speed_sd_mps", k.speed_sd_mps);
  read(j, "min_speed_mps", k.min_speed_mps);
  read(j, "max_speed_mps", k.max_speed_mps);
  read(j, "stop_probability", k.stop_probability);
  read(j, "stop_min_s", k.stop_min_s);
  read(j, "stop_max_s", k.stop_max_s);
  return k;
}

json kinematics_json(const ModeKinematics& k) {
  return {{"mean_speed_mps", k.mean_speed_mps}, {"speed_sd_mps", k.speed_sd_mps},
          {"min_speed_mps", k.min_speed_mps},   {"max_speed_mps", k.max_speed_mps},
          {"stop_probability", k.stop_probability}, {"stop_min_s", k.stop_min_s},
          {"stop_max_s", k.stop_max_s}};
}

std::array<std::size_t, kNumModes> trips_from(const json& j, std::array<std::size_t, kNumModes> t) {
  if (j.is_array()) {
    if (j.size() != kNumModes) throw ConfigError("simulation: trips_per_mode needs 3 counts");
    for (std::size_t c = 0; c < kNumModes; ++c) t[c] = unsigned_value(j[c], "trips_per_mode");
    return t;
  }
  reject_unknown(j, {"walking", "biking", "driving"}, "simulation.trips_per_mode");
  for (Mode m : kAllModes) read(j, std::string(to_string(m)).c_str(), t[index_of(m)]);
  return t;
}

SimConfig sim_from(const json& j, SimConfig s) {
  reject_unknown(j, {"geometry", "kinematics", "radio", "trips_per_mode", "start_window_s"}, "simulation");
  if (j.contains("geometry")) s.geometry = geometry_from(j["geometry"], s.geometry);
  if (j.contains("kinematics")) {
    const auto& kj = j["kinematics"];
    reject_unknown(kj, {"walking", "biking", "driving"}, "simulation.kinematics");
    for (Mode m : kAllModes) {
      const std::string name(to_string(m));
      if (kj.contains(name))
        s.kinematics[index_of(m)] = kinematics_from(kj[name], s.kinematics[index_of(m)], "kinematics." + name);
    }
  }
  if (j.contains("radio")) {
    const auto& rj = j["radio"];
    reject_unknown(rj,
                   {"tx_power_at_1m_dbm", "path_loss_exponent", "shadowing_sd_db", "probe_interval_min_s",
                    "probe_interval_max_s"},
                   "simulation.radio");
    read(rj, "tx_power_at_1m_dbm", s.radio.tx_power_at_1m_dbm);
    read(rj, "path_loss_exponent", s.radio.path_loss_exponent);
    read(rj, "shadowing_sd_db", s.radio.shadowing_sd_db);
    read(rj, "probe_interval_min_s", s.radio.probe_interval_min_s);
    read(rj, "probe_interval_max_s", s.radio.probe_interval_max_s);
  }
  if (j.contains("trips_per_mode")) s.trips_per_mode = trips_from(j["trips_per_mode"], s.trips_per_mode);
  read(j, "start_window_s", s.start_window_s);
  return s;
}

json sim_json(const SimConfig& s) {
  json kin;
  for (Mode m : kAllModes) kin[std::string(to_string(m))] = kinematics_json(s.kinematics[index_of(m)]);
  return {{"geometry", geometry_json(s.geometry)},
          {"kinematics", kin},
          {"radio",
           {{"tx_power_at_1m_dbm", s.radio.tx_power_at_1m_dbm},
            {"path_loss_exponent", s.radio.path_loss_exponent},
            {"shadowing_sd_db", s.radio.shadowing_sd_db},
            {"probe_interval_min_s", s.radio.probe_interval_min_s},
            {"probe_interval_max_s", s.radio.probe_interval_max_s}}},
          {"trips_per_mode", s.trips_per_mode},
          {"start_window_s", s.start_window_s}};
}

std::string matrix_csv(const MetricsReport& r) {
  std::ostringstream out;
  out << "actual,walking,biking,driving\n";
  for (Mode a : kAllModes) {
    const auto& row = r.matrix.counts[index_of(a)];
    out << to_string(a) << ',' << row[0] << ',' << row[1] << ',' << row[2] << '\n';
  }
  return out.str();
}

}  // namespace

const ModelConfig& PipelineConfig::model(ModelKind k) const {
  for (const auto& m : models)
    if (m.kind == k) return m;
  throw ConfigError("pipeline: no configuration for model " + std::string(to_string(k)));
}

void PipelineConfig::validate() const {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) throw ConfigError("test_fraction must lie in (0, 1)");
  simulation.validate();
  if (relieff.k_neighbors == 0) throw ConfigError("relieff: k_neighbors must be at least 1");
  for (const auto& m : models) {
    m.tree.validate();
    if (m.kind == ModelKind::Mlp) m.mlp.validate();
  }
}

RngSeed stage_seed(RngSeed master, std::string_view stage) { return derive_seed(master, stage); }

PipelineConfig pipeline_config_from_json(std::string_view text) {
  const json j = parse_object(text, "config");
  return config_guard("config", [&] {
    reject_unknown(j, {"seed", "test_fraction", "simulation", "relieff", "models"}, "config");
    PipelineConfig cfg;
    read(j, "seed", cfg.seed);
    read(j, "test_fraction", cfg.test_fraction);
    if (j.contains("simulation")) cfg.simulation = sim_from(j["simulation"], cfg.simulation);
    if (j.contains("relieff")) {
      const auto& rj = j["relieff"];
      reject_unknown(rj, {"k_neighbors", "sample_count"}, "relieff");
      read(rj, "k_neighbors", cfg.relieff.k_neighbors);
      if (rj.contains("sample_count")) {
        const auto& sc = rj["sample_count"];
        if (sc.is_string() && sc.get<std::string>() == "all") cfg.relieff.sample_count = 0;
        else cfg.relieff.sample_count = unsigned_value(sc, "sample_count");
      }
    }
    if (j.contains("models")) {
      const auto& mj = j["models"];
      reject_unknown(mj, {"dt", "bdt", "rf", "mlp"}, "models");
      for (auto& m : cfg.models) {
        const std::string name(to_string(m.kind));
        if (mj.contains(name)) m = model_config_from_json(m.kind, mj[name].dump());
      }
    }
    cfg.validate();
    return cfg;
  });
}

std::string pipeline_config_to_json(const PipelineConfig& cfg) {
  json models;
  for (const auto& m : cfg.models) models[std::string(to_string(m.kind))] = json::parse(model_config_to_json(m));
  json relieff = {{"k_neighbors", cfg.relieff.k_neighbors}};
  if (cfg.relieff.sample_count == 0) relieff["sample_count"] = "all";
  else relieff["sample_count"] = cfg.relieff.sample_count;
  const json j = {{"seed", cfg.seed},
                  {"test_fraction", cfg.test_fraction},
                  {"simulation", sim_json(cfg.simulation)},
                  {"relieff", relieff},
                  {"models", models}};
  return j.dump(2) + "\n";
}

SimConfig sim_config_from_json(std::string_view text, SimConfig base) {
  const json j = parse_object(text, "simulation config");
  return config_guard("simulation config", [&] {
    SimConfig s = sim_from(j, base);
    s.validate();
    return s;
  });
}

LoopGeometry geometry_from_json(std::string_view text, LoopGeometry base) {
  const json j = parse_object(text, "geometry");
  return config_guard("geometry", [&] {
    LoopGeometry g = geometry_from(j, base);
    g.validate();
    return g;
  });
}

std::string geometry_to_json(const LoopGeometry& geo) { return geometry_json(geo).dump(2) + "\n"; }

std::string read_json_argument(const std::string& arg) {
  const auto first = arg.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && arg[first] == '{') return arg;
  try {
    return read_text_file(arg);
  } catch (const DataError& e) {
    throw ConfigError(e.what());
  }
}

SimulationResult run_simulate(const SimConfig& sim, RngSeed master, const std::filesystem::path& detections_out,
                              const std::filesystem::path& truth_out) {
  SimConfig s = sim;
  s.seed = stage_seed(master, "simulate");
  SimulationResult res = simulate_experiment(s);
  save_detections(detections_out, res.detections);
  save_truth(truth_out, res.truth);
  return res;
}

std::filesystem::path meta_path_for(const std::filesystem::path& features) {
  std::filesystem::path p = features;
  p += ".meta.json";
  return p;
}

BuildResult run_extract(const std::vector<DetectionRecord>& detections, const TruthMap& truth, const LoopGeometry& geo,
                        const std::filesystem::path& features_out) {
  const auto trips = segment_trips(detections, truth);
  BuildResult built = build_dataset(trips, GapTable::from_geometry(geo));
  save_dataset(features_out, built.dataset);

  json skipped = json::array();
  for (const auto& s : built.skipped)
    skipped.push_back({{"trip", s.trip_index}, {"device_id", format_device_id(s.device_id)}, {"reason", s.reason}});
  const json meta = {{"speed_norm", format_double(built.dataset.speed_norm())},
                     {"trips", trips.size()},
                     {"rows", built.dataset.size()},
                     {"skipped", skipped}};
  write_text_file(meta_path_for(features_out), meta.dump(2) + "\n");
  return built;
}

std::string ranking_to_json(const FeatureWeights& w, const Dataset& ds) {
  const auto& schema = feature_schema();
  json list = json::array();
  for (std::size_t r = 0; r < w.ranking.size(); ++r) {
    const std::size_t id = w.ranking[r];
    const std::string name =
        id <= schema.size() && ds.width() == schema.size() ? std::string(schema[id - 1].name) : ds.feature_names()[id - 1];
    list.push_back({{"id", id}, {"name", name}, {"weight", w.weights[id - 1]}, {"rank", r + 1}});
  }
  return list.dump(2) + "\n";
}

FeatureWeights run_rank(const Dataset& features, ReliefFParams p, RngSeed master, const std::filesystem::path& out) {
  p.seed = stage_seed(master, "relieff");
  FeatureWeights w = relieff_rank(features, p);
  write_text_file(out, ranking_to_json(w, features));
  return w;
}

std::string trace_to_csv(const TrainingTrace& trace) {
  std::ostringstream out;
  out << "epoch,train_acc,val_acc,train_loss,val_loss\n";
  for (const auto& e : trace)
    out << e.epoch << ',' << format_double(e.train_accuracy) << ','
        << (std::isnan(e.validation_accuracy) ? std::string("nan") : format_double(e.validation_accuracy)) << ','
        << format_double(e.train_loss) << ','
        << (std::isnan(e.validation_loss) ? std::string("nan") : format_double(e.validation_loss)) << '\n';
  return out.str();
}

TrainOutput run_train(const Dataset& features, const ModelConfig& cfg, double test_fraction, RngSeed master,
                      const std::filesystem::path& model_out, const std::filesystem::path& trace_out) {
  const TrainTest parts = stratified_split(features, test_fraction, derive_seed(master, "split"));
  TrainOutput out = train_model(parts.train, cfg, master);
  write_text_file(model_out, model_to_json(out.model));
  if (!trace_out.empty()) write_text_file(trace_out, trace_to_csv(out.trace));
  return out;
}

MetricsReport run_evaluate(const TrainedModel& model, const Dataset& features, double test_fraction, RngSeed master,
                           const std::filesystem::path& report_out) {
  const TrainTest parts = stratified_split(features, test_fraction, derive_seed(master, "split"));
  MetricsReport r = evaluate_model(model, parts.test);
  r.seed = master;
  if (!report_out.empty()) write_text_file(report_out, report_to_json(r));
  return r;
}

std::string summary_table(const std::vector<MetricsReport>& reports) {
  std::ostringstream out;
  char buf[160];
  std::snprintf(buf, sizeof buf, "%-6s%10s%10s%10s%10s%10s%10s%10s\n", "Model", "Accuracy", "Rec-W", "Rec-B",
                "Rec-D", "Prec-W", "Prec-B", "Prec-D");
  out << buf;
  auto cell = [](const std::optional<Percentage>& p) { return p ? p->text() : std::string("-"); };
  for (const auto& r : reports) {
    std::snprintf(buf, sizeof buf, "%-6s%10s%10s%10s%10s%10s%10s%10s\n", r.model.c_str(), r.accuracy.text().c_str(),
                  cell(r.recall[0]).c_str(), cell(r.recall[1]).c_str(), cell(r.recall[2]).c_str(),
                  cell(r.precision[0]).c_str(), cell(r.precision[1]).c_str(), cell(r.precision[2]).c_str());
    out << buf;
  }
  if (!reports.empty()) {
    const auto best = std::max_element(reports.begin(), reports.end(), [](const auto& a, const auto& b) {
      // a < b  <=>  a.num / a.den < b.num / b.den, exactly
      return a.accuracy.numerator * b.accuracy.denominator < b.accuracy.numerator * a.accuracy.denominator;
    });
    out << "Best: " << best->model << " (" << best->accuracy.text() << "%)\n";
  }
  for (const auto& r : reports) out << '\n' << format_report_table(r);
  return out.str();
}

void run_report(const std::vector<MetricsReport>& reports, const std::filesystem::path& dir, bool emit_plot_data,
                const std::string* trace_csv) {
  if (reports.empty()) throw ConfigError("report: no reports given");
  ensure_writable_directory(dir);
  json all = json::array();
  for (const auto& r : reports) {
    all.push_back(json::parse(report_to_json(r)));
    write_text_file(dir / ("confusion_" + r.model + ".csv"), matrix_csv(r));
  }
  write_text_file(dir / "metrics.json", all.dump(2) + "\n");
  write_text_file(dir / "summary.txt", summary_table(reports));
  if (emit_plot_data) {
    std::ostringstream acc;
    acc << "model,accuracy_percent,correct,total\n";
    for (const auto& r : reports)
      acc << r.model << ',' << format_double(r.accuracy.exact()) << ',' << r.accuracy.numerator << ','
          << r.accuracy.denominator << '\n';
    write_text_file(dir / "plot_accuracy.csv", acc.str());
    if (trace_csv != nullptr) write_text_file(dir / "plot_epochs.csv", *trace_csv);
  }
}

void ensure_writable_directory(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir))
    throw DataError("cannot create output directory '" + dir.string() + "'");
  const auto probe = dir / ".write-probe";
  {
    std::ofstream out(probe);
    if (!out) throw DataError("output directory '" + dir.string() + "' is not writable");
  }
  std::filesystem::remove(probe, ec);
}

namespace {

template <class Fn>
auto stage(const char* name, Fn&& fn) {
  try {
    return fn();
  } catch (const ConfigError& e) {
    throw ConfigError(std::string(name) + ": " + e.what());
  } catch (const TrainingError& e) {
    throw TrainingError(std::string(name) + ": " + e.what());
  } catch (const DataError& e) {
    throw DataError(std::string(name) + ": " + e.what());
  }
}

}  // namespace

std::vector<MetricsReport> run_reproduce(const PipelineConfig& cfg, const std::filesystem::path& dir) {
  stage("setup", [&] {
    cfg.validate();
    ensure_writable_directory(dir);
    write_text_file(dir / "config.json", pipeline_config_to_json(cfg));
    return 0;
  });
  const auto sim = stage("simulate", [&] {
    return run_simulate(cfg.simulation, cfg.seed, dir / "detections.csv", dir / "truth.csv");
  });
  std::cerr << "simulate: " << sim.detections.size() << " detections, " << sim.truth.size() << " trips\n";
  const auto built = stage("extract", [&] {
    return run_extract(sim.detections, sim.truth, cfg.simulation.geometry, dir / "features.csv");
  });
  std::cerr << "extract: " << built.dataset.size() << " rows, " << built.skipped.size() << " skipped\n";
  stage("rank", [&] { return run_rank(built.dataset, cfg.relieff, cfg.seed, dir / "ranking.json"); });

  std::vector<MetricsReport> reports;
  std::string mlp_trace;
  for (const auto& m : cfg.models) {
    const std::string name(to_string(m.kind));
    const auto trained = stage("train", [&] {
      const auto trace_path = m.kind == ModelKind::Mlp ? dir / "trace_mlp.csv" : std::filesystem::path{};
      return run_train(built.dataset, m, cfg.test_fraction, cfg.seed, dir / ("model_" + name + ".json"), trace_path);
    });
    if (m.kind == ModelKind::Mlp) mlp_trace = trace_to_csv(trained.trace);
    reports.push_back(stage("evaluate", [&] {
      return run_evaluate(trained.model, built.dataset, cfg.test_fraction, cfg.seed, dir / ("report_" + name + ".json"));
    }));
    std::cerr << "evaluate: " << name << " accuracy " << reports.back().accuracy.text() << "%\n";
  }
  stage("report", [&] {
    run_report(reports, dir, true, mlp_trace.empty() ? nullptr : &mlp_trace);
    return 0;
  });
  return reports;
}

}  // namespace wifimode::pipeline
