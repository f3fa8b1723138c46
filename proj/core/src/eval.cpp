#include "wifimode/eval.hpp"

#include <cstdio>
#include <sstream>

#include <nlohmann/json.hpp>

#include "wifimode/errors.hpp"
#include "wifimode/rng.hpp"

namespace wifimode {
namespace {

using nlohmann::json;

std::string mode_title(Mode m) {
  std::string s(to_string(m));
  s[0] = static_cast<char>(s[0] - 'a' + 'A');
  return s;
}

json percentage_json(const std::optional<Percentage>& p) {
  if (!p) return nullptr;
  return {{"numerator", p->numerator}, {"denominator", p->denominator}, {"percent", p->rounded()}};
}

std::optional<Percentage> percentage_from(const json& j) {
  if (j.is_null()) return std::nullopt;
  return Percentage{j.at("numerator").get<std::size_t>(), j.at("denominator").get<std::size_t>()};
}

std::optional<Percentage> ratio(std::size_t num, std::size_t den) {
  if (den == 0) return std::nullopt;
  return Percentage{num, den};
}

}  // namespace

std::size_t ConfusionMatrix::row_sum(std::size_t actual) const {
  std::size_t s = 0;
  for (std::size_t p = 0; p < kNumModes; ++p) s += counts[actual][p];
  return s;
}

std::size_t ConfusionMatrix::col_sum(std::size_t predicted) const {
  std::size_t s = 0;
  for (std::size_t a = 0; a < kNumModes; ++a) s += counts[a][predicted];
  return s;
}

std::size_t ConfusionMatrix::trace() const {
  std::size_t s = 0;
  for (std::size_t c = 0; c < kNumModes; ++c) s += counts[c][c];
  return s;
}

std::size_t ConfusionMatrix::total() const {
  std::size_t s = 0;
  for (std::size_t a = 0; a < kNumModes; ++a) s += row_sum(a);
  return s;
}

ConfusionMatrix confusion(std::span<const Mode> actual, std::span<const Mode> predicted) {
  if (actual.size() != predicted.size())
    throw DataError("confusion: " + std::to_string(actual.size()) + " actual labels vs " +
                    std::to_string(predicted.size()) + " predictions");
  if (actual.empty()) throw DataError("confusion: no labels");
  ConfusionMatrix cm;
  for (std::size_t i = 0; i < actual.size(); ++i) ++cm.counts[index_of(actual[i])][index_of(predicted[i])];
  return cm;
}

double Percentage::rounded() const {
  // floor(10000 * num / den + 1/2) hundredths of a percent
  const std::uint64_t hundredths = (20000ULL * numerator + denominator) / (2ULL * denominator);
  return static_cast<double>(hundredths) / 100.0;
}

std::string Percentage::text() const {
  const std::uint64_t hundredths = (20000ULL * numerator + denominator) / (2ULL * denominator);
  char buf[32];
  std::snprintf(buf, sizeof buf, "%llu.%02llu", static_cast<unsigned long long>(hundredths / 100),
                static_cast<unsigned long long>(hundredths % 100));
  return buf;
}

MetricsReport metrics(const ConfusionMatrix& cm) {
  if (cm.total() == 0) throw DataError("metrics: empty confusion matrix");
  MetricsReport r;
  r.params_json = "{}";
  r.matrix = cm;
  for (std::size_t c = 0; c < kNumModes; ++c) {
    r.recall[c] = ratio(cm.counts[c][c], cm.row_sum(c));
    r.precision[c] = ratio(cm.counts[c][c], cm.col_sum(c));
  }
  r.accuracy = Percentage{cm.trace(), cm.total()};
  return r;
}

std::string report_to_json(const MetricsReport& r) {
  json j;
  j["model"] = r.model;
  j["seed"] = r.seed;
  j["params"] = json::parse(r.params_json.empty() ? "{}" : r.params_json);
  j["modes"] = {"walking", "biking", "driving"};
  j["confusion"] = r.matrix.counts;
  json recall = json::array(), precision = json::array();
  for (std::size_t c = 0; c < kNumModes; ++c) {
    recall.push_back(percentage_json(r.recall[c]));
    precision.push_back(percentage_json(r.precision[c]));
  }
  j["recall"] = recall;
  j["precision"] = precision;
  j["accuracy"] = percentage_json(r.accuracy);
  return j.dump(2) + "\n";
}

MetricsReport report_from_json(std::string_view text) {
  try {
    const json j = json::parse(text);
    MetricsReport r;
    r.model = j.at("model").get<std::string>();
    r.seed = j.at("seed").get<RngSeed>();
    r.params_json = j.at("params").dump();
    r.matrix.counts = j.at("confusion").get<std::array<std::array<std::size_t, kNumModes>, kNumModes>>();
    for (std::size_t c = 0; c < kNumModes; ++c) {
      r.recall[c] = percentage_from(j.at("recall").at(c));
      r.precision[c] = percentage_from(j.at("precision").at(c));
    }
    const auto acc = percentage_from(j.at("accuracy"));
    if (!acc) throw DataError("report: accuracy missing");
    r.accuracy = *acc;
    return r;
  } catch (const json::exception& e) {
    throw DataError(std::string("report: malformed JSON: ") + e.what());
  }
}

std::string format_report_table(const MetricsReport& r) {
  std::ostringstream out;
  char buf[128];
  out << "Model: " << r.model << "  (seed " << r.seed << ")\n";
  std::snprintf(buf, sizeof buf, "%-12s%10s%10s%10s%10s%10s\n", "Actual", "Walking", "Biking", "Driving", "Total",
                "Recall%");
  out << buf;
  for (std::size_t a = 0; a < kNumModes; ++a) {
    const auto& row = r.matrix.counts[a];
    const std::string recall = r.recall[a] ? r.recall[a]->text() : "-";
    std::snprintf(buf, sizeof buf, "%-12s%10zu%10zu%10zu%10zu%10s\n", mode_title(mode_from_index(a)).c_str(), row[0],
                  row[1], row[2], r.matrix.row_sum(a), recall.c_str());
    out << buf;
  }
  std::snprintf(buf, sizeof buf, "%-12s%10zu%10zu%10zu%10zu\n", "Total", r.matrix.col_sum(0), r.matrix.col_sum(1),
                r.matrix.col_sum(2), r.matrix.total());
  out << buf;
  std::string prec[kNumModes];
  for (std::size_t c = 0; c < kNumModes; ++c) prec[c] = r.precision[c] ? r.precision[c]->text() : "-";
  std::snprintf(buf, sizeof buf, "%-12s%10s%10s%10s\n", "Precision%", prec[0].c_str(), prec[1].c_str(),
                prec[2].c_str());
  out << buf;
  out << "Accuracy%: " << r.accuracy.text() << "\n";
  return out.str();
}

MetricsReport evaluate_model(const TrainedModel& model, const Dataset& test, std::vector<Mode>* predictions) {
  std::vector<Mode> predicted;
  predicted.reserve(test.size());
  for (const auto& row : test.rows()) predicted.push_back(model.predict(row));
  const auto actual = test.labels();
  MetricsReport r = metrics(confusion(actual, predicted));
  r.model = std::string(to_string(model.kind));
  r.params_json = model.params_json;
  if (predictions != nullptr) *predictions = std::move(predicted);
  return r;
}

ExperimentResult run_experiment(const Dataset& features, std::span<const ModelConfig> models, double test_fraction,
                                RngSeed seed) {
  ExperimentResult result;
  result.split = stratified_split_indices(features, test_fraction, derive_seed(seed, "split"));
  const Dataset train = features.select(result.split.train);
  const Dataset test = features.select(result.split.test);
  for (const auto& cfg : models) {
    ModelOutcome o;
    o.config = cfg;
    auto trained = train_model(train, cfg, seed);
    o.model = std::move(trained.model);
    o.trace = std::move(trained.trace);
    o.report = evaluate_model(o.model, test, &o.predictions);
    o.report.seed = seed;
    result.outcomes.push_back(std::move(o));
  }
  return result;
}

}  // namespace wifimode
