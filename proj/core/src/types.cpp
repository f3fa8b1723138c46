#include "wifimode/types.hpp"

#include <cstdio>

#include "wifimode/errors.hpp"

namespace wifimode {

Mode mode_from_index(std::size_t i) {
  if (i >= kNumModes) throw DataError("mode index out of range: " + std::to_string(i));
  return static_cast<Mode>(i);
}

std::string_view to_string(Mode m) {
  switch (m) {
    case Mode::Walking: return "walking";
    case Mode::Biking: return "biking";
    case Mode::Driving: return "driving";
  }
  return "unknown";
}

std::optional<Mode> parse_mode(std::string_view s) {
  for (Mode m : kAllModes)
    if (s == to_string(m)) return m;
  return std::nullopt;
}

Dataset::Dataset(std::vector<std::string> feature_names, std::vector<FeatureVector> rows)
    : names_(std::move(feature_names)), rows_(std::move(rows)) {
  for (std::size_t i = 0; i < rows_.size(); ++i) {
    if (rows_[i].values.size() != names_.size())
      throw DataError("row " + std::to_string(i) + " has " + std::to_string(rows_[i].values.size()) +
                      " values, expected " + std::to_string(names_.size()));
  }
}

Dataset Dataset::with_default_names(std::vector<FeatureVector> rows) {
  const std::size_t width = rows.empty() ? 0 : rows.front().values.size();
  std::vector<std::string> names;
  names.reserve(width);
  for (std::size_t j = 0; j < width; ++j) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "f%02zu", j + 1);
    names.emplace_back(buf);
  }
  return Dataset(std::move(names), std::move(rows));
}

std::array<std::size_t, kNumModes> Dataset::class_counts() const {
  std::array<std::size_t, kNumModes> counts{};
  for (const auto& r : rows_) ++counts[index_of(r.label)];
  return counts;
}

std::vector<Mode> Dataset::labels() const {
  std::vector<Mode> out;
  out.reserve(rows_.size());
  for (const auto& r : rows_) out.push_back(r.label);
  return out;
}

Dataset Dataset::select(std::span<const std::size_t> indices) const {
  std::vector<FeatureVector> rows;
  rows.reserve(indices.size());
  for (std::size_t i : indices) rows.push_back(rows_.at(i));
  Dataset out(names_, std::move(rows));
  out.speed_norm_ = speed_norm_;
  return out;
}

const std::array<std::string, kNumFeatures>& feature_column_names() {
  static const std::array<std::string, kNumFeatures> names = [] {
    std::array<std::string, kNumFeatures> n;
    for (std::size_t j = 0; j < kNumFeatures; ++j) {
      char buf[32];
      std::snprintf(buf, sizeof buf, "f%02zu", j + 1);
      n[j] = buf;
    }
    return n;
  }();
  return names;
}

const std::array<FeatureInfo, kNumFeatures>& feature_schema() {
  static constexpr std::string_view kTime = "Time";
  static constexpr std::string_view kCount = "Connection Number";
  static constexpr std::string_view kSignal = "Signal Strength";
  static const std::array<FeatureInfo, kNumFeatures> schema{{
      {1, "Relative Travel Speed", "-", kTime},
      {2, "Origin Connection Time", "s", kTime},
      {3, "Destination Connection Time", "s", kTime},
      {4, "Number of Connections-Orig", "-", kCount},
      {5, "Number of Connections-Dest", "-", kCount},
      {6, "Number of Connections-Avg", "-", kCount},
      {7, "Signal Strength Variance-Orig", "dBm^2", kSignal},
      {8, "Signal Strength Variance-Dest", "dBm^2", kSignal},
      {9, "Signal Strength Variance-Avg", "dBm^2", kSignal},
      {10, "Signal Strength 1st Derivative-Orig", "dBm/s", kSignal},
      {11, "Signal Strength 1st Derivative-Dest", "dBm/s", kSignal},
      {12, "Signal Strength 1st Derivative-Avg", "dBm/s", kSignal},
      {13, "Signal Strength 2nd Derivative-Orig", "dBm/s^2", kSignal},
      {14, "Signal Strength 2nd Derivative-Dest", "dBm/s^2", kSignal},
      {15, "Signal Strength 2nd Derivative-Avg", "dBm/s^2", kSignal},
  }};
  return schema;
}

}  // namespace wifimode
