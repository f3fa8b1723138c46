#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace wifimode {

enum class Mode : std::uint8_t { Walking = 0, Biking = 1, Driving = 2 };

inline constexpr std::size_t kNumModes = 3;
inline constexpr std::size_t kNumFeatures = 15;
inline constexpr std::array<Mode, kNumModes> kAllModes{Mode::Walking, Mode::Biking, Mode::Driving};

constexpr std::size_t index_of(Mode m) { return static_cast<std::size_t>(m); }
Mode mode_from_index(std::size_t i);

std::string_view to_string(Mode m);
// Accepts the lowercase names used in the CSV files.
std::optional<Mode> parse_mode(std::string_view s);

using PodId = std::uint32_t;
using DeviceId = std::uint64_t;

struct DetectionRecord {
  PodId pod_id = 0;
  DeviceId device_id = 0;
  double timestamp_s = 0.0;
  double rssi_dbm = 0.0;

  friend bool operator==(const DetectionRecord&, const DetectionRecord&) = default;
};

struct TripObservation {
  DeviceId device_id = 0;
  PodId origin_pod = 0;
  PodId dest_pod = 0;
  std::vector<DetectionRecord> origin_detections;
  std::vector<DetectionRecord> dest_detections;
  Mode mode = Mode::Walking;
};

// A labeled feature row. The pipeline produces 15-wide rows; the learners
// accept any width so they can be exercised on toy problems.
struct FeatureVector {
  std::vector<double> values;
  Mode label = Mode::Walking;

  friend bool operator==(const FeatureVector&, const FeatureVector&) = default;
};

class Dataset {
 public:
  Dataset() = default;
  Dataset(std::vector<std::string> feature_names, std::vector<FeatureVector> rows);

  // Rows with generated names f01, f02, ...
  static Dataset with_default_names(std::vector<FeatureVector> rows);

  std::size_t size() const { return rows_.size(); }
  bool empty() const { return rows_.empty(); }
  std::size_t width() const { return names_.size(); }

  const std::vector<FeatureVector>& rows() const { return rows_; }
  const FeatureVector& operator[](std::size_t i) const { return rows_[i]; }
  const std::vector<std::string>& feature_names() const { return names_; }

  std::array<std::size_t, kNumModes> class_counts() const;
  std::vector<Mode> labels() const;

  // Subset in the given index order.
  Dataset select(std::span<const std::size_t> indices) const;

  // Divisor applied to the raw gap speed when this dataset was built; 0 if unknown.
  double speed_norm() const { return speed_norm_; }
  void set_speed_norm(double v) { speed_norm_ = v; }

 private:
  std::vector<std::string> names_;
  std::vector<FeatureVector> rows_;
  double speed_norm_ = 0.0;
};

// Column names of the feature CSV (f01..f15) and their descriptive names.
const std::array<std::string, kNumFeatures>& feature_column_names();

struct FeatureInfo {
  int id;
  std::string_view name;
  std::string_view unit;
  std::string_view group;
};
const std::array<FeatureInfo, kNumFeatures>& feature_schema();

using RngSeed = std::uint64_t;

}  // namespace wifimode
