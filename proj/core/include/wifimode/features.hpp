#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "wifimode/io.hpp"
#include "wifimode/simulator.hpp"
#include "wifimode/types.hpp"

namespace wifimode {

// Uncovered distance between the coverage zones of two pods, keyed by
// unordered pod pair.
class GapTable {
 public:
  GapTable() = default;

  // Shorter arc between the pods minus one coverage radius at each end, floored at 0.
  static GapTable from_geometry(const LoopGeometry& geo);

  void set(PodId a, PodId b, double meters);
  // Throws DataError for an unknown pair.
  double gap(PodId a, PodId b) const;
  bool contains(PodId a, PodId b) const;
  std::size_t pod_count() const { return pod_count_; }

 private:
  std::map<std::pair<PodId, PodId>, double> gaps_;
  std::size_t pod_count_ = 0;
};

// Per device, maximal runs of same-pod detections form zone visits; each
// pair of consecutive visits becomes one trip. Devices are emitted in order
// of first appearance.
std::vector<TripObservation> segment_trips(const std::vector<DetectionRecord>& detections, const TruthMap& truth);

inline constexpr std::size_t kMinDetectionsPerZone = 3;

// gap / (first destination time - last origin time), in m/s.
double raw_gap_speed(const TripObservation& trip, const GapTable& gaps);

// The 15 trip features; f1 is the raw gap speed divided by speed_norm.
// Throws DataError when a zone has fewer than 3 detections, timestamps are
// not strictly increasing, or the inter-zone travel time is not positive.
FeatureVector extract_features(const TripObservation& trip, const GapTable& gaps, double speed_norm);

struct SkippedTrip {
  std::size_t trip_index;
  DeviceId device_id;
  std::string reason;
};

struct BuildResult {
  Dataset dataset;  // speed_norm() holds the normalization constant
  std::vector<SkippedTrip> skipped;
};

// speed_norm is the maximum raw gap speed over the accepted trips, so f1 lies in (0, 1].
BuildResult build_dataset(const std::vector<TripObservation>& trips, const GapTable& gaps);

}  // namespace wifimode
