#include "wifimode/features.hpp"

#include <algorithm>
#include <cmath>
#include <span>

#include "wifimode/errors.hpp"

namespace wifimode {
namespace {

std::pair<PodId, PodId> key(PodId a, PodId b) { return a < b ? std::pair{a, b} : std::pair{b, a}; }

struct ZoneStats {
  double connection_time;
  double count;
  double variance;
  double mean_slope;
  double mean_curvature;
};

ZoneStats zone_stats(std::span<const DetectionRecord> d, const char* zone) {
  const std::size_t n = d.size();
  if (n < kMinDetectionsPerZone)
    throw DataError(std::string(zone) + " zone has " + std::to_string(n) + " detections, need at least " +
                    std::to_string(kMinDetectionsPerZone));
  for (std::size_t i = 1; i < n; ++i) {
    if (!(d[i].timestamp_s > d[i - 1].timestamp_s))
      throw DataError(std::string(zone) + " zone timestamps are not strictly increasing");
  }

  ZoneStats s{};
  s.connection_time = d[n - 1].timestamp_s - d[0].timestamp_s;
  s.count = static_cast<double>(n);

  double mean = 0.0;
  for (const auto& r : d) mean += r.rssi_dbm;
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (const auto& r : d) ss += (r.rssi_dbm - mean) * (r.rssi_dbm - mean);
  s.variance = ss / static_cast<double>(n);

  std::vector<double> slope(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i)
    slope[i] = (d[i + 1].rssi_dbm - d[i].rssi_dbm) / (d[i + 1].timestamp_s - d[i].timestamp_s);
  double slope_sum = 0.0;
  for (double v : slope) slope_sum += v;
  s.mean_slope = slope_sum / static_cast<double>(n - 1);

  // Second difference on a non-uniform grid: change in slope over the
  // distance between the two slope midpoints.
  double curv_sum = 0.0;
  for (std::size_t i = 0; i + 2 < n; ++i)
    curv_sum += (slope[i + 1] - slope[i]) / (0.5 * (d[i + 2].timestamp_s - d[i].timestamp_s));
  s.mean_curvature = curv_sum / static_cast<double>(n - 2);
  return s;
}

}  // namespace

GapTable GapTable::from_geometry(const LoopGeometry& geo) {
  geo.validate();
  GapTable t;
  const auto n = static_cast<PodId>(geo.pod_count());
  for (PodId a = 0; a < n; ++a) {
    for (PodId b = a + 1; b < n; ++b) {
      const double forward = geo.pod_positions_m[b] - geo.pod_positions_m[a];
      const double arc = std::min(forward, geo.perimeter_m - forward);
      t.set(a, b, std::max(0.0, arc - 2.0 * geo.coverage_radius_m));
    }
  }
  return t;
}

void GapTable::set(PodId a, PodId b, double meters) {
  if (a == b) throw ConfigError("gap table: pods must differ");
  if (!(meters >= 0.0)) throw ConfigError("gap table: gap must be non-negative");
  gaps_[key(a, b)] = meters;
  pod_count_ = std::max<std::size_t>(pod_count_, std::max(a, b) + 1);
}

double GapTable::gap(PodId a, PodId b) const {
  const auto it = gaps_.find(key(a, b));
  if (it == gaps_.end())
    throw DataError("no gap known between pods " + std::to_string(a) + " and " + std::to_string(b));
  return it->second;
}

bool GapTable::contains(PodId a, PodId b) const { return gaps_.count(key(a, b)) != 0; }

std::vector<TripObservation> segment_trips(const std::vector<DetectionRecord>& detections, const TruthMap& truth) {
  std::vector<DeviceId> order;
  std::map<DeviceId, std::vector<DetectionRecord>> by_device;
  for (const auto& r : detections) {
    auto [it, inserted] = by_device.try_emplace(r.device_id);
    if (inserted) order.push_back(r.device_id);
    it->second.push_back(r);
  }

  std::vector<TripObservation> trips;
  for (DeviceId id : order) {
    const auto truth_it = truth.find(id);
    if (truth_it == truth.end()) throw DataError("device " + format_device_id(id) + " has no ground-truth mode");
    const auto& recs = by_device[id];
    for (std::size_t i = 1; i < recs.size(); ++i) {
      if (recs[i].timestamp_s < recs[i - 1].timestamp_s)
        throw DataError("detections of device " + format_device_id(id) + " are not time-sorted");
    }

    std::vector<std::vector<DetectionRecord>> visits;
    for (const auto& r : recs) {
      if (visits.empty() || visits.back().back().pod_id != r.pod_id) visits.emplace_back();
      visits.back().push_back(r);
    }
    for (std::size_t v = 0; v + 1 < visits.size(); ++v) {
      TripObservation t;
      t.device_id = id;
      t.origin_pod = visits[v].front().pod_id;
      t.dest_pod = visits[v + 1].front().pod_id;
      t.origin_detections = visits[v];
      t.dest_detections = visits[v + 1];
      t.mode = truth_it->second;
      trips.push_back(std::move(t));
    }
  }
  return trips;
}

double raw_gap_speed(const TripObservation& trip, const GapTable& gaps) {
  if (trip.origin_detections.empty() || trip.dest_detections.empty())
    throw DataError("trip has an empty detection sequence");
  const double travel = trip.dest_detections.front().timestamp_s - trip.origin_detections.back().timestamp_s;
  if (!(travel > 0.0)) throw DataError("inter-zone travel time is not positive");
  return gaps.gap(trip.origin_pod, trip.dest_pod) / travel;
}

FeatureVector extract_features(const TripObservation& trip, const GapTable& gaps, double speed_norm) {
  if (!(speed_norm > 0.0)) throw DataError("speed normalization constant must be positive");
  const ZoneStats o = zone_stats(trip.origin_detections, "origin");
  const ZoneStats d = zone_stats(trip.dest_detections, "destination");
  const double speed = raw_gap_speed(trip, gaps);

  FeatureVector fv;
  fv.label = trip.mode;
  fv.values = {
      speed / speed_norm,
      o.connection_time,
      d.connection_time,
      o.count,
      d.count,
      (o.count + d.count) / 2.0,
      o.variance,
      d.variance,
      (o.variance + d.variance) / 2.0,
      o.mean_slope,
      d.mean_slope,
      (o.mean_slope + d.mean_slope) / 2.0,
      o.mean_curvature,
      d.mean_curvature,
      (o.mean_curvature + d.mean_curvature) / 2.0,
  };
  for (double v : fv.values)
    if (!std::isfinite(v)) throw DataError("non-finite feature value");
  return fv;
}

BuildResult build_dataset(const std::vector<TripObservation>& trips, const GapTable& gaps) {
  if (trips.empty()) throw DataError("no trips to build a dataset from");

  BuildResult out;
  std::vector<std::size_t> accepted;
  double speed_norm = 0.0;
  for (std::size_t i = 0; i < trips.size(); ++i) {
    try {
      // Full extraction with a unit norm validates every precondition.
      (void)extract_features(trips[i], gaps, 1.0);
      speed_norm = std::max(speed_norm, raw_gap_speed(trips[i], gaps));
      accepted.push_back(i);
    } catch (const DataError& e) {
      out.skipped.push_back({i, trips[i].device_id, e.what()});
    }
  }
  if (accepted.empty()) throw DataError("all " + std::to_string(trips.size()) + " trips were skipped");
  if (!(speed_norm > 0.0)) throw DataError("every accepted trip has zero gap speed");

  std::vector<FeatureVector> rows;
  rows.reserve(accepted.size());
  for (std::size_t i : accepted) rows.push_back(extract_features(trips[i], gaps, speed_norm));
  out.dataset = Dataset({feature_column_names().begin(), feature_column_names().end()}, std::move(rows));
  out.dataset.set_speed_norm(speed_norm);
  return out;
}

}  // namespace wifimode
