#include "wifimode/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <tuple>

#include "wifimode/errors.hpp"
#include "wifimode/rng.hpp"

namespace wifimode {
namespace {

double quantize(double v, double scale) { return std::round(v * scale) / scale; }

// Signed arc offset of `s` from `center`, wrapped into [-P/2, P/2).
double arc_offset(double s, double center, double perimeter) {
  double d = std::fmod(s - center, perimeter);
  if (d < -perimeter / 2) d += perimeter;
  if (d >= perimeter / 2) d -= perimeter;
  return d;
}

}  // namespace

void LoopGeometry::validate() const {
  if (!(perimeter_m > 0.0)) throw ConfigError("geometry: perimeter must be positive");
  if (pod_positions_m.size() < 2) throw ConfigError("geometry: need at least two pods");
  if (!(coverage_radius_m >= 0.0)) throw ConfigError("geometry: coverage radius must be non-negative");
  if (!(pod_setback_m >= 0.0)) throw ConfigError("geometry: pod setback must be non-negative");
  for (std::size_t i = 0; i < pod_positions_m.size(); ++i) {
    const double p = pod_positions_m[i];
    if (!(p >= 0.0 && p < perimeter_m))
      throw ConfigError("geometry: pod " + std::to_string(i) + " position outside [0, perimeter)");
    if (i > 0 && !(p > pod_positions_m[i - 1]))
      throw ConfigError("geometry: pod positions must be strictly increasing along the loop");
  }
  for (std::size_t i = 0; i < pod_positions_m.size(); ++i) {
    const std::size_t j = (i + 1) % pod_positions_m.size();
    double gap = pod_positions_m[j] - pod_positions_m[i];
    if (gap <= 0.0) gap += perimeter_m;
    if (!(gap > 2.0 * coverage_radius_m))
      throw ConfigError("geometry: coverage zones of pods " + std::to_string(i) + " and " + std::to_string(j) +
                        " overlap");
  }
}

void ModeKinematics::validate() const {
  if (!(mean_speed_mps > 0.0)) throw ConfigError("kinematics: mean speed must be positive");
  if (!(speed_sd_mps >= 0.0)) throw ConfigError("kinematics: speed sd must be non-negative");
  if (!(min_speed_mps > 0.0 && min_speed_mps <= max_speed_mps))
    throw ConfigError("kinematics: speed clip range must be positive and ordered");
  if (!(stop_probability >= 0.0 && stop_probability <= 1.0))
    throw ConfigError("kinematics: stop probability must lie in [0, 1]");
  if (!(stop_min_s >= 0.0 && stop_min_s <= stop_max_s))
    throw ConfigError("kinematics: stop duration range must be non-negative and ordered");
}

void RadioModel::validate() const {
  if (!(path_loss_exponent > 0.0)) throw ConfigError("radio: path loss exponent must be positive");
  if (!(shadowing_sd_db >= 0.0)) throw ConfigError("radio: shadowing sd must be non-negative");
  if (!(probe_interval_min_s > 0.0 && probe_interval_min_s <= probe_interval_max_s))
    throw ConfigError("radio: probe interval range must be positive and ordered");
}

std::array<ModeKinematics, kNumModes> SimConfig::default_kinematics() {
  std::array<ModeKinematics, kNumModes> k{};
  k[index_of(Mode::Walking)] = {1.4, 0.2, 0.7, 2.1, 0.0, 0.0, 0.0};
  k[index_of(Mode::Biking)] = {4.0, 0.8, 2.0, 6.0, 0.0, 0.0, 0.0};
  k[index_of(Mode::Driving)] = {7.0, 2.0, 3.5, 10.5, 0.3, 10.0, 45.0};
  return k;
}

void SimConfig::validate() const {
  geometry.validate();
  for (const auto& k : kinematics) k.validate();
  radio.validate();
  if (!(start_window_s >= 0.0)) throw ConfigError("simulation: start window must be non-negative");
}

DeviceId trip_device_id(RngSeed trip_seed) { return splitmix64(trip_seed ^ 0xd1b54a32d192ed03ULL); }

double rssi_at(double distance_m, const RadioModel& radio, double noise_draw) {
  if (!(distance_m > 0.0)) throw ConfigError("rssi_at: distance must be positive");
  return radio.tx_power_at_1m_dbm - 10.0 * radio.path_loss_exponent * std::log10(distance_m) +
         radio.shadowing_sd_db * noise_draw;
}

std::vector<DetectionRecord> simulate_trip(Mode mode, PodId start_pod, const SimConfig& cfg, RngSeed seed,
                                           double start_time_s) {
  cfg.validate();
  const auto& geo = cfg.geometry;
  if (start_pod >= geo.pod_count()) throw ConfigError("simulate_trip: invalid pod id " + std::to_string(start_pod));
  const auto& kin = cfg.kinematics[index_of(mode)];
  const auto& radio = cfg.radio;
  const double r = geo.coverage_radius_m;

  Rng rng(seed);
  const DeviceId device = trip_device_id(seed);

  const PodId dest_pod = static_cast<PodId>((start_pod + 1) % geo.pod_count());
  const double origin = geo.pod_positions_m[start_pod];
  double dest = geo.pod_positions_m[dest_pod];
  if (dest <= origin) dest += geo.perimeter_m;

  const double speed = std::clamp(rng.normal(kin.mean_speed_mps, kin.speed_sd_mps), kin.min_speed_mps,
                                  kin.max_speed_mps);

  // Arc path [s_begin, s_end], with an optional stop at s_stop in the uncovered stretch.
  const double s_begin = origin - r;
  const double s_end = dest + r;
  double s_stop = s_end;
  double stop_s = 0.0;
  if (kin.stop_probability > 0.0 && rng.uniform() < kin.stop_probability) {
    s_stop = rng.uniform(origin + r, dest - r);
    stop_s = rng.uniform(kin.stop_min_s, kin.stop_max_s);
  }
  const double t_stop_begin = (s_stop - s_begin) / speed;
  const double t_stop_end = t_stop_begin + stop_s;
  const double t_end = t_stop_end + (s_end - s_stop) / speed;
  auto position = [&](double t) {
    if (t <= t_stop_begin) return s_begin + speed * t;
    if (t <= t_stop_end) return s_stop;
    return s_stop + speed * (t - t_stop_end);
  };

  std::vector<DetectionRecord> out;
  // Random phase within the first probe interval.
  const double first_interval = rng.uniform(radio.probe_interval_min_s, radio.probe_interval_max_s);
  double t = rng.uniform() * first_interval;
  while (t <= t_end) {
    const double s = position(t);
    for (PodId p = 0; p < geo.pod_count(); ++p) {
      const double dx = arc_offset(s, geo.pod_positions_m[p], geo.perimeter_m);
      if (r <= 0.0 || std::abs(dx) > r) continue;
      const double distance = std::max(1.0, std::hypot(dx, geo.pod_setback_m));
      DetectionRecord rec;
      rec.pod_id = p;
      rec.device_id = device;
      rec.timestamp_s = quantize(start_time_s + t, 1e6);
      rec.rssi_dbm = quantize(rssi_at(distance, radio, rng.normal()), 100.0);
      out.push_back(rec);
    }
    t += rng.uniform(radio.probe_interval_min_s, radio.probe_interval_max_s);
  }
  return out;
}

SimulationResult simulate_experiment(const SimConfig& cfg) {
  cfg.validate();
  SimulationResult result;
  Rng plan(derive_seed(cfg.seed, "plan"));
  const RngSeed trip_root = derive_seed(cfg.seed, "trip");
  std::uint64_t trip_index = 0;
  for (Mode mode : kAllModes) {
    for (std::size_t i = 0; i < cfg.trips_per_mode[index_of(mode)]; ++i, ++trip_index) {
      const auto start_pod = static_cast<PodId>(plan.uniform_index(cfg.geometry.pod_count()));
      const double start_time = plan.uniform() * cfg.start_window_s;
      const RngSeed trip_seed = derive_seed(trip_root, trip_index);
      auto records = simulate_trip(mode, start_pod, cfg, trip_seed, start_time);
      const DeviceId device = trip_device_id(trip_seed);
      if (!result.truth.emplace(device, mode).second)
        throw DataError("simulate: device id collision at trip " + std::to_string(trip_index));
      result.detections.insert(result.detections.end(), records.begin(), records.end());
    }
  }
  std::sort(result.detections.begin(), result.detections.end(), [](const auto& a, const auto& b) {
    return std::tie(a.timestamp_s, a.device_id, a.pod_id) < std::tie(b.timestamp_s, b.device_id, b.pod_id);
  });
  return result;
}

}  // namespace wifimode
