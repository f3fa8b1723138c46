#pragma once

#include <array>
#include <vector>

#include "wifimode/io.hpp"
#include "wifimode/types.hpp"

namespace wifimode {

// Pods sit at arc-length coordinates along a closed loop. Motion is 1-D along
// the loop; a pod hears a device while the device is within coverage_radius
// of it along the arc (a 2r chord), and the RSSI distance adds a fixed
// perpendicular setback between the road and the sensor.
struct LoopGeometry {
  double perimeter_m = 857.0;
  // Mid-block points of a 250 m x 178.5 m rectangular block.
  std::vector<double> pod_positions_m{125.0, 339.25, 553.5, 767.25};
  double coverage_radius_m = 50.0;
  double pod_setback_m = 5.0;

  std::size_t pod_count() const { return pod_positions_m.size(); }
  void validate() const;
};

struct ModeKinematics {
  double mean_speed_mps = 1.0;
  double speed_sd_mps = 0.0;
  // Per-trip speed draws are clipped to [min_speed, max_speed].
  double min_speed_mps = 0.1;
  double max_speed_mps = 100.0;
  // Chance of one stop inside the uncovered stretch between the two zones.
  double stop_probability = 0.0;
  double stop_min_s = 0.0;
  double stop_max_s = 0.0;

  void validate() const;
};

struct RadioModel {
  double tx_power_at_1m_dbm = -40.0;
  double path_loss_exponent = 2.5;
  double shadowing_sd_db = 4.0;
  double probe_interval_min_s = 0.5;
  double probe_interval_max_s = 2.5;

  void validate() const;
};

struct SimConfig {
  LoopGeometry geometry;
  std::array<ModeKinematics, kNumModes> kinematics = default_kinematics();
  RadioModel radio;
  std::array<std::size_t, kNumModes> trips_per_mode{142, 108, 150};
  // Trip start times are spread uniformly over this window.
  double start_window_s = 3.0 * 3600.0;
  RngSeed seed = 42;

  static std::array<ModeKinematics, kNumModes> default_kinematics();
  void validate() const;
};

// Log-distance path loss: tx - 10 n log10(d) + sd * noise. Throws for d <= 0.
double rssi_at(double distance_m, const RadioModel& radio, double noise_draw);

DeviceId trip_device_id(RngSeed trip_seed);

// One pod-to-next-pod leg, starting as the device enters the start pod's
// zone and ending as it leaves the next pod's zone. Timestamps start near
// start_time_s and are quantized to microseconds, RSSI to 0.01 dB. The
// device id is derived from `seed`.
std::vector<DetectionRecord> simulate_trip(Mode mode, PodId start_pod, const SimConfig& cfg, RngSeed seed,
                                           double start_time_s = 0.0);

struct SimulationResult {
  std::vector<DetectionRecord> detections;  // sorted by (timestamp, device, pod)
  TruthMap truth;
};

SimulationResult simulate_experiment(const SimConfig& cfg);

}  // namespace wifimode
