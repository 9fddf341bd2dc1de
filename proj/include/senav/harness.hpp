#pragma once

// Run configuration, simulation and replay drivers, the Monte Carlo
// runner, and CSV report emission.

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "senav/csv_io.hpp"
#include "senav/filter.hpp"
#include "senav/measurements.hpp"
#include "senav/ppf.hpp"

namespace senav {

struct RunConfig {
  enum class Mode { Simulate, Replay };
  Mode mode = Mode::Simulate;
  std::uint64_t seed = 1;
  double duration = 60.0;   // s
  double imu_rate = 200.0;  // Hz
  double frame_rate = 20.0; // Hz; must divide imu_rate
  std::string out = "report.csv";
  std::string export_dir;   // when set, simulate dumps its generated streams

  TrajectoryProfile<double> profile;
  NoiseSpec<double> noise;
  FilterGains<double> gains;

  // Envelope: xi_inf/ell always apply; xi0 and delta are taken from the
  // config unless auto_init, which derives them from the initial error
  // (xi0_1 = delta_1 = 1.2 e1(0) + 0.5, xi0_i = delta_i = 2|e_i(0)| + 2).
  bool ppf_auto_init = true;
  PpfConfig<double> ppf;

  // Initial estimate, identity attitude / zero position and velocity by
  // default; from_truth copies the trajectory state at t = 0.
  bool init_from_truth = false;
  Vec3<double> init_attitude = Vec3<double>::Zero();  // rotation vector
  Vec3<double> init_position = Vec3<double>::Zero();
  Vec3<double> init_velocity = Vec3<double>::Zero();

  int landmark_count = 30;
  double landmark_box = 3.0;           // cube side, m
  bool landmark_center_auto = true;    // center the cube on profile.center
  Vec3<double> landmark_center = Vec3<double>::Zero();
  std::string landmark_file;           // overrides generation when set

  std::string replay_imu, replay_features, replay_observations, replay_truth;

  void validate() const;
};

/// Parses the flat key=value config format ('#' comments, blank lines
/// ignored). Every key has a default; an empty stream yields the stock
/// simulation scenario. Unknown keys are rejected.
RunConfig parse_config(std::istream& in);
RunConfig load_config(const std::string& path);

struct StepRecord {
  double t = 0;
  std::array<double, 4> e{};   // zero on prediction-only rows
  std::array<double, 4> xi{};  // post-guard envelope (schedule on prediction-only rows)
  double att_err = 0;          // |R Rhat^T|_I
  double pos_err = 0;          // m
  double vel_err = 0;          // m/s
  std::array<double, 3> sigma{};
  int inflated_mask = 0;       // bit i set when component i+1 was inflated
  bool frame = false;          // row carries a measurement update
  bool has_truth = true;       // error columns valid (replay may lack truth)
};

struct RunSummary {
  double steady_att_mse = 0;
  double steady_pos_mse = 0;
  double steady_vel_mse = 0;
  long inflation_count = 0;
  bool diverged = false;
  double wall_ms = 0;
  // derived figures used by the acceptance suite (not part of the summary file)
  long inflations_after_1s = 0;
  double steady_mean_e1 = 0;
  double steady_mean_pos = 0;
  double steady_mean_vel = 0;
  double steady_ms_e1 = 0;              // over frame rows in the final quarter
  std::array<double, 3> third_ms_e1{};  // over frame rows per run third
  double max_att = 0, max_pos = 0, max_vel = 0;
};

struct RunReport {
  std::vector<StepRecord> records;
  RunSummary summary;
  PpfConfig<double> ppf_used;  // envelope actually applied (after auto-init)
};

RunReport run_simulate(const RunConfig& cfg);
RunReport run_replay(const RunConfig& cfg);

struct MonteCarloResult {
  std::vector<RunSummary> trials;  // trial i ran with seed cfg.seed + i
  double mean_steady_att_mse = 0;
  double max_steady_att_mse = 0;
  double mean_steady_pos_mse = 0;
  double mean_steady_vel_mse = 0;
  int divergences = 0;
};

/// Runs `trials` independent simulations concurrently with seeds
/// cfg.seed + 0 .. cfg.seed + trials-1. Per-trial divergences are recorded,
/// not fatal.
MonteCarloResult run_monte_carlo(const RunConfig& cfg, int trials);

/// Report CSV (header pinned) plus a key=value summary file.
void emit_report(const RunReport& report, const std::string& csv_path,
                 const std::string& summary_path);
std::vector<StepRecord> load_report_csv(const std::string& path);

/// Default summary path for a report path ("x.csv" -> "x.csv.summary").
std::string summary_path_for(const std::string& csv_path);

}  // namespace senav
