#include "senav/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <thread>

#include "senav/errors.hpp"

namespace senav {

namespace {

using Clock = std::chrono::steady_clock;

double wall_ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

Vec3<double> parse_vec3(const std::string& v, const std::string& key) {
  Vec3<double> out;
  std::istringstream ss(v);
  std::string part;
  for (int i = 0; i < 3; ++i) {
    if (!std::getline(ss, part, ',')) throw config_error(key + ": expected 3 comma-separated values");
    try {
      out[i] = std::stod(part);
    } catch (const std::exception&) {
      throw config_error(key + ": bad number '" + part + "'");
    }
  }
  if (std::getline(ss, part, ',')) throw config_error(key + ": expected 3 comma-separated values");
  return out;
}

Vec4<double> parse_vec4(const std::string& v, const std::string& key) {
  Vec4<double> out;
  std::istringstream ss(v);
  std::string part;
  for (int i = 0; i < 4; ++i) {
    if (!std::getline(ss, part, ',')) throw config_error(key + ": expected 4 comma-separated values");
    try {
      out[i] = std::stod(part);
    } catch (const std::exception&) {
      throw config_error(key + ": bad number '" + part + "'");
    }
  }
  if (std::getline(ss, part, ',')) throw config_error(key + ": expected 4 comma-separated values");
  return out;
}

double parse_num(const std::string& v, const std::string& key) {
  try {
    size_t used = 0;
    double d = std::stod(v, &used);
    if (used != v.size()) throw config_error("");
    return d;
  } catch (const std::exception&) {
    throw config_error(key + ": bad number '" + v + "'");
  }
}

bool parse_bool(const std::string& v, const std::string& key) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw config_error(key + ": expected true/false");
}

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

}  // namespace

void RunConfig::validate() const {
  if (!(duration > 0)) throw config_error("duration must be > 0");
  if (!(frame_rate > 0) || !(imu_rate >= frame_rate)) {
    throw config_error("rates must satisfy imu_rate >= frame_rate > 0");
  }
  const double div = imu_rate / frame_rate;
  if (std::abs(div - std::round(div)) > 1e-9) {
    throw config_error("imu_rate must be an integer multiple of frame_rate");
  }
  if (landmark_count < 3 && landmark_file.empty() && mode == Mode::Simulate) {
    throw config_error("landmarks.count must be >= 3");
  }
  if (!(noise.std_omega >= 0) || !(noise.std_accel >= 0) || !(noise.std_feature >= 0)) {
    throw config_error("noise stds must be >= 0");
  }
  gains.validate();
  if (!ppf_auto_init) ppf.validate();
  if (mode == Mode::Replay &&
      (replay_imu.empty() || replay_features.empty() || replay_observations.empty())) {
    throw config_error("replay mode needs replay.imu, replay.features, replay.observations");
  }
}

RunConfig parse_config(std::istream& in) {
  RunConfig cfg;
  std::string line;
  size_t line_no = 0;
  std::map<std::string, std::string> kv;
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw config_error("config line " + std::to_string(line_no) + ": expected key=value");
    }
    kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }

  for (const auto& [key, val] : kv) {
    if (key == "mode") {
      if (val == "simulate") cfg.mode = RunConfig::Mode::Simulate;
      else if (val == "replay") cfg.mode = RunConfig::Mode::Replay;
      else throw config_error("mode: expected simulate or replay");
    } else if (key == "seed") cfg.seed = static_cast<std::uint64_t>(parse_num(val, key));
    else if (key == "duration") cfg.duration = parse_num(val, key);
    else if (key == "imu_rate") cfg.imu_rate = parse_num(val, key);
    else if (key == "frame_rate") cfg.frame_rate = parse_num(val, key);
    else if (key == "out") cfg.out = val;
    else if (key == "export.streams_dir") cfg.export_dir = val;
    else if (key == "trajectory.profile") {
      if (val == "hover") cfg.profile.kind = ProfileKind::Hover;
      else if (val == "circle") cfg.profile.kind = ProfileKind::Circle;
      else if (val == "figure8") cfg.profile.kind = ProfileKind::Figure8;
      else throw config_error("trajectory.profile: unknown profile '" + val + "'");
    } else if (key == "trajectory.center") cfg.profile.center = parse_vec3(val, key);
    else if (key == "trajectory.radius") cfg.profile.radius = parse_num(val, key);
    else if (key == "trajectory.omega") cfg.profile.omega = parse_num(val, key);
    else if (key == "trajectory.phase0") cfg.profile.phase0 = parse_num(val, key);
    else if (key == "trajectory.yaw0") cfg.profile.yaw0 = parse_num(val, key);
    else if (key == "trajectory.yaw_rate") cfg.profile.yaw_rate = parse_num(val, key);
    else if (key == "trajectory.tilt") cfg.profile.tilt = parse_vec3(val, key);
    else if (key == "trajectory.amp2") cfg.profile.amp2 = parse_num(val, key);
    else if (key == "trajectory.amp_z") cfg.profile.amp_z = parse_num(val, key);
    else if (key == "noise.std_omega") cfg.noise.std_omega = parse_num(val, key);
    else if (key == "noise.std_accel") cfg.noise.std_accel = parse_num(val, key);
    else if (key == "noise.std_feature") cfg.noise.std_feature = parse_num(val, key);
    else if (key == "gains.k_w") cfg.gains.k_w = parse_num(val, key);
    else if (key == "gains.k_v") cfg.gains.k_v = parse_num(val, key);
    else if (key == "gains.k_a") cfg.gains.k_a = parse_num(val, key);
    else if (key == "gains.gamma_sigma") cfg.gains.gamma_sigma = parse_num(val, key);
    else if (key == "gains.k_sigma") cfg.gains.k_sigma = parse_num(val, key);
    else if (key == "gains.mu") cfg.gains.mu = parse_num(val, key);
    else if (key == "gains.eps") cfg.gains.eps = parse_num(val, key);
    else if (key == "gains.ell_p") cfg.gains.ell_P = parse_num(val, key);
    else if (key == "ppf.auto_init") cfg.ppf_auto_init = parse_bool(val, key);
    else if (key == "ppf.xi0") cfg.ppf.xi0 = parse_vec4(val, key);
    else if (key == "ppf.xi_inf") cfg.ppf.xi_inf = parse_vec4(val, key);
    else if (key == "ppf.ell") cfg.ppf.ell = parse_vec4(val, key);
    else if (key == "ppf.delta") cfg.ppf.delta = parse_vec4(val, key);
    else if (key == "init.from_truth") cfg.init_from_truth = parse_bool(val, key);
    else if (key == "init.attitude") cfg.init_attitude = parse_vec3(val, key);
    else if (key == "init.position") cfg.init_position = parse_vec3(val, key);
    else if (key == "init.velocity") cfg.init_velocity = parse_vec3(val, key);
    else if (key == "landmarks.count") cfg.landmark_count = static_cast<int>(parse_num(val, key));
    else if (key == "landmarks.box_side") cfg.landmark_box = parse_num(val, key);
    else if (key == "landmarks.center") {
      cfg.landmark_center = parse_vec3(val, key);
      cfg.landmark_center_auto = false;
    } else if (key == "landmarks.file") cfg.landmark_file = val;
    else if (key == "replay.imu") cfg.replay_imu = val;
    else if (key == "replay.features") cfg.replay_features = val;
    else if (key == "replay.observations") cfg.replay_observations = val;
    else if (key == "replay.truth") cfg.replay_truth = val;
    else throw config_error("unknown config key '" + key + "'");
  }
  cfg.validate();
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw config_error("cannot open config file " + path);
  return parse_config(in);
}

namespace {

/// Envelope start per the stock initialization: the attitude component
/// gets 1.2 e1(0) + 0.5, the position components 2|e_i(0)| + 2, and delta
/// is set equal to xi0.
PpfConfig<double> auto_ppf(const PpfConfig<double>& base, const Vec4<double>& e0) {
  PpfConfig<double> cfg = base;
  cfg.xi0[0] = 1.2 * e0[0] + 0.5;
  for (int i = 1; i < 4; ++i) cfg.xi0[i] = 2.0 * std::abs(e0[i]) + 2.0;
  cfg.delta = cfg.xi0;
  cfg.validate();
  return cfg;
}

void check_initial_domain(const PpfConfig<double>& cfg, const Vec4<double>& e0) {
  for (int i = 0; i < 4; ++i) {
    if (std::abs(e0[i]) / cfg.xi0[i] >= cfg.delta[i]) {
      throw config_error("ppf: initial error " + std::to_string(e0[i]) +
                         " outside the transform domain delta*xi0 (component " +
                         std::to_string(i + 1) + ")");
    }
  }
}

struct SteadyAccumulators {
  // run-level metrics collected as records are appended
  void add(const StepRecord& r, double duration) {
    if (r.has_truth) {
      max_att = std::max(max_att, r.att_err);
      max_pos = std::max(max_pos, r.pos_err);
      max_vel = std::max(max_vel, r.vel_err);
    }
    if (r.t > 1.0) {
      for (int i = 0; i < 4; ++i) inf_after_1s += (r.inflated_mask >> i) & 1;
    }
    for (int i = 0; i < 4; ++i) inf_total += (r.inflated_mask >> i) & 1;
    if (r.frame) {
      const double e1sq = r.e[0] * r.e[0];
      int third = std::min(2, static_cast<int>(3.0 * r.t / duration));
      third_ms[third] += e1sq;
      third_n[third] += 1;
      if (r.t >= 0.75 * duration) {
        ss_ms_e1 += e1sq;
        ss_mean_e1 += r.e[0];
        ss_frames += 1;
      }
    }
    if (r.t >= 0.75 * duration && r.has_truth) {
      ss_att2 += r.att_err * r.att_err;
      ss_pos2 += r.pos_err * r.pos_err;
      ss_vel2 += r.vel_err * r.vel_err;
      ss_pos += r.pos_err;
      ss_vel += r.vel_err;
      ss_n += 1;
    }
  }

  void finish(RunSummary& s) const {
    if (ss_n > 0) {
      s.steady_att_mse = ss_att2 / ss_n;
      s.steady_pos_mse = ss_pos2 / ss_n;
      s.steady_vel_mse = ss_vel2 / ss_n;
      s.steady_mean_pos = ss_pos / ss_n;
      s.steady_mean_vel = ss_vel / ss_n;
    }
    if (ss_frames > 0) {
      s.steady_ms_e1 = ss_ms_e1 / ss_frames;
      s.steady_mean_e1 = ss_mean_e1 / ss_frames;
    }
    for (int i = 0; i < 3; ++i) {
      s.third_ms_e1[i] = third_n[i] > 0 ? third_ms[i] / third_n[i] : 0.0;
    }
    s.inflation_count = inf_total;
    s.inflations_after_1s = inf_after_1s;
    s.max_att = max_att;
    s.max_pos = max_pos;
    s.max_vel = max_vel;
  }

  double ss_att2 = 0, ss_pos2 = 0, ss_vel2 = 0, ss_pos = 0, ss_vel = 0;
  double ss_ms_e1 = 0, ss_mean_e1 = 0;
  long ss_n = 0, ss_frames = 0;
  double third_ms[3] = {0, 0, 0};
  long third_n[3] = {0, 0, 0};
  long inf_total = 0, inf_after_1s = 0;
  double max_att = 0, max_pos = 0, max_vel = 0;
};

StepRecord make_record(double t, const StepDiagnostics<double>& diag, const Vec4<double>& xi_sched,
                       const FilterState<double>& st, const NavState<double>& truth) {
  StepRecord r;
  r.t = t;
  r.frame = diag.updated;
  const Vec4<double> xi = diag.updated ? diag.ppf.xi : xi_sched;
  for (int i = 0; i < 4; ++i) {
    r.e[i] = diag.updated ? diag.e[i] : 0.0;
    r.xi[i] = xi[i];
    if (diag.updated && diag.ppf.inflated[i]) r.inflated_mask |= 1 << i;
  }
  for (int i = 0; i < 3; ++i) r.sigma[i] = st.sigma[i];
  r.att_err = attitude_distance<double>(Mat3<double>(truth.R * st.X.R.transpose()));
  r.pos_err = (truth.P - st.X.P).norm();
  r.vel_err = (truth.V - st.X.V).norm();
  return r;
}

}  // namespace

RunReport run_simulate(const RunConfig& cfg) {
  const auto t0 = Clock::now();
  cfg.validate();
  if (cfg.mode != RunConfig::Mode::Simulate) throw config_error("run_simulate: config mode is not simulate");

  std::mt19937_64 rng(cfg.seed);
  std::vector<Feature<double>> landmarks;
  if (!cfg.landmark_file.empty()) {
    landmarks = io::load_features_csv(cfg.landmark_file);
  } else {
    const Vec3<double> center = cfg.landmark_center_auto ? cfg.profile.center : cfg.landmark_center;
    landmarks = make_landmarks<double>(cfg.landmark_count, center, cfg.landmark_box, rng);
  }

  const TruthPoint<double> truth0 = synth_trajectory(0.0, cfg.profile);
  FilterState<double> state;
  state.X = cfg.init_from_truth
                ? truth0.X
                : NavState<double>{so3_exp(cfg.init_attitude), cfg.init_position, cfg.init_velocity};

  const auto obs0 = observe_features(truth0.X, landmarks, cfg.noise.std_feature, rng);
  Aggregates<double> agg0;
  try {
    agg0 = aggregate(landmarks, obs0, state.X.R, state.X.P);
  } catch (const std::invalid_argument& ex) {
    throw config_error(std::string("initial frame unusable: ") + ex.what());
  }
  const Vec4<double> e0 = error_vector(agg0);
  const PpfConfig<double> ppf_cfg = cfg.ppf_auto_init ? auto_ppf(cfg.ppf, e0) : cfg.ppf;
  check_initial_domain(ppf_cfg, e0);

  RunReport rep;
  rep.ppf_used = ppf_cfg;
  SteadyAccumulators acc;

  const double dt = 1.0 / cfg.imu_rate;
  const long n = std::lround(cfg.duration * cfg.imu_rate);
  const long frame_div = std::lround(cfg.imu_rate / cfg.frame_rate);
  rep.records.reserve(n + 1);

  {
    StepRecord r0;
    r0.t = 0.0;
    for (int i = 0; i < 4; ++i) {
      r0.e[i] = e0[i];
      r0.xi[i] = ppf_cfg.xi0[i];
    }
    r0.frame = true;
    r0.att_err = attitude_distance<double>(Mat3<double>(truth0.X.R * state.X.R.transpose()));
    r0.pos_err = (truth0.X.P - state.X.P).norm();
    r0.vel_err = (truth0.X.V - state.X.V).norm();
    rep.records.push_back(r0);
    acc.add(r0, cfg.duration);
  }

  // streams retained for optional export
  std::vector<ImuSample<double>> imu_log;
  std::vector<ObservationFrame<double>> frame_log;
  std::vector<io::TruthRecord> truth_log;
  const bool exporting = !cfg.export_dir.empty();
  if (exporting) {
    imu_log.reserve(n);
    truth_log.push_back(io::TruthRecord{0.0, truth0.X});
  }

  for (long k = 0; k < n; ++k) {
    const double tk = k * dt;
    const double tk1 = (k + 1) * dt;
    const TruthPoint<double> tr_k = synth_trajectory(tk, cfg.profile);
    const ImuSample<double> imu = imu_sample(tr_k, cfg.noise, rng);
    const TruthPoint<double> tr_k1 = synth_trajectory(tk1, cfg.profile);

    std::optional<ObservationFrame<double>> frame;
    if ((k + 1) % frame_div == 0) {
      frame = ObservationFrame<double>{
          tk1, observe_features(tr_k1.X, landmarks, cfg.noise.std_feature, rng)};
    }

    try {
      StepResult<double> res = step(state, imu, frame, landmarks, ppf_cfg, cfg.gains, tk, dt);
      state = res.state;
      StepRecord r = make_record(tk1, res.diag, xi_at(ppf_cfg, tk1), state, tr_k1.X);
      rep.records.push_back(r);
      acc.add(r, cfg.duration);
    } catch (const divergence_error&) {
      rep.summary.diverged = true;
    }
    if (exporting) {
      imu_log.push_back(imu);
      if (frame) frame_log.push_back(*frame);
      truth_log.push_back(io::TruthRecord{tk1, tr_k1.X});
    }
    if (rep.summary.diverged) break;
  }

  acc.finish(rep.summary);
  rep.summary.wall_ms = wall_ms_since(t0);

  if (exporting && !rep.summary.diverged) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(cfg.export_dir, ec);
    io::write_imu_csv(cfg.export_dir + "/imu.csv", imu_log);
    io::write_features_csv(cfg.export_dir + "/features.csv", landmarks);
    io::write_observations_csv(cfg.export_dir + "/observations.csv", frame_log);
    io::write_truth_csv(cfg.export_dir + "/truth.csv", truth_log);
  }
  return rep;
}

RunReport run_replay(const RunConfig& cfg) {
  const auto t0 = Clock::now();
  cfg.validate();
  if (cfg.mode != RunConfig::Mode::Replay) throw config_error("run_replay: config mode is not replay");

  const auto imu = io::load_imu_csv(cfg.replay_imu);
  const auto landmarks = io::load_features_csv(cfg.replay_features);
  auto frames = io::load_observations_csv(cfg.replay_observations);
  std::vector<io::TruthRecord> truth;
  if (!cfg.replay_truth.empty()) truth = io::load_truth_csv(cfg.replay_truth);
  if (imu.size() < 2) throw io_error("replay: need at least 2 IMU samples");

  FilterState<double> state;
  state.X = NavState<double>{so3_exp(cfg.init_attitude), cfg.init_position, cfg.init_velocity};
  if (cfg.init_from_truth && !truth.empty()) state.X = truth.front().X;

  // envelope start from the first frame aggregated against the initial estimate
  Vec4<double> e0 = Vec4<double>::Zero();
  if (!frames.empty()) {
    if (auto agg = try_aggregate(landmarks, frames.front().observations, state.X.R, state.X.P)) {
      e0 = error_vector(*agg);
    }
  }
  const PpfConfig<double> ppf_cfg = cfg.ppf_auto_init ? auto_ppf(cfg.ppf, e0) : cfg.ppf;
  check_initial_domain(ppf_cfg, e0);

  RunReport rep;
  rep.ppf_used = ppf_cfg;
  SteadyAccumulators acc;
  const double t_start = imu.front().t;
  const double t_end = imu.back().t;
  const double duration = t_end - t_start;

  auto truth_at = [&](double t) -> const io::TruthRecord* {
    if (truth.empty()) return nullptr;
    auto it = std::lower_bound(truth.begin(), truth.end(), t,
                               [](const io::TruthRecord& r, double tv) { return r.t < tv; });
    const io::TruthRecord* best = nullptr;
    double best_d = std::numeric_limits<double>::infinity();
    if (it != truth.end() && std::abs(it->t - t) < best_d) { best = &*it; best_d = std::abs(it->t - t); }
    if (it != truth.begin()) {
      auto p = std::prev(it);
      if (std::abs(p->t - t) < best_d) { best = &*p; best_d = std::abs(p->t - t); }
    }
    return best;
  };

  size_t fi = 0;
  for (size_t k = 0; k + 1 < imu.size(); ++k) {
    const double tk1 = imu[k + 1].t;
    const double dt = tk1 - imu[k].t;
    std::optional<ObservationFrame<double>> frame;
    while (fi < frames.size() && frames[fi].t <= tk1 + 0.5 * dt) {
      if (std::abs(frames[fi].t - tk1) <= 0.5 * dt) {
        frame = frames[fi];
      } else {
        std::cerr << "replay: frame at t=" << frames[fi].t
                  << " does not align with any IMU step, skipped\n";
      }
      ++fi;
    }

    try {
      StepResult<double> res =
          step(state, imu[k], frame, landmarks, ppf_cfg, cfg.gains, imu[k].t - t_start, dt);
      state = res.state;
      StepRecord r;
      const io::TruthRecord* tr = truth_at(tk1);
      if (tr && std::abs(tr->t - tk1) <= 0.5 * dt) {
        r = make_record(tk1, res.diag, xi_at(ppf_cfg, tk1 - t_start), state, tr->X);
      } else {
        r = make_record(tk1, res.diag, xi_at(ppf_cfg, tk1 - t_start), state, NavState<double>{});
        r.has_truth = false;
        r.att_err = r.pos_err = r.vel_err = 0.0;
      }
      rep.records.push_back(r);
      acc.add(r, duration);
    } catch (const divergence_error&) {
      rep.summary.diverged = true;
      break;
    }
  }

  acc.finish(rep.summary);
  rep.summary.wall_ms = wall_ms_since(t0);
  return rep;
}

MonteCarloResult run_monte_carlo(const RunConfig& cfg, int trials) {
  if (trials < 1) throw config_error("montecarlo: trials must be >= 1");
  MonteCarloResult mc;
  mc.trials.resize(trials);

  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  std::atomic<int> next{0};
  auto worker = [&]() {
    for (;;) {
      const int i = next.fetch_add(1);
      if (i >= trials) return;
      RunConfig c = cfg;
      c.seed = cfg.seed + static_cast<std::uint64_t>(i);
      c.export_dir.clear();
      try {
        mc.trials[i] = run_simulate(c).summary;
      } catch (const std::exception& ex) {
        // configuration errors propagate as diverged trials with a note
        mc.trials[i] = RunSummary{};
        mc.trials[i].diverged = true;
        std::cerr << "trial " << i << " failed: " << ex.what() << "\n";
      }
    }
  };
  std::vector<std::thread> pool;
  const unsigned nthreads = std::min(hw, static_cast<unsigned>(trials));
  for (unsigned i = 1; i < nthreads; ++i) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();

  double att = 0, pos = 0, vel = 0;
  for (const auto& s : mc.trials) {
    att += s.steady_att_mse;
    pos += s.steady_pos_mse;
    vel += s.steady_vel_mse;
    mc.max_steady_att_mse = std::max(mc.max_steady_att_mse, s.steady_att_mse);
    mc.divergences += s.diverged ? 1 : 0;
  }
  mc.mean_steady_att_mse = att / trials;
  mc.mean_steady_pos_mse = pos / trials;
  mc.mean_steady_vel_mse = vel / trials;
  return mc;
}

std::string summary_path_for(const std::string& csv_path) { return csv_path + ".summary"; }

void emit_report(const RunReport& report, const std::string& csv_path,
                 const std::string& summary_path) {
  std::ofstream out(csv_path, std::ios::binary);
  if (!out) throw io_error("cannot write " + csv_path);
  out << "t,e1,e2,e3,e4,xi1,xi2,xi3,xi4,att_err,pos_err,vel_err,sig1,sig2,sig3,inflated\n";
  for (const auto& r : report.records) {
    out << io::format_double(r.t);
    for (double e : r.e) out << ',' << io::format_double(e);
    for (double x : r.xi) out << ',' << io::format_double(x);
    if (r.has_truth) {
      out << ',' << io::format_double(r.att_err) << ',' << io::format_double(r.pos_err) << ','
          << io::format_double(r.vel_err);
    } else {
      out << ",,,";
    }
    for (double s : r.sigma) out << ',' << io::format_double(s);
    out << ',' << r.inflated_mask << '\n';
  }
  out.close();

  std::ofstream sm(summary_path, std::ios::binary);
  if (!sm) throw io_error("cannot write " + summary_path);
  sm << "steady_att_mse=" << io::format_double(report.summary.steady_att_mse) << '\n'
     << "steady_pos_mse=" << io::format_double(report.summary.steady_pos_mse) << '\n'
     << "steady_vel_mse=" << io::format_double(report.summary.steady_vel_mse) << '\n'
     << "inflation_count=" << report.summary.inflation_count << '\n'
     << "diverged=" << (report.summary.diverged ? 1 : 0) << '\n'
     << "wall_ms=" << io::format_double(report.summary.wall_ms) << '\n';
}

std::vector<StepRecord> load_report_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw io_error(path + ": empty file");
  std::vector<StepRecord> out;
  size_t ln = 1;
  while (std::getline(in, line)) {
    ++ln;
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string f;
    std::vector<std::string> fields;
    while (std::getline(ss, f, ',')) fields.push_back(f);
    if (!line.empty() && line.back() == ',') fields.push_back("");
    if (fields.size() != 16) throw io_error(path + ":" + std::to_string(ln) + ": expected 16 fields");
    StepRecord r;
    r.t = std::stod(fields[0]);
    for (int i = 0; i < 4; ++i) r.e[i] = std::stod(fields[1 + i]);
    for (int i = 0; i < 4; ++i) r.xi[i] = std::stod(fields[5 + i]);
    r.has_truth = !fields[9].empty();
    if (r.has_truth) {
      r.att_err = std::stod(fields[9]);
      r.pos_err = std::stod(fields[10]);
      r.vel_err = std::stod(fields[11]);
    }
    for (int i = 0; i < 3; ++i) r.sigma[i] = std::stod(fields[12 + i]);
    r.inflated_mask = std::stoi(fields[15]);
    out.push_back(r);
  }
  return out;
}

}  // namespace senav
