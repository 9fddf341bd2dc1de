// Acceptance suite: six scenario-level criteria exercised end to end, one
// PASS/FAIL line each. Exits nonzero when any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "senav/filter.hpp"
#include "senav/harness.hpp"
#include "senav/lie.hpp"
#include "senav/measurements.hpp"
#include "senav/ppf.hpp"
#include "senav/selfcheck.hpp"

using namespace senav;
using V3 = Vec3<double>;
using V4 = Vec4<double>;
using M3 = Mat3<double>;

namespace {

using Clock = std::chrono::steady_clock;

int g_failures = 0;

void report(const std::string& id, bool pass, const std::string& detail) {
  std::printf("%s %s: %s\n", id.c_str(), pass ? "PASS" : "FAIL", detail.c_str());
  std::fflush(stdout);
  if (!pass) ++g_failures;
}

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// ---------------------------------------------------------------------- A1

void criterion_a1() {
  const auto t0 = Clock::now();
  auto checks = run_selfchecks();
  bool all = true;
  std::string first_fail;
  for (const auto& c : checks) {
    if (!c.pass && first_fail.empty()) first_fail = c.name;
    all = all && c.pass;
  }
  const double secs = seconds_since(t0);
  std::ostringstream os;
  os << checks.size() << " property suites, " << (all ? "all green" : "first failure: " + first_fail)
     << ", " << secs << " s (limit 10)";
  report("A1", all && secs < 10.0, os.str());
}

// ---------------------------------------------------------------------- A2

RunConfig stock_config() {
  RunConfig cfg;  // defaults are the stock 60 s circle scenario
  cfg.seed = 42;
  return cfg;
}

void criterion_a2() {
  const auto t0 = Clock::now();
  RunConfig cfg = stock_config();
  const RunReport rep = run_simulate(cfg);
  const double secs = seconds_since(t0);

  bool contained = true;
  for (const auto& r : rep.records) {
    if (!r.frame) continue;
    for (int i = 0; i < 4; ++i) {
      if (std::abs(r.e[i]) >= rep.ppf_used.delta[i] * r.xi[i]) contained = false;
    }
  }
  const auto& s = rep.summary;
  const bool pass = !s.diverged && contained && s.inflations_after_1s <= 5 &&
                    s.steady_mean_e1 < 0.03 && s.steady_mean_pos < 0.15 &&
                    s.steady_mean_vel < 0.15 && secs < 5.0;
  std::ostringstream os;
  os << "containment=" << (contained ? "yes" : "NO") << " inflations(t>1s)=" << s.inflations_after_1s
     << " mean_e1=" << s.steady_mean_e1 << " mean_pos=" << s.steady_mean_pos
     << " mean_vel=" << s.steady_mean_vel << " diverged=" << s.diverged << " runtime=" << secs
     << " s (limits: <=5 inflations, 0.03, 0.15, 0.15, 5 s)";
  report("A2", pass, os.str());
}

// ---------------------------------------------------------------------- A3

void criterion_a3() {
  const auto t0 = Clock::now();
  RunConfig cfg = stock_config();
  const int trials = 50;
  const MonteCarloResult mc = run_monte_carlo(cfg, trials);
  const double secs = seconds_since(t0);

  const double ms_limit = 0.03 * 0.03 * 1.5;
  int ms_ok = 0, mono = 0, mono_tol = 0;
  for (const auto& tr : mc.trials) {
    if (!tr.diverged && tr.steady_ms_e1 < ms_limit) ++ms_ok;
    const auto& th = tr.third_ms_e1;
    if (th[0] >= th[1] && th[1] >= th[2]) ++mono;
    // informational variant: allows 2 standard errors of the MS estimator
    // (about 1200 correlated frames per third) on each comparison
    const double se = 2.0 * std::sqrt(2.0 / 130.0);
    if (th[0] >= th[1] * (1.0 - se) && th[1] >= th[2] * (1.0 - se)) ++mono_tol;
  }
  const bool clause_ms = ms_ok >= 48 && mc.divergences == 0;  // 95% of 50
  const bool clause_mono = mono >= 45;                        // 90% of 50
  const bool pass = clause_ms && clause_mono && secs < 180.0;
  std::ostringstream os;
  os << "steady MS e1 < " << ms_limit << " in " << ms_ok << "/50 (need 48), divergences="
     << mc.divergences << ", thirds non-increasing in " << mono << "/50 (need 45; with 2-SE "
     << "equality tolerance: " << mono_tol << "/50), runtime=" << secs << " s (limit 180)";
  report("A3", pass, os.str());
}

// ---------------------------------------------------------------------- A4

struct ContState {
  M3 R;
  V3 P, V, sigma;
};

ContState operator+(const ContState& a, const ContState& b) {
  return ContState{a.R + b.R, a.P + b.P, a.V + b.V, a.sigma + b.sigma};
}
ContState operator*(double s, const ContState& a) {
  return ContState{s * a.R, s * a.P, s * a.V, s * a.sigma};
}

struct A4Scenario {
  TrajectoryProfile<double> profile;
  std::vector<Feature<double>> landmarks;
  PpfConfig<double> ppf;
  FilterGains<double> gains;
  NavState<double> x0;

  A4Scenario() {
    profile.kind = ProfileKind::Circle;
    std::mt19937_64 rng(7);
    landmarks = make_landmarks<double>(20, profile.center, 3.0, rng);
    ppf.xi0 = V4(2.0, 3.0, 3.0, 3.0);
    ppf.xi_inf = V4(0.03, 0.1, 0.1, 0.1);
    ppf.ell = V4::Ones();
    ppf.delta = V4(3.0, 3.0, 3.0, 3.0);
    const auto truth = synth_trajectory(0.0, profile);
    x0 = NavState<double>{truth.X.R * so3_exp<double>(V3(0.2, -0.1, 0.15)),
                          truth.X.P + V3(0.5, -0.3, 0.2), truth.X.V + V3(0.2, 0.0, -0.1)};
  }

  std::vector<FeatureObservation<double>> exact_obs(double t) const {
    const auto tr = synth_trajectory(t, profile);
    std::mt19937_64 tmp(1);
    return observe_features(tr.X, landmarks, 0.0, tmp);
  }

  ImuSample<double> exact_imu(double t) const {
    const auto tr = synth_trajectory(t, profile);
    return ImuSample<double>{t, tr.omega, tr.accel};
  }
};

ContState rhs(const A4Scenario& sc, const ContState& y, double tau, const ImuSample<double>& imu) {
  const auto obs = sc.exact_obs(tau);
  const auto agg = aggregate(sc.landmarks, obs, y.R, y.P);
  const V4 e = error_vector(agg);
  const auto ppf = transform(e, xi_at(sc.ppf, tau), sc.ppf.delta, sc.ppf.inflation());
  FilterState<double> st{NavState<double>{y.R, y.P, y.V}, y.sigma};
  const auto d = continuous_rhs(st, imu, agg, ppf, sc.gains);
  return ContState{d.Rdot, d.Pdot, d.Vdot, d.sigmadot};
}

// classic RK4 on the ambient coordinates; observations and the envelope
// are re-evaluated at each stage time and stage state
ContState rk4_run(const A4Scenario& sc, double dt, double horizon) {
  ContState y{sc.x0.R, sc.x0.P, sc.x0.V, V3::Zero()};
  const long n = std::lround(horizon / dt);
  for (long k = 0; k < n; ++k) {
    const double t = k * dt;
    const ImuSample<double> imu = sc.exact_imu(t);  // zero-order hold, as the discrete path sees it
    const ContState k1 = rhs(sc, y, t, imu);
    const ContState k2 = rhs(sc, y + (dt / 2) * k1, t + dt / 2, imu);
    const ContState k3 = rhs(sc, y + (dt / 2) * k2, t + dt / 2, imu);
    const ContState k4 = rhs(sc, y + dt * k3, t + dt, imu);
    y = y + (dt / 6) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return y;
}

FilterState<double> discrete_run(const A4Scenario& sc, double dt, double horizon) {
  FilterState<double> st{sc.x0, V3::Zero()};
  const long n = std::lround(horizon / dt);
  for (long k = 0; k < n; ++k) {
    const double t = k * dt;
    const ImuSample<double> imu = sc.exact_imu(t);
    ObservationFrame<double> frame{t + dt, sc.exact_obs(t + dt)};
    st = step(st, imu, std::optional{frame}, sc.landmarks, sc.ppf, sc.gains, t, dt).state;
  }
  return st;
}

void criterion_a4() {
  const A4Scenario sc;
  const double horizon = 1.0;
  std::vector<double> dts{5e-3, 2.5e-3, 1.25e-3};
  std::vector<double> diffs;
  for (double dt : dts) {
    const ContState c = rk4_run(sc, dt, horizon);
    const FilterState<double> d = discrete_run(sc, dt, horizon);
    const double diff = (d.X.R - c.R).norm() + (d.X.P - c.P).norm() + (d.X.V - c.V).norm() +
                        (d.sigma - c.sigma).norm();
    diffs.push_back(diff);
  }
  const double s1 = std::log2(diffs[0] / diffs[1]);
  const double s2 = std::log2(diffs[1] / diffs[2]);
  const double slope = 0.5 * (s1 + s2);
  const bool pass = std::abs(slope - 1.0) <= 0.2;
  std::ostringstream os;
  os << "terminal diffs " << diffs[0] << " / " << diffs[1] << " / " << diffs[2]
     << ", measured order " << slope << " (need 1.0 +- 0.2)";
  report("A4", pass, os.str());
}

// ---------------------------------------------------------------------- A5

void criterion_a5() {
  TrajectoryProfile<double> profile;  // stock circle
  std::mt19937_64 rng(42);
  auto landmarks = make_landmarks<double>(30, profile.center, 3.0, rng);
  PpfConfig<double> ppf;
  ppf.xi0 = V4(20.0, 16.0, 16.0, 16.0);
  ppf.xi_inf = V4(0.03, 0.1, 0.1, 0.1);
  ppf.ell = V4::Ones();
  ppf.delta = ppf.xi0;
  FilterGains<double> gains;
  NoiseSpec<double> noise;

  FilterState<double> st;  // identity estimate, large initial error
  QuatFilterState<double> qs;
  qs.q = rot_to_quat(st.X.R);

  const double dt = 0.005;
  const long n = 2000;  // 10 s
  double worst_q_norm = 0.0;
  for (long k = 0; k < n; ++k) {
    const auto tr = synth_trajectory(k * dt, profile);
    const auto imu = imu_sample(TruthPoint<double>{k * dt, tr.X, tr.omega, tr.accel}, noise, rng);
    std::optional<ObservationFrame<double>> frame;
    if ((k + 1) % 10 == 0) {
      const auto tr1 = synth_trajectory((k + 1) * dt, profile);
      frame = ObservationFrame<double>{(k + 1) * dt,
                                       observe_features(tr1.X, landmarks, noise.std_feature, rng)};
    }
    st = step(st, imu, frame, landmarks, ppf, gains, k * dt, dt).state;
    qs = quat_step(qs, imu, frame, landmarks, ppf, gains, k * dt, dt).state;
    worst_q_norm = std::max(worst_q_norm, std::abs(qs.q.norm() - 1.0));
  }
  const double dr = (quat_to_rot(qs.q, 1e-9) - st.X.R).norm();
  const double dp = (qs.P - st.X.P).norm();
  const double dv = (qs.V - st.X.V).norm();
  const bool pass = dr < 1e-6 && dp < 1e-6 && dv < 1e-6 && worst_q_norm < 1e-12;
  std::ostringstream os;
  os << "after 10 s: |R(q)-R|=" << dr << " |dP|=" << dp << " |dV|=" << dv
     << " max |q|-1=" << worst_q_norm << " (need < 1e-6, unit norm 1e-12)";
  report("A5", pass, os.str());
}

// ---------------------------------------------------------------------- A6

std::string strip_wall(const std::string& text) {
  std::istringstream in(text);
  std::ostringstream out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind("wall_ms=", 0) == 0) continue;
    out << line << '\n';
  }
  return out.str();
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void criterion_a6() {
  namespace fs = std::filesystem;
  RunConfig cfg;
  cfg.profile.kind = ProfileKind::Hover;
  cfg.profile.yaw_rate = 0.0;
  cfg.duration = 50.0;  // 1e4 steps at 200 Hz
  cfg.noise = NoiseSpec<double>{0.0, 0.0, 0.0, 9};
  cfg.init_from_truth = true;
  cfg.seed = 9;

  const RunReport a = run_simulate(cfg);
  double worst = 0.0;
  for (const auto& r : a.records) {
    for (double e : r.e) worst = std::max(worst, std::abs(e));
    worst = std::max({worst, r.att_err, r.pos_err, r.vel_err});
    for (double s : r.sigma) worst = std::max(worst, std::abs(s));
  }
  const bool equilibrium = worst < 1e-9 && a.records.size() == 10001 && !a.summary.diverged;

  const RunReport b = run_simulate(cfg);
  const fs::path dir = fs::temp_directory_path() / "senav_acceptance_a6";
  fs::create_directories(dir);
  emit_report(a, (dir / "a.csv").string(), (dir / "a.sum").string());
  emit_report(b, (dir / "b.csv").string(), (dir / "b.sum").string());
  const bool identical = slurp((dir / "a.csv").string()) == slurp((dir / "b.csv").string()) &&
                         strip_wall(slurp((dir / "a.sum").string())) ==
                             strip_wall(slurp((dir / "b.sum").string()));
  std::error_code ec;
  fs::remove_all(dir, ec);

  std::ostringstream os;
  os << "max error over 1e4 noise-free steps = " << worst
     << " (need < 1e-9), repeated run byte-identical=" << (identical ? "yes" : "NO")
     << " (summary compared without wall_ms)";
  report("A6", equilibrium && identical, os.str());
}

}  // namespace

int main() {
  criterion_a1();
  criterion_a2();
  criterion_a3();
  criterion_a4();
  criterion_a5();
  criterion_a6();
  if (g_failures > 0) {
    std::printf("%d criterion(s) failed\n", g_failures);
    return 1;
  }
  std::printf("all acceptance criteria passed\n");
  return 0;
}
