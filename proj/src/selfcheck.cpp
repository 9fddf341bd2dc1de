#include "senav/selfcheck.hpp"

#include <cmath>
#include <random>
#include <sstream>

#include "senav/filter.hpp"
#include "senav/lie.hpp"
#include "senav/measurements.hpp"
#include "senav/ppf.hpp"

namespace senav {

namespace {

using V3 = Vec3<double>;
using V4 = Vec4<double>;
using M3 = Mat3<double>;
using M5 = Mat5<double>;

V3 rand_vec(std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> n(0.0, 1.0);
  return V3(n(rng), n(rng), n(rng)) * scale;
}

M3 rand_rotation(std::mt19937_64& rng, double max_angle = M_PI - 0.05) {
  std::uniform_real_distribution<double> u(0.0, max_angle);
  V3 axis = rand_vec(rng);
  axis.normalize();
  return so3_exp<double>(V3(axis * u(rng)));
}

// weighted point cloud with at least two positive eigenvalues of M
M3 rand_info_matrix(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> w(0.2, 2.0);
  std::uniform_int_distribution<int> nf(3, 8);
  for (;;) {
    const int n = nf(rng);
    std::vector<V3> pts;
    std::vector<double> ws;
    V3 pc = V3::Zero();
    double st = 0;
    for (int i = 0; i < n; ++i) {
      pts.push_back(rand_vec(rng, 2.0));
      ws.push_back(w(rng));
      pc += ws.back() * pts.back();
      st += ws.back();
    }
    pc /= st;
    M3 m = M3::Zero();
    for (int i = 0; i < n; ++i) {
      m += ws[i] * (pts[i] - pc) * (pts[i] - pc).transpose();
    }
    if (landmark_condition(m).ok) return m;
  }
}

struct Checker {
  std::vector<CheckResult> results;
  void record(const std::string& name, bool pass, double worst) {
    std::ostringstream os;
    os << "worst deviation " << worst;
    results.push_back(CheckResult{name, pass, os.str()});
  }
};

void check_skew_vex(Checker& c) {
  std::mt19937_64 rng(11);
  double worst = 0;
  bool ok = true;
  for (int i = 0; i < 100; ++i) {
    const V3 x = rand_vec(rng, 3.0);
    const V3 y = rand_vec(rng, 3.0);
    worst = std::max(worst, (skew(x) * y - x.cross(y)).norm());
    worst = std::max(worst, (vex(skew(x)) - x).norm());
    const M3 m = skew(x) + 0.3 * rand_vec(rng).asDiagonal().toDenseMatrix();
    const M3 p = antisym_project(m);
    worst = std::max(worst, (antisym_project(p) - p).norm());
    worst = std::max(worst, (upsilon(m) - vex(p)).norm());
  }
  ok = worst < 1e-12;
  bool rejected = false;
  try {
    M3 m = skew(V3(1, 2, 3));
    m(0, 1) += 1e-3;
    vex(m);
  } catch (const std::invalid_argument&) {
    rejected = true;
  }
  c.record("skew/vex round trips and projection idempotence", ok && rejected, worst);
}

void check_group_axioms(Checker& c) {
  std::mt19937_64 rng(12);
  double worst = 0;
  for (int i = 0; i < 100; ++i) {
    NavState<double> a{rand_rotation(rng), rand_vec(rng, 5.0), rand_vec(rng, 2.0)};
    NavState<double> b{rand_rotation(rng), rand_vec(rng, 5.0), rand_vec(rng, 2.0)};
    const M5 prod = a.to_matrix() * b.to_matrix();
    worst = std::max(worst, (nav_compose(a, b).to_matrix() - prod).norm());
    const M5 inv = nav_inverse(a).to_matrix() * a.to_matrix();
    worst = std::max(worst, (inv - M5::Identity()).norm());
    worst = std::max(worst,
                     (nav_compose(a, nav_inverse(a)).to_matrix() - M5::Identity()).norm());
  }
  c.record("SE2(3) group axioms against the dense 5x5 oracle", worst < 1e-12, worst);
}

void check_attitude_distance(Checker& c) {
  std::mt19937_64 rng(13);
  double worst = 0;
  bool in_range = true;
  for (int i = 0; i < 200; ++i) {
    const M3 r = rand_rotation(rng, M_PI);
    const double d = attitude_distance(r);
    const double frob = (M3::Identity() - r).squaredNorm() / 8.0;
    worst = std::max(worst, std::abs(d - frob));
    in_range = in_range && d >= -1e-12 && d <= 1.0 + 1e-12;
  }
  c.record("attitude distance equals |I-R|_F^2 / 8 and stays in [0,1]",
           worst < 1e-9 && in_range, worst);
}

void check_exp(Checker& c) {
  std::mt19937_64 rng(14);
  double worst = 0;
  // nilpotent hand cases
  {
    const double dt = 0.25;
    M5 e = exp_um(TangentElement<double>{V3::Zero(), V3::Zero(), V3::Zero(), 1.0}, dt);
    M5 want = M5::Identity();
    want(4, 3) = dt;
    worst = std::max(worst, (e - want).norm());

    const V3 a(1.0, -2.0, 0.5);
    e = exp_um(TangentElement<double>{V3::Zero(), V3::Zero(), a, 1.0}, dt);
    want = M5::Identity();
    want.block<3, 1>(0, 4) = a * dt;
    want.block<3, 1>(0, 3) = a * dt * dt / 2.0;
    want(4, 3) = dt;
    worst = std::max(worst, (e - want).norm());
  }
  // semigroup property
  std::uniform_real_distribution<double> u(0.0, 0.1);
  for (int i = 0; i < 50; ++i) {
    TangentElement<double> t{rand_vec(rng, 2.0), rand_vec(rng, 2.0), rand_vec(rng, 2.0), 1.0};
    const double s1 = u(rng), s2 = u(rng);
    const M5 lhs = exp_um(t, s1 + s2);
    const M5 rhs = exp_um(t, s1) * exp_um(t, s2);
    worst = std::max(worst, (lhs - rhs).norm());
  }
  // rotation block against Rodrigues
  for (int i = 0; i < 50; ++i) {
    const V3 w = rand_vec(rng, 2.0);
    const M5 e = exp_um(TangentElement<double>{w, V3::Zero(), V3::Zero(), 0.0}, 1.0);
    worst = std::max(worst, (e.block<3, 3>(0, 0) - so3_exp(w)).norm());
  }
  c.record("5x5 exponential: nilpotent cases, semigroup, Rodrigues block", worst < 1e-10, worst);
}

void check_attitude_signal_bounds(Checker& c) {
  std::mt19937_64 rng(15);
  double worst = 0;  // most negative slack
  bool ok = true;
  for (int i = 0; i < 1000; ++i) {
    const M3 m = rand_info_matrix(rng);
    const M3 rt = rand_rotation(rng);
    const auto cond = landmark_condition(m);
    const M3 mr = m * rt;
    const double dist = 0.25 * (m.trace() - mr.trace());
    const double ups2 = upsilon(mr).squaredNorm();
    const double lo = 0.5 * cond.lambda_min * (1.0 + rt.trace()) * dist;
    const double hi = 2.0 * cond.lambda_max * dist;
    const double slack_lo = ups2 - lo;
    const double slack_hi = hi - ups2;
    const double tol = 1e-9 * (1.0 + std::abs(hi));
    ok = ok && slack_lo >= -tol && slack_hi >= -tol;
    worst = std::min({worst, slack_lo, slack_hi});
  }
  c.record("attitude-signal eigenvalue bounds on 1000 random (M, Rtilde)", ok, worst);
}

void check_ppf(Checker& c) {
  std::mt19937_64 rng(16);
  std::uniform_real_distribution<double> ud(0.5, 3.0);
  std::uniform_real_distribution<double> ux(0.05, 2.0);
  std::uniform_real_distribution<double> uf(-0.9, 0.9);
  double worst = 0;
  bool ok = true;
  for (int i = 0; i < 500; ++i) {
    V4 delta, xi, e, eps;
    for (int j = 0; j < 4; ++j) {
      delta[j] = ud(rng);
      xi[j] = ux(rng);
      e[j] = uf(rng) * delta[j] * xi[j];
      eps[j] = 0.01 * delta[j] * xi[j];
    }
    const PpfEval<double> ev = transform(e, xi, delta, eps);
    for (int j = 0; j < 4; ++j) {
      ok = ok && !ev.inflated[j];
      // inversion through the smooth map recovers e/xi
      const double back = smooth_map(ev.E[j], delta[j]) * xi[j];
      worst = std::max(worst, std::abs(back - e[j]));
      // sign preservation
      ok = ok && ((e[j] == 0.0 && ev.E[j] == 0.0) || e[j] * ev.E[j] > 0.0);
      // sensitivity matches the numeric derivative
      const double h = 1e-6 * xi[j] * delta[j];
      V4 ep = e, em = e;
      ep[j] += h;
      em[j] -= h;
      const double fd =
          (transform(ep, xi, delta, eps).E[j] - transform(em, xi, delta, eps).E[j]) / (2 * h);
      const double rel = std::abs(ev.Delta[j] - fd) / std::abs(fd);
      ok = ok && rel < 1e-6;
    }
  }
  c.record("envelope transform: inversion, sign, derivative (500 random)", ok && worst < 1e-12,
           worst);
}

void check_quaternions(Checker& c) {
  std::mt19937_64 rng(17);
  double worst = 0;
  for (int i = 0; i < 200; ++i) {
    const M3 r1 = rand_rotation(rng, M_PI);
    const M3 r2 = rand_rotation(rng, M_PI);
    const Quat<double> q1 = rot_to_quat(r1);
    const Quat<double> q2 = rot_to_quat(r2);
    worst = std::max(worst, (quat_to_rot(q1) - r1).norm());
    worst = std::max(worst, (quat_to_rot(quat_mul(q1, q2)) - r1 * r2).norm());
    worst = std::max(worst, (quat_to_rot<double>(Quat<double>(-q1)) - r1).norm());
  }
  c.record("quaternion round trip, double cover, product homomorphism (200 random)",
           worst < 1e-9, worst);
}

void check_aggregation_identities(Checker& c) {
  std::mt19937_64 rng(18);
  double worst = 0;
  for (int i = 0; i < 100; ++i) {
    std::vector<Feature<double>> feats;
    const int n = 5 + static_cast<int>(rng() % 10);
    for (int j = 0; j < n; ++j) feats.push_back(Feature<double>{j, rand_vec(rng, 4.0)});
    NavState<double> truth{rand_rotation(rng), rand_vec(rng, 5.0), rand_vec(rng, 2.0)};
    NavState<double> est{rand_rotation(rng), rand_vec(rng, 5.0), rand_vec(rng, 2.0)};
    std::mt19937_64 tmp(1);
    const auto obs = observe_features(truth, feats, 0.0, tmp);
    const auto agg = aggregate(feats, obs, est.R, est.P);
    const M3 rt = truth.R * est.R.transpose();
    const V3 pt = truth.P - rt * est.P;
    worst = std::max(worst, (agg.MRt - agg.M * rt).norm());
    const V3 pe = pt - (M3::Identity() - rt) * agg.p_c;
    worst = std::max(worst, (agg.RtPe - rt.transpose() * pe).norm());
    // the error vector built from the aggregates matches the direct forms
    const V4 e = error_vector(agg);
    worst = std::max(worst, std::abs(e[0] - 0.25 * (agg.M * (M3::Identity() - rt)).trace()));
  }
  c.record("aggregation identities MRt = M Rtilde, RtPe = Rt^T Pe (100 random poses)",
           worst < 1e-10, worst);
}

}  // namespace

std::vector<CheckResult> run_selfchecks() {
  Checker c;
  check_skew_vex(c);
  check_group_axioms(c);
  check_attitude_distance(c);
  check_exp(c);
  check_attitude_signal_bounds(c);
  check_ppf(c);
  check_quaternions(c);
  check_aggregation_identities(c);
  return c.results;
}

}  // namespace senav
