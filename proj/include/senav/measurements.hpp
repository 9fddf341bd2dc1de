#pragma once

// Landmark observation model, aggregation of weighted vector measurements
// into the filter's summary statistics, IMU noise model and synthetic
// ground-truth trajectories.

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <random>
#include <stdexcept>
#include <type_traits>
#include <unordered_map>
#include <vector>

#include "senav/errors.hpp"
#include "senav/lie.hpp"

namespace senav {

template <typename S>
Vec3<S> gravity() {
  return Vec3<S>(S(0), S(0), S(-9.81));
}

template <typename S>
struct Feature {
  int id = 0;
  Vec3<S> p = Vec3<S>::Zero();  // inertial-frame position, m
};

template <typename S>
struct FeatureObservation {
  int id = 0;
  Vec3<S> y = Vec3<S>::Zero();  // body-frame measurement, m
  S s = S(1);                   // confidence weight, > 0
};

/// Weighted summary of one frame of landmark observations:
///   p_c  = (1/s_T) sum s_i p_i
///   M    = sum s_i (p_i - p_c)(p_i - p_c)^T
///   MRt  = sum s_i (p_i - p_c) y_i^T Rhat^T        (equals M Rtilde noise-free)
///   RtPe = (1/s_T) sum s_i (p_i - Rhat y_i - Phat) (equals Rtilde^T Ptilde_eps)
template <typename S>
struct Aggregates {
  Vec3<S> p_c = Vec3<S>::Zero();
  S s_T = S(0);
  Mat3<S> M = Mat3<S>::Zero();
  Mat3<S> MRt = Mat3<S>::Zero();
  Vec3<S> RtPe = Vec3<S>::Zero();
};

template <typename S>
struct ImuSample {
  S t = S(0);
  Vec3<S> omega = Vec3<S>::Zero();  // rad/s
  Vec3<S> accel = Vec3<S>::Zero();  // m/s^2, apparent (non-gravitational)
};

template <typename S>
struct NoiseSpec {
  S std_omega = S(0.11);
  S std_accel = S(0.1);
  S std_feature = S(0.01);
  std::uint64_t seed = 1;
};

template <typename S>
struct TruthPoint {
  S t = S(0);
  NavState<S> X;
  Vec3<S> omega = Vec3<S>::Zero();  // body angular velocity
  Vec3<S> accel = Vec3<S>::Zero();  // apparent acceleration, R^T (Vdot - g)
};

// ---------------------------------------------------------------------------
// Observation and noise models

template <typename S>
Vec3<S> gauss3(std::mt19937_64& rng, S stddev) {
  std::normal_distribution<S> n(S(0), S(1));
  Vec3<S> v;
  // draw componentwise so the stream layout is fixed
  v.x() = n(rng);
  v.y() = n(rng);
  v.z() = n(rng);
  return v * stddev;
}

/// y_i = R^T (p_i - P) + n_i, unit confidence weights.
template <typename S>
std::vector<FeatureObservation<S>> observe_features(const NavState<S>& x,
                                                    const std::vector<Feature<S>>& features,
                                                    S std_feature,
                                                    std::mt19937_64& rng) {
  if (features.empty()) {
    throw std::invalid_argument("observe_features: no features");
  }
  std::vector<FeatureObservation<S>> out;
  out.reserve(features.size());
  for (const auto& f : features) {
    Vec3<S> y = x.R.transpose() * (f.p - x.P);
    if (std_feature > S(0)) y += gauss3<S>(rng, std_feature);
    out.push_back(FeatureObservation<S>{f.id, y, S(1)});
  }
  return out;
}

/// Convenience overload seeding a fresh generator from the noise seed.
template <typename S>
std::vector<FeatureObservation<S>> observe_features(const NavState<S>& x,
                                                    const std::vector<Feature<S>>& features,
                                                    const NoiseSpec<S>& noise) {
  std::mt19937_64 rng(noise.seed);
  return observe_features(x, features, noise.std_feature, rng);
}

template <typename S>
ImuSample<S> imu_sample(const TruthPoint<S>& truth, const NoiseSpec<S>& noise,
                        std::mt19937_64& rng) {
  ImuSample<S> m{truth.t, truth.omega, truth.accel};
  if (noise.std_omega > S(0)) m.omega += gauss3<S>(rng, noise.std_omega);
  if (noise.std_accel > S(0)) m.accel += gauss3<S>(rng, noise.std_accel);
  return m;
}

// ---------------------------------------------------------------------------
// Aggregation

template <typename S>
struct LandmarkCondition {
  S lambda_min = S(0);  // smallest eigenvalue of Mbar = Tr{M} I - M
  S lambda_max = S(0);
  bool ok = false;
};

/// Assumption check: Mbar = Tr{M} I - M must be positive definite, which
/// holds when at least two eigenvalues of M are positive (>= 3 noncollinear
/// features).
template <typename S>
LandmarkCondition<S> landmark_condition(const Mat3<S>& m) {
  Mat3<S> mbar = m.trace() * Mat3<S>::Identity() - m;
  Eigen::SelfAdjointEigenSolver<Mat3<S>> es(mbar);
  LandmarkCondition<S> c;
  c.lambda_min = es.eigenvalues()(0);
  c.lambda_max = es.eigenvalues()(2);
  c.ok = c.lambda_min > S(1e-9);
  return c;
}

/// Sums the weighted vector measurements of one frame against the current
/// estimate. Observations are matched to features by id; unmatched
/// observations are ignored. Returns nullopt when fewer than three
/// observations match or the matched geometry is degenerate.
template <typename S>
std::optional<Aggregates<S>> try_aggregate(const std::vector<Feature<S>>& features,
                                           const std::vector<FeatureObservation<S>>& observations,
                                           const std::type_identity_t<Mat3<S>>& r_hat,
                                           const std::type_identity_t<Vec3<S>>& p_hat) {
  std::unordered_map<int, const Feature<S>*> by_id;
  by_id.reserve(features.size());
  for (const auto& f : features) by_id.emplace(f.id, &f);

  Aggregates<S> agg;
  Vec3<S> wsum = Vec3<S>::Zero();
  int matched = 0;
  for (const auto& ob : observations) {
    auto it = by_id.find(ob.id);
    if (it == by_id.end()) continue;
    if (!(ob.s > S(0))) throw std::invalid_argument("aggregate: weight must be > 0");
    agg.s_T += ob.s;
    wsum += ob.s * it->second->p;
    ++matched;
  }
  if (matched < 3) return std::nullopt;
  agg.p_c = wsum / agg.s_T;

  for (const auto& ob : observations) {
    auto it = by_id.find(ob.id);
    if (it == by_id.end()) continue;
    const Vec3<S> d = it->second->p - agg.p_c;
    agg.M += ob.s * d * d.transpose();
    agg.MRt += ob.s * d * (r_hat * ob.y).transpose();
    agg.RtPe += ob.s * (it->second->p - r_hat * ob.y - p_hat);
  }
  agg.RtPe /= agg.s_T;

  if (!landmark_condition(agg.M).ok) return std::nullopt;
  return agg;
}

/// Throwing form of try_aggregate for callers that consider a bad frame
/// a hard error.
template <typename S>
Aggregates<S> aggregate(const std::vector<Feature<S>>& features,
                        const std::vector<FeatureObservation<S>>& observations,
                        const std::type_identity_t<Mat3<S>>& r_hat,
                        const std::type_identity_t<Vec3<S>>& p_hat) {
  auto agg = try_aggregate(features, observations, r_hat, p_hat);
  if (!agg) {
    throw std::invalid_argument(
        "aggregate: need at least 3 matched, noncollinear observations");
  }
  return *agg;
}

/// Uniformly samples `count` landmarks in an axis-aligned cube.
template <typename S>
std::vector<Feature<S>> make_landmarks(int count, const Vec3<S>& center, S box_side,
                                       std::mt19937_64& rng) {
  std::uniform_real_distribution<S> u(S(-0.5), S(0.5));
  std::vector<Feature<S>> out;
  out.reserve(count);
  for (int i = 0; i < count; ++i) {
    Vec3<S> p;
    p.x() = u(rng);
    p.y() = u(rng);
    p.z() = u(rng);
    out.push_back(Feature<S>{i, center + box_side * p});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Synthetic trajectories
//
// Closed-form profiles satisfying Rdot = R [omega]x, Pdot = V,
// Vdot = R a + g exactly; a is recovered as R^T (Vdot - g).

enum class ProfileKind { Hover, Circle, Figure8 };

template <typename S>
struct TrajectoryProfile {
  ProfileKind kind = ProfileKind::Circle;
  Vec3<S> center = Vec3<S>(S(2), S(-2), S(3));
  S radius = S(5);
  S omega = S(0.3);       // planar angular rate, rad/s
  S phase0 = S(0.7);      // initial phase of the planar motion
  S yaw0 = S(2.0);        // initial yaw of the body
  S yaw_rate = S(0.3);    // rad/s (0 for hover)
  Vec3<S> tilt = Vec3<S>(S(0.35), S(-0.25), S(0));  // constant attitude offset, rotation vector
  S amp2 = S(2.5);        // figure8 second-axis amplitude
  S amp_z = S(0.5);       // figure8 vertical amplitude
};

template <typename S>
TruthPoint<S> synth_trajectory(S t, const TrajectoryProfile<S>& pr) {
  TruthPoint<S> tp;
  tp.t = t;
  const Mat3<S> r_tilt = so3_exp(pr.tilt);
  Vec3<S> p, v, vdot;
  S yaw_rate = pr.yaw_rate;
  switch (pr.kind) {
    case ProfileKind::Hover: {
      p = pr.center;
      v.setZero();
      vdot.setZero();
      yaw_rate = S(0);
      break;
    }
    case ProfileKind::Circle: {
      const S th = pr.omega * t + pr.phase0;
      const S c = std::cos(th), s = std::sin(th);
      p = pr.center + pr.radius * Vec3<S>(c, s, S(0));
      v = pr.radius * pr.omega * Vec3<S>(-s, c, S(0));
      vdot = -pr.radius * pr.omega * pr.omega * Vec3<S>(c, s, S(0));
      break;
    }
    case ProfileKind::Figure8: {
      const S th = pr.omega * t + pr.phase0;
      const S w = pr.omega;
      p = pr.center + Vec3<S>(pr.radius * std::sin(th),
                              pr.amp2 * std::sin(th) * std::cos(th),
                              pr.amp_z * std::sin(th));
      v = Vec3<S>(pr.radius * w * std::cos(th),
                  pr.amp2 * w * std::cos(S(2) * th),
                  pr.amp_z * w * std::cos(th));
      vdot = Vec3<S>(-pr.radius * w * w * std::sin(th),
                     S(-2) * pr.amp2 * w * w * std::sin(S(2) * th),
                     -pr.amp_z * w * w * std::sin(th));
      break;
    }
    default:
      throw config_error("synth_trajectory: unknown profile");
  }
  const Mat3<S> r = rot_z(pr.yaw0 + yaw_rate * t) * r_tilt;
  tp.X = NavState<S>{r, p, v};
  // R = Rz(yaw) * Rtilt gives body rate omega = yaw_rate * Rtilt^T e_z
  tp.omega = yaw_rate * (r_tilt.transpose() * Vec3<S>(S(0), S(0), S(1)));
  tp.accel = r.transpose() * (vdot - gravity<S>());
  return tp;
}

}  // namespace senav
