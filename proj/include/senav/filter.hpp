#pragma once

// Nonlinear stochastic navigation filter on SE2(3): correction terms with
// adaptive noise-bound estimation, the discrete predict/update cycle, and
// the equivalent quaternion-form filter.

#include <Eigen/Dense>

#include <cmath>
#include <optional>
#include <type_traits>
#include <vector>

#include "senav/errors.hpp"
#include "senav/lie.hpp"
#include "senav/measurements.hpp"
#include "senav/ppf.hpp"

namespace senav {

template <typename S>
struct FilterGains {
  S k_w = S(3);
  S k_v = S(3);
  S k_a = S(20);
  S gamma_sigma = S(3);
  S k_sigma = S(0.1);
  S mu = S(0.8);
  S eps = S(0.8);
  S ell_P = S(20);

  void validate() const {
    const S g[] = {k_w, k_v, k_a, gamma_sigma, k_sigma, mu, eps, ell_P};
    for (S v : g) {
      if (!(v > S(0))) throw config_error("gains: all filter gains must be > 0");
    }
  }
};

template <typename S>
struct FilterState {
  NavState<S> X;
  Vec3<S> sigma = Vec3<S>::Zero();  // adaptive estimate of the noise bound
};

/// w_a follows the detailed continuous form and therefore contains the
/// constant -g term; it vanishes to exactly -g at zero error.
template <typename S>
struct CorrectionTerms {
  Vec3<S> w_omega = Vec3<S>::Zero();
  Vec3<S> w_v = Vec3<S>::Zero();
  Vec3<S> w_a = Vec3<S>::Zero();
  S k_R = S(0);
};

/// e = [ |M Rtilde|_I , (Rtilde^T Ptilde_eps)^T ]; the first entry is
/// Tr{M - MRt}/4 and is nonnegative for noise-free measurements.
template <typename S>
Vec4<S> error_vector(const Aggregates<S>& agg) {
  Vec4<S> e;
  e[0] = (agg.M.trace() - agg.MRt.trace()) / S(4);
  e.template tail<3>() = agg.RtPe;
  return e;
}

template <typename S>
CorrectionTerms<S> corrections(const Aggregates<S>& agg, const PpfEval<S>& ppf,
                               const std::type_identity_t<Vec3<S>>& sigma_hat,
                               const std::type_identity_t<Mat3<S>>& r_hat,
                               const FilterGains<S>& gains,
                               const Vec3<S>& g = gravity<S>()) {
  const Vec3<S> ups = upsilon(agg.MRt);
  const S d1 = (agg.M.trace() - agg.MRt.trace()) / S(4);
  const S dR = ppf.Delta_R();
  const S eR = ppf.E_R();
  const Mat3<S> dP = ppf.Delta_P();
  const Vec3<S> eP = ppf.E_P();

  CorrectionTerms<S> w;
  w.w_omega = -gains.k_w * (dR * eR + S(1)) * ups -
              (dR / S(4)) * ((d1 + S(2)) / (d1 + S(1))) *
                  (r_hat * Vec3<S>((r_hat.transpose() * ups).cwiseProduct(sigma_hat)));
  w.w_v = agg.p_c.cross(w.w_omega) - (gains.k_v / gains.eps) * (dP * eP) -
          gains.ell_P * agg.RtPe;
  w.w_a = -g - gains.k_a * (((gains.k_v / gains.mu) * dP + Mat3<S>::Identity()) * (dP * eP));
  w.k_R = gains.gamma_sigma * ((d1 + S(2)) / S(8)) * dR * dR * std::exp(eR);
  return w;
}

/// Explicit Euler step of the adaptation law: the drive is the
/// componentwise square of Rhat^T Upsilon scaled by k_R, the leak is
/// proportional to sigma itself.
template <typename S>
Vec3<S> sigma_update(const std::type_identity_t<Vec3<S>>& sigma_hat, S k_R,
                     const std::type_identity_t<Mat3<S>>& r_hat,
                     const std::type_identity_t<Vec3<S>>& ups, const FilterGains<S>& gains,
                     S dt) {
  const Vec3<S> rv = r_hat.transpose() * ups;
  return sigma_hat + dt * (k_R * rv.cwiseProduct(rv) - gains.k_sigma * gains.gamma_sigma * sigma_hat);
}

/// Right-translation by the measured tangent element,
/// Xhat <- Xhat exp(u([omega_m]x, 0, a_m, 1) dt), rotation reprojected.
/// Gravity-free: the full dead-reckoning flow is in propagate().
template <typename S>
NavState<S> predict(const NavState<S>& x, const ImuSample<S>& imu, S dt) {
  const Mat5<S> f = exp_um(TangentElement<S>{imu.omega, Vec3<S>::Zero(), imu.accel, S(1)}, dt);
  Mat5<S> y = x.to_matrix() * f;
  y.template block<2, 5>(3, 0) = Mat5<S>::Identity().template block<2, 5>(3, 0);
  NavState<S> out = NavState<S>::from_matrix(y);
  out.R = reorthonormalize(out.R);
  return out;
}

/// Discrete flow of the true dynamics Xdot = X U - G X over one sample,
///   Xhat <- exp(-G dt) Xhat exp(U_m dt),  G = u(0, 0, -g, 1).
/// Exact for piecewise-constant inputs; the kappa entries of the two
/// factors cancel so the product is again a NavState embedding.
template <typename S>
NavState<S> propagate(const NavState<S>& x, const ImuSample<S>& imu, S dt,
                      const Vec3<S>& g = gravity<S>()) {
  const Mat5<S> f = exp_um(TangentElement<S>{imu.omega, Vec3<S>::Zero(), imu.accel, S(1)}, dt);
  const Mat5<S> gf = exp_um(TangentElement<S>{Vec3<S>::Zero(), Vec3<S>::Zero(), -g, S(1)}, -dt);
  NavState<S> out = NavState<S>::from_matrix(Mat5<S>(gf * x.to_matrix() * f));
  out.R = reorthonormalize(out.R);
  return out;
}

/// Left-translation by the correction flow,
/// Xhat <- exp(-u([w_omega]x, w_v, w_a, 0) dt) Xhat, rotation reprojected.
template <typename S>
NavState<S> update(const NavState<S>& x, const CorrectionTerms<S>& w, S dt) {
  const Mat5<S> b = exp_um(-TangentElement<S>{w.w_omega, w.w_v, w.w_a, S(0)}, dt);
  NavState<S> out = NavState<S>::from_matrix(Mat5<S>(b * x.to_matrix()));
  out.R = reorthonormalize(out.R);
  return out;
}

template <typename S>
struct ObservationFrame {
  S t = S(0);
  std::vector<FeatureObservation<S>> observations;
};

template <typename S>
struct StepDiagnostics {
  bool updated = false;       // a frame was consumed this step
  Vec4<S> e = Vec4<S>::Zero();
  PpfEval<S> ppf;
  CorrectionTerms<S> w;
};

template <typename S>
struct StepResult {
  FilterState<S> state;
  StepDiagnostics<S> diag;
};

namespace detail {
template <typename S>
void check_divergence(const Vec4<S>& e) {
  if (e.template lpNorm<Eigen::Infinity>() > S(1e3)) {
    throw divergence_error("filter step: error vector exceeded 1e3");
  }
}
}  // namespace detail

/// One cycle t -> t + dt. Dead-reckons through the true-dynamics flow,
/// then, when a frame is present and the landmark geometry is usable,
/// aggregates, transforms the error through the envelope, applies the
/// correction flow and advances sigma. Frames with fewer than three
/// matched observations or a degenerate geometry are skipped (prediction
/// only, sigma frozen), as are steps without a frame.
template <typename S>
StepResult<S> step(const FilterState<S>& state, const ImuSample<S>& imu,
                   const std::type_identity_t<std::optional<ObservationFrame<S>>>& frame,
                   const std::vector<Feature<S>>& features,
                   const PpfConfig<S>& ppf_cfg, const FilterGains<S>& gains,
                   S t, S dt, const Vec3<S>& g = gravity<S>()) {
  StepResult<S> out;
  NavState<S> xp = propagate(state.X, imu, dt, g);

  std::optional<Aggregates<S>> agg;
  if (frame.has_value()) {
    agg = try_aggregate(features, frame->observations, xp.R, xp.P);
  }
  if (!agg) {
    out.state = FilterState<S>{xp, state.sigma};
    return out;
  }

  const Vec4<S> e = error_vector(*agg);
  detail::check_divergence(e);
  const PpfEval<S> ppf = transform(e, xi_at(ppf_cfg, S(t + dt)), ppf_cfg.delta, ppf_cfg.inflation());
  const CorrectionTerms<S> w = corrections(*agg, ppf, state.sigma, xp.R, gains, g);
  const Vec3<S> sigma = sigma_update(state.sigma, w.k_R, xp.R, upsilon(agg->MRt), gains, dt);

  // propagate() already integrated gravity, so the correction flow carries
  // only the error-driven part of w_a
  CorrectionTerms<S> wc = w;
  wc.w_a = w.w_a + g;
  out.state = FilterState<S>{update(xp, wc, dt), sigma};
  out.diag = StepDiagnostics<S>{true, e, ppf, w};
  return out;
}

// ---------------------------------------------------------------------------
// Quaternion-form filter

template <typename S>
struct QuatFilterState {
  Quat<S> q = quat_identity<S>();
  Vec3<S> P = Vec3<S>::Zero();
  Vec3<S> V = Vec3<S>::Zero();
  Vec3<S> sigma = Vec3<S>::Zero();
};

template <typename S>
struct QuatStepResult {
  QuatFilterState<S> state;
  StepDiagnostics<S> diag;
};

/// Same cycle as step() with the attitude carried as a unit quaternion:
/// the prediction right-multiplies exp of the body rate, the correction
/// left-multiplies exp of -w_omega (both through the quaternion
/// exponential), and P, V, sigma follow the matrix-form equations with
/// R(q) substituted for Rhat. The quaternion is renormalized every step.
template <typename S>
QuatStepResult<S> quat_step(const QuatFilterState<S>& qs, const ImuSample<S>& imu,
                            const std::type_identity_t<std::optional<ObservationFrame<S>>>& frame,
                            const std::vector<Feature<S>>& features,
                            const PpfConfig<S>& ppf_cfg, const FilterGains<S>& gains,
                            S t, S dt, const Vec3<S>& g = gravity<S>()) {
  const Mat3<S> r = quat_to_rot(qs.q, S(1e-9));
  FilterState<S> ms{NavState<S>{r, qs.P, qs.V}, qs.sigma};
  StepResult<S> res = step(ms, imu, frame, features, ppf_cfg, gains, t, dt, g);

  Quat<S> q = quat_mul(qs.q, quat_exp<S>(Vec3<S>(imu.omega * dt)));
  if (res.diag.updated) {
    q = quat_mul(quat_exp<S>(Vec3<S>(-res.diag.w.w_omega * dt)), q);
  }
  q = quat_normalize(q);

  QuatStepResult<S> out;
  out.state = QuatFilterState<S>{q, res.state.X.P, res.state.X.V, res.state.sigma};
  out.diag = res.diag;
  return out;
}

// ---------------------------------------------------------------------------
// Continuous form (cross-check integrator support)

template <typename S>
struct ContinuousDerivatives {
  Mat3<S> Rdot = Mat3<S>::Zero();
  Vec3<S> Pdot = Vec3<S>::Zero();
  Vec3<S> Vdot = Vec3<S>::Zero();
  Vec3<S> sigmadot = Vec3<S>::Zero();
};

/// Right-hand side of the continuous filter with measured inputs
/// substituted for the true ones:
///   Rdot = R [omega_m]x - [w_omega]x R
///   Pdot = V - [w_omega]x P - w_v
///   Vdot = R a_m - [w_omega]x V - w_a     (w_a contains -g)
///   sigmadot = k_R diag(R^T Y) R^T Y - k_sigma gamma_sigma sigma
template <typename S>
ContinuousDerivatives<S> continuous_rhs(const FilterState<S>& state, const ImuSample<S>& imu,
                                        const Aggregates<S>& agg, const PpfEval<S>& ppf,
                                        const FilterGains<S>& gains,
                                        const Vec3<S>& g = gravity<S>()) {
  const CorrectionTerms<S> w = corrections(agg, ppf, state.sigma, state.X.R, gains, g);
  const Mat3<S> wx = skew(w.w_omega);
  ContinuousDerivatives<S> d;
  d.Rdot = state.X.R * skew(imu.omega) - wx * state.X.R;
  d.Pdot = state.X.V - wx * state.X.P - w.w_v;
  d.Vdot = state.X.R * imu.accel - wx * state.X.V - w.w_a;
  const Vec3<S> rv = state.X.R.transpose() * upsilon(agg.MRt);
  d.sigmadot = w.k_R * rv.cwiseProduct(rv) - gains.k_sigma * gains.gamma_sigma * state.sigma;
  return d;
}

}  // namespace senav
