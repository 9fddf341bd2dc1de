#pragma once

// Prescribed performance envelopes and the constrained-to-unconstrained
// error transformation with its sensitivity.

#include <Eigen/Dense>

#include <array>
#include <cmath>

#include "senav/errors.hpp"
#include "senav/lie.hpp"

namespace senav {

/// Envelope schedule xi_i(t) = (xi0_i - xi_inf_i) exp(-ell_i t) + xi_inf_i
/// plus the transform bounds delta_i.
template <typename S>
struct PpfConfig {
  Vec4<S> xi0 = Vec4<S>(S(1.03), S(2), S(2), S(2));
  Vec4<S> xi_inf = Vec4<S>(S(0.03), S(0.1), S(0.1), S(0.1));
  Vec4<S> ell = Vec4<S>::Ones();
  Vec4<S> delta = Vec4<S>(S(1.03), S(2), S(2), S(2));

  void validate() const {
    for (int i = 0; i < 4; ++i) {
      if (!(xi0[i] > xi_inf[i]) || !(xi_inf[i] > S(0))) {
        throw config_error("ppf: requires xi0 > xi_inf > 0 componentwise");
      }
      if (!(ell[i] > S(0)) || !(delta[i] > S(0))) {
        throw config_error("ppf: requires ell > 0 and delta > 0 componentwise");
      }
    }
  }

  /// Guard inflation constant, 0.01 * delta_i * xi_inf_i.
  Vec4<S> inflation() const { return S(0.01) * delta.cwiseProduct(xi_inf); }
};

template <typename S>
struct PpfEval {
  Vec4<S> xi = Vec4<S>::Ones();     // envelope values after the guard
  Vec4<S> E = Vec4<S>::Zero();      // transformed (unconstrained) errors
  Vec4<S> Delta = Vec4<S>::Zero();  // sensitivities dE_i/de_i
  std::array<bool, 4> inflated{};

  S E_R() const { return E[0]; }
  Vec3<S> E_P() const { return E.template tail<3>(); }
  S Delta_R() const { return Delta[0]; }
  Mat3<S> Delta_P() const { return Vec3<S>(Delta.template tail<3>()).asDiagonal(); }
};

template <typename S>
Vec4<S> xi_at(const PpfConfig<S>& cfg, S t) {
  return (cfg.xi0 - cfg.xi_inf).cwiseProduct((-cfg.ell * t).array().exp().matrix()) + cfg.xi_inf;
}

/// Log-ratio transform
///   E_i = (1/2) ln[(delta_i + e_i/xi_i) / (delta_i - e_i/xi_i)]
///   Delta_i = (1/(2 xi_i)) [1/(delta_i + e_i/xi_i) + 1/(delta_i - e_i/xi_i)]
/// Discrete-time guard: whenever |e_i| >= delta_i xi_i the envelope value is
/// inflated to |e_i|/delta_i + eps_i so the transform stays defined.
template <typename S>
PpfEval<S> transform(const Vec4<S>& e, const Vec4<S>& xi, const Vec4<S>& delta,
                     const Vec4<S>& eps_inflate) {
  if (!e.allFinite()) {
    throw std::invalid_argument("ppf transform: non-finite error vector");
  }
  PpfEval<S> out;
  out.xi = xi;
  for (int i = 0; i < 4; ++i) {
    if (std::abs(e[i]) / out.xi[i] >= delta[i]) {
      out.xi[i] = std::abs(e[i]) / delta[i] + eps_inflate[i];
      out.inflated[i] = true;
    }
    const S z = e[i] / out.xi[i];
    out.E[i] = S(0.5) * std::log((delta[i] + z) / (delta[i] - z));
    out.Delta[i] = (S(1) / (S(2) * out.xi[i])) * (S(1) / (delta[i] + z) + S(1) / (delta[i] - z));
  }
  return out;
}

/// The smooth bijection delta * tanh(E) the transform inverts.
template <typename S>
S smooth_map(S E, S delta) {
  return delta * std::tanh(E);
}

}  // namespace senav
