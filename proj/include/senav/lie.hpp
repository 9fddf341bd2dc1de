#pragma once

// Group-theoretic primitives for SO(3), the extended pose group SE2(3)
// (rotation + position + velocity packed in a 5x5 homogeneous matrix) and
// its driving tangent structure, plus quaternion interconversion.

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <stdexcept>

#include "senav/errors.hpp"

namespace senav {

template <typename S> using Vec3 = Eigen::Matrix<S, 3, 1>;
template <typename S> using Vec4 = Eigen::Matrix<S, 4, 1>;
template <typename S> using Mat3 = Eigen::Matrix<S, 3, 3>;
template <typename S> using Mat5 = Eigen::Matrix<S, 5, 5>;

/// Quaternion stored as [q0, q1, q2, q3] with scalar part first (Hamilton).
template <typename S> using Quat = Eigen::Matrix<S, 4, 1>;

// ---------------------------------------------------------------------------
// so(3)

/// skew(x) * y == x.cross(y)
template <typename S>
Mat3<S> skew(const Vec3<S>& x) {
  Mat3<S> m;
  m << S(0), -x.z(), x.y(),
       x.z(), S(0), -x.x(),
      -x.y(), x.x(), S(0);
  return m;
}

/// Inverse of skew. Rejects matrices that are not antisymmetric within tol.
template <typename S>
Vec3<S> vex(const Mat3<S>& m, S tol = S(1e-9)) {
  if (((m + m.transpose()) * S(0.5)).norm() > tol) {
    throw std::invalid_argument("vex: matrix is not antisymmetric");
  }
  return Vec3<S>(m(2, 1), m(0, 2), m(1, 0));
}

/// Antisymmetric part (m - m^T)/2.
template <typename S>
Mat3<S> antisym_project(const Mat3<S>& m) {
  return (m - m.transpose()) * S(0.5);
}

/// vex of the antisymmetric projection.
template <typename S>
Vec3<S> upsilon(const Mat3<S>& m) {
  // vex without the antisymmetry check; the projection guarantees it.
  const Mat3<S> a = antisym_project(m);
  return Vec3<S>(a(2, 1), a(0, 2), a(1, 0));
}

/// Normalized attitude distance Tr{I - R}/4, in [0,1] on SO(3).
template <typename S>
S attitude_distance(const Mat3<S>& r) {
  return (S(3) - r.trace()) / S(4);
}

template <typename S>
bool is_rotation(const Mat3<S>& r, S tol = S(1e-9)) {
  return (r.transpose() * r - Mat3<S>::Identity()).norm() <= tol &&
         std::abs(r.determinant() - S(1)) <= tol;
}

/// Rodrigues formula, exp of skew(w).
template <typename S>
Mat3<S> so3_exp(const Vec3<S>& w) {
  const S th = w.norm();
  if (th < S(1e-12)) {
    return Mat3<S>::Identity() + skew<S>(w);
  }
  const Mat3<S> a = skew<S>(Vec3<S>(w / th));
  return Mat3<S>::Identity() + std::sin(th) * a + (S(1) - std::cos(th)) * a * a;
}

template <typename S>
Mat3<S> rot_z(S angle) {
  return so3_exp<S>(Vec3<S>(S(0), S(0), angle));
}

/// Nearest rotation in Frobenius norm (polar projection via SVD).
/// Inputs farther than max_dist from SO(3) are rejected; in the filter loop
/// that distance signals divergence.
template <typename S>
Mat3<S> reorthonormalize(const Mat3<S>& r, S max_dist = S(0.1)) {
  Eigen::JacobiSVD<Mat3<S>> svd(r, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3<S> u = svd.matrixU();
  Mat3<S> v = svd.matrixV();
  Vec3<S> d(S(1), S(1), (u * v.transpose()).determinant());
  const Mat3<S> q = u * d.asDiagonal() * v.transpose();
  if ((r - q).norm() > max_dist) {
    throw divergence_error("reorthonormalize: input too far from SO(3)");
  }
  return q;
}

// ---------------------------------------------------------------------------
// SE2(3)

/// Rotation R, position P, velocity V; embeds as
///   [ R  P  V ]
///   [ 0  1  0 ]
///   [ 0  0  1 ]
template <typename S>
struct NavState {
  Mat3<S> R = Mat3<S>::Identity();
  Vec3<S> P = Vec3<S>::Zero();
  Vec3<S> V = Vec3<S>::Zero();

  static NavState identity() { return NavState{}; }

  Mat5<S> to_matrix() const {
    Mat5<S> x = Mat5<S>::Identity();
    x.template block<3, 3>(0, 0) = R;
    x.template block<3, 1>(0, 3) = P;
    x.template block<3, 1>(0, 4) = V;
    return x;
  }

  /// Reads the blocks back; the bottom rows must match the embedding.
  static NavState from_matrix(const Mat5<S>& x, S tol = S(1e-9)) {
    Mat5<S> bottom = Mat5<S>::Zero();
    bottom.template block<2, 5>(3, 0) = x.template block<2, 5>(3, 0);
    bottom(3, 3) -= S(1);
    bottom(4, 4) -= S(1);
    if (bottom.norm() > tol) {
      throw std::invalid_argument("NavState: bottom rows are not [0 0 0 1 0; 0 0 0 0 1]");
    }
    return NavState{x.template block<3, 3>(0, 0),
                    x.template block<3, 1>(0, 3),
                    x.template block<3, 1>(0, 4)};
  }
};

template <typename S>
NavState<S> nav_compose(const NavState<S>& a, const NavState<S>& b) {
  return NavState<S>{a.R * b.R, a.R * b.P + a.P, a.R * b.V + a.V};
}

template <typename S>
NavState<S> nav_inverse(const NavState<S>& x) {
  Mat3<S> rt = x.R.transpose();
  return NavState<S>{rt, -(rt * x.P), -(rt * x.V)};
}

/// Tangent-side element u([omega]x, v, a, kappa):
///   [ [omega]x  v  a ]
///   [    0      0  0 ]
///   [    0      k  0 ]
/// kappa couples the a-column into the P-column under the exponential.
template <typename S>
struct TangentElement {
  Vec3<S> omega = Vec3<S>::Zero();
  Vec3<S> v_slot = Vec3<S>::Zero();
  Vec3<S> a_slot = Vec3<S>::Zero();
  S kappa = S(0);

  Mat5<S> to_matrix() const {
    Mat5<S> u = Mat5<S>::Zero();
    u.template block<3, 3>(0, 0) = skew(omega);
    u.template block<3, 1>(0, 3) = v_slot;
    u.template block<3, 1>(0, 4) = a_slot;
    u(4, 3) = kappa;
    return u;
  }

  TangentElement operator-() const { return TangentElement{-omega, -v_slot, -a_slot, -kappa}; }
};

/// Dense matrix exponential by scaling-and-squaring with a Taylor series,
/// terms summed until they fall below machine precision relative to the
/// running sum. Exact (finite series) for nilpotent arguments.
template <typename S>
Mat5<S> expm(const Mat5<S>& a) {
  int squarings = 0;
  S norm = a.norm();
  Mat5<S> b = a;
  while (norm > S(0.5)) {
    b *= S(0.5);
    norm *= S(0.5);
    ++squarings;
  }
  Mat5<S> term = Mat5<S>::Identity();
  Mat5<S> sum = Mat5<S>::Identity();
  for (int k = 1; k <= 40; ++k) {
    term = Mat5<S>(term * b) / S(k);
    const S tn = term.norm();
    if (tn == S(0)) break;
    sum += term;
    if (tn <= std::numeric_limits<S>::epsilon() * sum.norm()) break;
  }
  for (int i = 0; i < squarings; ++i) {
    sum = Mat5<S>(sum * sum);
  }
  return sum;
}

/// exp of the 5x5 embedding scaled by dt. Not generally a NavState: the
/// kappa entry survives at (5,4) and is consumed by the group products of
/// the filter step.
template <typename S>
Mat5<S> exp_um(const TangentElement<S>& u, S dt) {
  return expm<S>(Mat5<S>(u.to_matrix() * dt));
}

// ---------------------------------------------------------------------------
// Quaternions (Hamilton convention, scalar first)

template <typename S>
Quat<S> quat_identity() {
  return Quat<S>(S(1), S(0), S(0), S(0));
}

template <typename S>
Quat<S> quat_mul(const Quat<S>& a, const Quat<S>& b) {
  const S aw = a[0];
  const Vec3<S> av = a.template tail<3>();
  const S bw = b[0];
  const Vec3<S> bv = b.template tail<3>();
  Quat<S> q;
  q[0] = aw * bw - av.dot(bv);
  q.template tail<3>() = aw * bv + bw * av + av.cross(bv);
  return q;
}

template <typename S>
Quat<S> quat_normalize(const Quat<S>& q) {
  return q / q.norm();
}

/// Unit quaternion of the rotation exp(skew(w)).
template <typename S>
Quat<S> quat_exp(const Vec3<S>& w) {
  const S th = w.norm();
  const S h = th / S(2);
  Quat<S> q;
  q[0] = std::cos(h);
  // sin(h)/th with the 0/0 limit 1/2
  const S k = (th < S(1e-8)) ? (S(0.5) - th * th / S(48)) : (std::sin(h) / th);
  q.template tail<3>() = k * w;
  return q;
}

/// R(Q) = (q0^2 - |q|^2) I + 2 q q^T + 2 q0 [q]x. Rejects non-unit input.
template <typename S>
Mat3<S> quat_to_rot(const Quat<S>& q, S tol = S(1e-6)) {
  if (std::abs(q.norm() - S(1)) > tol) {
    throw std::invalid_argument("quat_to_rot: quaternion is not unit");
  }
  const S w = q[0];
  const Vec3<S> v = q.template tail<3>();
  return (w * w - v.squaredNorm()) * Mat3<S>::Identity() +
         S(2) * (v * v.transpose()) + S(2) * w * skew(v);
}

/// Shepperd's method; returns the representative with q0 >= 0.
template <typename S>
Quat<S> rot_to_quat(const Mat3<S>& r) {
  Quat<S> q;
  const S tr = r.trace();
  if (tr > S(0)) {
    S s = std::sqrt(tr + S(1)) * S(2);
    q << s / S(4), (r(2, 1) - r(1, 2)) / s, (r(0, 2) - r(2, 0)) / s, (r(1, 0) - r(0, 1)) / s;
  } else if (r(0, 0) >= r(1, 1) && r(0, 0) >= r(2, 2)) {
    S s = std::sqrt(S(1) + r(0, 0) - r(1, 1) - r(2, 2)) * S(2);
    q << (r(2, 1) - r(1, 2)) / s, s / S(4), (r(0, 1) + r(1, 0)) / s, (r(0, 2) + r(2, 0)) / s;
  } else if (r(1, 1) >= r(2, 2)) {
    S s = std::sqrt(S(1) + r(1, 1) - r(0, 0) - r(2, 2)) * S(2);
    q << (r(0, 2) - r(2, 0)) / s, (r(0, 1) + r(1, 0)) / s, s / S(4), (r(1, 2) + r(2, 1)) / s;
  } else {
    S s = std::sqrt(S(1) + r(2, 2) - r(0, 0) - r(1, 1)) * S(2);
    q << (r(1, 0) - r(0, 1)) / s, (r(0, 2) + r(2, 0)) / s, (r(1, 2) + r(2, 1)) / s, s / S(4);
  }
  q = quat_normalize(q);
  if (q[0] < S(0)) q = -q;
  return q;
}

}  // namespace senav
