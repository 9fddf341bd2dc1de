#include <doctest.h>

#include <cmath>
#include <random>

#include "senav/lie.hpp"
#include "senav/measurements.hpp"

using namespace senav;
using V3 = Vec3<double>;
using M3 = Mat3<double>;

namespace {
M3 random_rotation(std::mt19937_64& rng, double max_angle = M_PI - 0.05) {
  std::normal_distribution<double> n(0, 1);
  std::uniform_real_distribution<double> u(0, max_angle);
  V3 axis(n(rng), n(rng), n(rng));
  axis.normalize();
  return so3_exp<double>(V3(axis * u(rng)));
}
}  // namespace

TEST_CASE("observe_features") {
  std::vector<Feature<double>> feats{{0, V3(1, 0, 0)}};

  SUBCASE("identity pose, zero noise") {
    std::mt19937_64 rng(1);
    auto obs = observe_features(NavState<double>::identity(), feats, 0.0, rng);
    REQUIRE(obs.size() == 1);
    CHECK((obs[0].y - V3(1, 0, 0)).norm() == 0.0);
  }

  SUBCASE("rotated and translated pose by hand") {
    NavState<double> x{rot_z(M_PI / 2), V3(1, 1, 0), V3::Zero()};
    std::mt19937_64 rng(1);
    auto obs = observe_features(x, {{7, V3(2, 1, 0)}}, 0.0, rng);
    // R^T [1,0,0] with R a quarter turn about z
    CHECK((obs[0].y - V3(0, -1, 0)).norm() == doctest::Approx(0.0).epsilon(1e-15));
  }

  SUBCASE("fixed seed reproduces the draw") {
    NoiseSpec<double> noise;
    noise.std_feature = 0.05;
    noise.seed = 99;
    auto a = observe_features(NavState<double>::identity(), feats, noise);
    auto b = observe_features(NavState<double>::identity(), feats, noise);
    CHECK((a[0].y - b[0].y).norm() == 0.0);
  }

  SUBCASE("no features is an error") {
    std::mt19937_64 rng(1);
    CHECK_THROWS_AS(observe_features(NavState<double>::identity(), {}, 0.0, rng),
                    std::invalid_argument);
  }
}

TEST_CASE("imu noise statistics") {
  TruthPoint<double> truth;
  truth.omega = V3(0.1, -0.2, 0.3);
  truth.accel = V3(0, 0, 9.81);

  SUBCASE("zero noise is exact") {
    NoiseSpec<double> noise{0.0, 0.0, 0.0, 1};
    std::mt19937_64 rng(5);
    auto m = imu_sample(truth, noise, rng);
    CHECK((m.omega - truth.omega).norm() == 0.0);
    CHECK((m.accel - truth.accel).norm() == 0.0);
  }

  SUBCASE("sample mean and std match the configured level") {
    NoiseSpec<double> noise{0.11, 0.1, 0.0, 1};
    std::mt19937_64 rng(7);
    const int n = 100000;
    double sum = 0, sum2 = 0;
    for (int i = 0; i < n; ++i) {
      const double d = imu_sample(truth, noise, rng).omega[0] - truth.omega[0];
      sum += d;
      sum2 += d * d;
    }
    const double mean = sum / n;
    const double std = std::sqrt(sum2 / n - mean * mean);
    CHECK(std::abs(mean) < 3.0 * 0.11 / std::sqrt(double(n)));
    CHECK(std == doctest::Approx(0.11).epsilon(0.02));
  }
}

TEST_CASE("aggregate") {
  SUBCASE("three unit-weight features at the canonical basis") {
    std::vector<Feature<double>> feats{{0, V3(1, 0, 0)}, {1, V3(0, 1, 0)}, {2, V3(0, 0, 1)}};
    std::mt19937_64 rng(1);
    auto obs = observe_features(NavState<double>::identity(), feats, 0.0, rng);
    auto agg = aggregate(feats, obs, M3(M3::Identity()), V3(V3::Zero()));
    CHECK(agg.s_T == 3.0);
    CHECK((agg.p_c - V3(1, 1, 1) / 3.0).norm() == doctest::Approx(0.0).epsilon(1e-15));
    // perfect estimate: MRt symmetric equal to M, RtPe zero
    CHECK((agg.MRt - agg.M).norm() == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(agg.RtPe.norm() == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(upsilon(agg.MRt).norm() == doctest::Approx(0.0).epsilon(1e-12));
  }

  SUBCASE("noise-free identities for arbitrary poses") {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> n(0, 1);
    for (int trial = 0; trial < 50; ++trial) {
      std::vector<Feature<double>> feats;
      for (int i = 0; i < 8; ++i) {
        feats.push_back(Feature<double>{i, V3(n(rng), n(rng), n(rng)) * 3.0});
      }
      NavState<double> truth{random_rotation(rng), V3(n(rng), n(rng), n(rng)),
                             V3(n(rng), n(rng), n(rng))};
      NavState<double> est{random_rotation(rng), V3(n(rng), n(rng), n(rng)),
                           V3(n(rng), n(rng), n(rng))};
      std::mt19937_64 tmp(1);
      auto obs = observe_features(truth, feats, 0.0, tmp);
      auto agg = aggregate(feats, obs, est.R, est.P);
      const M3 rt = truth.R * est.R.transpose();
      const V3 ptil = truth.P - rt * est.P;
      CHECK((agg.MRt - agg.M * rt).norm() == doctest::Approx(0.0).epsilon(1e-10));
      const V3 pe = ptil - (M3::Identity() - rt) * agg.p_c;
      CHECK((agg.RtPe - rt.transpose() * pe).norm() == doctest::Approx(0.0).epsilon(1e-10));
      CHECK((agg.M - agg.M.transpose()).norm() == doctest::Approx(0.0).epsilon(1e-12));
    }
  }

  SUBCASE("order and uniform weight-scaling invariance") {
    std::vector<Feature<double>> feats{
        {0, V3(1, 0, 0)}, {1, V3(0, 2, 0)}, {2, V3(0, 0, 3)}, {3, V3(1, 1, 1)}};
    std::mt19937_64 rng(9);
    auto obs = observe_features(NavState<double>{rot_z(0.3), V3(1, 2, 3), V3::Zero()}, feats, 0.0,
                                rng);
    auto base = aggregate(feats, obs, rot_z(0.1), V3(0.5, 0, 0));
    std::reverse(obs.begin(), obs.end());
    auto rev = aggregate(feats, obs, rot_z(0.1), V3(0.5, 0, 0));
    CHECK((base.p_c - rev.p_c).norm() == doctest::Approx(0.0).epsilon(1e-14));
    CHECK((base.MRt - rev.MRt).norm() == doctest::Approx(0.0).epsilon(1e-12));
    for (auto& ob : obs) ob.s *= 7.0;
    auto scaled = aggregate(feats, obs, rot_z(0.1), V3(0.5, 0, 0));
    CHECK((scaled.p_c - base.p_c).norm() == doctest::Approx(0.0).epsilon(1e-13));
    CHECK((scaled.RtPe - base.RtPe).norm() == doctest::Approx(0.0).epsilon(1e-13));
    CHECK(scaled.s_T == doctest::Approx(7.0 * base.s_T).epsilon(1e-13));
    CHECK((scaled.M - 7.0 * base.M).norm() == doctest::Approx(0.0).epsilon(1e-10));
  }

  SUBCASE("fewer than three matches") {
    std::vector<Feature<double>> feats{{0, V3(1, 0, 0)}, {1, V3(0, 1, 0)}, {2, V3(0, 0, 1)}};
    std::vector<FeatureObservation<double>> obs{{0, V3(1, 0, 0), 1.0}, {1, V3(0, 1, 0), 1.0}};
    CHECK(!try_aggregate(feats, obs, M3(M3::Identity()), V3(V3::Zero())).has_value());
    CHECK_THROWS_AS(aggregate(feats, obs, M3(M3::Identity()), V3(V3::Zero())), std::invalid_argument);
  }
}

TEST_CASE("landmark condition") {
  SUBCASE("noncollinear triple passes") {
    std::vector<Feature<double>> feats{{0, V3(1, 0, 0)}, {1, V3(0, 1, 0)}, {2, V3(0, 0, 1)}};
    std::mt19937_64 rng(1);
    auto obs = observe_features(NavState<double>::identity(), feats, 0.0, rng);
    auto agg = aggregate(feats, obs, M3(M3::Identity()), V3(V3::Zero()));
    CHECK(landmark_condition(agg.M).ok);
  }

  SUBCASE("collinear features fail") {
    M3 m = M3::Zero();
    // three points on the x axis: M is rank one
    for (double x : {-1.0, 0.5, 2.0}) {
      const V3 p(x, 0, 0);
      m += p * p.transpose();
    }
    const V3 mean((-1.0 + 0.5 + 2.0) / 3.0, 0, 0);
    m -= 3.0 * mean * mean.transpose();
    CHECK(!landmark_condition(m).ok);
  }

  SUBCASE("eigenvalues of Mbar are the pairwise sums") {
    std::mt19937_64 rng(4);
    std::normal_distribution<double> n(0, 1);
    for (int trial = 0; trial < 50; ++trial) {
      M3 a;
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) a(i, j) = n(rng);
      const M3 m = a * a.transpose();  // PSD
      Eigen::SelfAdjointEigenSolver<M3> es(m);
      const V3 lam = es.eigenvalues();  // ascending l1 <= l2 <= l3
      const auto cond = landmark_condition(m);
      CHECK(cond.lambda_min == doctest::Approx(lam[0] + lam[1]).epsilon(1e-10));
      CHECK(cond.lambda_max == doctest::Approx(lam[1] + lam[2]).epsilon(1e-10));
    }
  }
}

TEST_CASE("trajectory profiles satisfy the dynamics") {
  TrajectoryProfile<double> pr;

  SUBCASE("hover is the static equilibrium") {
    pr.kind = ProfileKind::Hover;
    const auto tp = synth_trajectory(3.0, pr);
    CHECK((tp.X.P - pr.center).norm() == 0.0);
    CHECK(tp.X.V.norm() == 0.0);
    CHECK(tp.omega.norm() == 0.0);
    CHECK((tp.accel + tp.X.R.transpose() * gravity<double>()).norm() ==
          doctest::Approx(0.0).epsilon(1e-12));
  }

  SUBCASE("circle speed is radius times rate") {
    pr.kind = ProfileKind::Circle;
    for (double t : {0.0, 1.3, 7.7, 42.0}) {
      CHECK(synth_trajectory(t, pr).X.V.norm() ==
            doctest::Approx(pr.radius * pr.omega).epsilon(1e-12));
    }
  }

  SUBCASE("finite differences recover the stated derivatives") {
    const double h = 1e-5;
    for (auto kind : {ProfileKind::Hover, ProfileKind::Circle, ProfileKind::Figure8}) {
      pr.kind = kind;
      for (double t : {0.5, 2.0, 9.25}) {
        const auto tp = synth_trajectory(t, pr);
        const auto tm = synth_trajectory(t - h, pr);
        const auto tpl = synth_trajectory(t + h, pr);
        // Pdot = V
        CHECK(((tpl.X.P - tm.X.P) / (2 * h) - tp.X.V).norm() ==
              doctest::Approx(0.0).epsilon(1e-8));
        // Vdot = R a + g
        const V3 vdot_fd = (tpl.X.V - tm.X.V) / (2 * h);
        CHECK((vdot_fd - (tp.X.R * tp.accel + gravity<double>())).norm() ==
              doctest::Approx(0.0).epsilon(1e-7));
        // Rdot = R [omega]x
        const M3 rdot_fd = (tpl.X.R - tm.X.R) / (2 * h);
        CHECK((rdot_fd - tp.X.R * skew(tp.omega)).norm() ==
              doctest::Approx(0.0).epsilon(1e-8));
        // apparent acceleration definition
        CHECK((tp.accel - tp.X.R.transpose() * (vdot_fd - gravity<double>())).norm() ==
              doctest::Approx(0.0).epsilon(1e-7));
      }
    }
  }
}

TEST_CASE("make_landmarks stays in the box and is reproducible") {
  std::mt19937_64 a(5), b(5);
  const V3 c(1, 2, 3);
  auto la = make_landmarks<double>(30, c, 3.0, a);
  auto lb = make_landmarks<double>(30, c, 3.0, b);
  REQUIRE(la.size() == 30);
  for (size_t i = 0; i < la.size(); ++i) {
    CHECK((la[i].p - lb[i].p).norm() == 0.0);
    CHECK(((la[i].p - c).cwiseAbs().maxCoeff()) <= 1.5);
  }
}
