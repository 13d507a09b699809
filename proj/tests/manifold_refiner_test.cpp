#include <doctest.h>

#include <cmath>
#include <random>

#include "p4p/manifold_refiner.hpp"
#include "p4p/p4p_solver.hpp"
#include "p4p/simulation.hpp"
#include "test_support.hpp"

using namespace p4p;
using p4p::testing::code_of;
using p4p::testing::max_abs;
using p4p::testing::oracle_pixels;
using p4p::testing::square;

namespace {

const CameraIntrinsics kRef(1562.5, 1562.5);
const Pose kRefPose{RotationMatrix(), Vec3(0.05, 0.05, 2.0)};

// Central differences of residual() along each left-multiplied generator.
Jacobian finite_difference_jacobian(const Pose& pose, const PlanarTarget& t,
                                    const ObservationSet& obs, const CameraIntrinsics& k,
                                    double h) {
  Jacobian j(2 * t.size(), 6);
  for (int c = 0; c < 6; ++c) {
    Eigen::Matrix<double, 6, 1> d = Eigen::Matrix<double, 6, 1>::Zero();
    d(c) = h;
    const SE3Increment plus{d.head<3>(), d.tail<3>()};
    const SE3Increment minus{-d.head<3>(), -d.tail<3>()};
    j.col(c) = (residual(retract_left(plus, pose), t, obs, k) -
                residual(retract_left(minus, pose), t, obs, k)) /
               (2.0 * h);
  }
  return j;
}

// Entry-wise |analytic - numeric| / max(|numeric|, 1). The unit floor is in
// the Jacobian's own units (pixel * metre), far below typical entries.
double max_relative_error(const Jacobian& analytic, const Jacobian& numeric) {
  double worst = 0.0;
  for (Eigen::Index r = 0; r < analytic.rows(); ++r) {
    for (Eigen::Index c = 0; c < 6; ++c) {
      const double denom = std::max(std::abs(numeric(r, c)), 1.0);
      worst = std::max(worst, std::abs(analytic(r, c) - numeric(r, c)) / denom);
    }
  }
  return worst;
}

}  // namespace

TEST_CASE("se3_exp") {
  SUBCASE("zero rotation") {
    const SE3Exp e = se3_exp({Vec3(1, 2, 3), Vec3::Zero()});
    CHECK(e.delta_r.matrix() == Mat3::Identity());
    CHECK(max_abs(e.v - Mat3::Identity()) == 0.0);
    CHECK(e.delta_t == Vec3(1, 2, 3));
  }

  SUBCASE("quarter turn about z") {
    const SE3Exp e = se3_exp({Vec3::Zero(), Vec3(0, 0, M_PI / 2)});
    Mat3 rz;
    rz << 0, -1, 0, 1, 0, 0, 0, 0, 1;
    CHECK(max_abs(e.delta_r.matrix() - rz) <= 1e-15);
  }

  SUBCASE("matches an independent axis-angle construction") {
    std::mt19937_64 rng(7);
    for (int i = 0; i < 100; ++i) {
      const Vec3 rho = testing::random_vec3(rng, -2, 2);
      const Mat3 expected = testing::axis_angle(rho, rho.norm());
      CHECK(max_abs(se3_exp({Vec3::Zero(), rho}).delta_r.matrix() - expected) <= 1e-12);
    }
  }

  SUBCASE("exp(rho) exp(-rho) = I and outputs stay on SO(3)") {
    std::mt19937_64 rng(9);
    for (int i = 0; i < 200; ++i) {
      const Vec3 rho = testing::random_vec3(rng, -3, 3) * (i % 2 ? 1.0 : 1e-7);
      const Mat3 a = se3_exp({Vec3::Zero(), rho}).delta_r.matrix();
      const Mat3 b = se3_exp({Vec3::Zero(), Vec3(-rho)}).delta_r.matrix();
      CHECK(max_abs(a * b - Mat3::Identity()) <= 1e-12);
      CHECK(is_rotation(a));
    }
  }

  SUBCASE("V is continuous across the series threshold") {
    const Vec3 axis = Vec3(1, -2, 0.5).normalized();
    const Vec3 s(0.3, -0.1, 0.7);
    const SE3Exp below = se3_exp({s, axis * (kTaylorAngle * 0.999)});
    const SE3Exp above = se3_exp({s, axis * (kTaylorAngle * 1.001)});
    CHECK(max_abs(below.v - above.v) <= 1e-9);
    CHECK(max_abs(below.delta_r.matrix() - testing::axis_angle(axis, kTaylorAngle * 0.999)) <= 1e-15);
    CHECK(max_abs(above.delta_r.matrix() - testing::axis_angle(axis, kTaylorAngle * 1.001)) <= 1e-15);
  }

  SUBCASE("V integrates the rotation: exp of a screw motion") {
    // For rho along z and s along z, the motion is a pure screw: dt = s.
    const SE3Exp e = se3_exp({Vec3(0, 0, 2), Vec3(0, 0, 1.3)});
    CHECK((e.delta_t - Vec3(0, 0, 2)).norm() <= 1e-15);
    // For s orthogonal to rho, V s is the chord of the arc: |V s| = |s| * sin(th/2) / (th/2).
    const double th = 1.3;
    const SE3Exp f = se3_exp({Vec3(1, 0, 0), Vec3(0, 0, th)});
    CHECK(f.delta_t.norm() == doctest::Approx(std::sin(th / 2) / (th / 2)).epsilon(1e-14));
  }
}

TEST_CASE("residual and objective") {
  const PlanarTarget t = square(0.1333);
  const ObservationSet clean = oracle_pixels(kRef, Mat3::Identity(), kRefPose.translation, t);

  SUBCASE("perfect observations") {
    CHECK(residual(kRefPose, t, clean, kRef).isZero(1e-9));
    CHECK(objective(kRefPose, t, clean, kRef) <= 1e-18);
  }

  SUBCASE("layout is two rows per point") {
    CHECK(residual(kRefPose, t, clean, kRef).size() == 8);
    PlanarTarget t8 = make_feature_set(8, 0.1333);
    const ObservationSet obs8 = oracle_pixels(kRef, Mat3::Identity(), kRefPose.translation, t8);
    CHECK(residual(kRefPose, t8, obs8, kRef).size() == 16);
  }

  SUBCASE("pixel offset scales by depth") {
    ObservationSet obs = clean;
    obs.pixels[1].x() += 1.0;
    const Residual f = residual(kRefPose, t, obs, kRef);
    CHECK(f(2) == doctest::Approx(-2.0));
    CHECK(std::abs(f(3)) <= 1e-9);

    const double delta = 0.37;
    obs = clean;
    obs.pixels[2].x() += delta;
    CHECK(objective(kRefPose, t, obs, kRef) == doctest::Approx(0.5 * (2.0 * delta) * (2.0 * delta)));
  }

  SUBCASE("matches direct summation off the optimum") {
    const Pose moved{RotationMatrix(), kRefPose.translation + Vec3(0.01, 0, 0)};
    double sum = 0.0;
    for (std::size_t i = 0; i < 4; ++i) {
      const double x = t.points[i].x() + moved.translation.x();
      const double y = t.points[i].y() + moved.translation.y();
      const double z = moved.translation.z();
      const double du = 1562.5 * x - clean.pixels[i].x() * z;
      const double dv = 1562.5 * y - clean.pixels[i].y() * z;
      sum += du * du + dv * dv;
    }
    CHECK(objective(moved, t, clean, kRef) == doctest::Approx(0.5 * sum).epsilon(1e-12));
  }

  SUBCASE("point behind the camera") {
    const Pose behind{RotationMatrix(), Vec3(0, 0, -1)};
    CHECK(code_of([&] { objective(behind, t, clean, kRef); }) == ErrorCode::kPointBehindCamera);
  }

  SUBCASE("pixel objective is the plain reprojection error") {
    ObservationSet obs = clean;
    obs.pixels[0] += Vec2(3.0, 4.0);
    CHECK(pixel_objective(kRefPose, t, obs, kRef) == doctest::Approx(12.5));
  }
}

TEST_CASE("jacobian") {
  SUBCASE("translation block with identity intrinsics") {
    const CameraIntrinsics k(1, 1);
    const PlanarTarget t = square(0.2);
    const ObservationSet obs{{{0.1, -0.2}, {0.3, 0.4}, {-0.5, 0.6}, {0.7, 0.8}}};
    const Jacobian j = jacobian(Pose{RotationMatrix(), Vec3(0, 0, 3)}, t, obs, k);
    for (std::size_t i = 0; i < 4; ++i) {
      Eigen::Matrix<double, 2, 3> expected;
      expected << 1, 0, -obs.pixels[i].x(), 0, 1, -obs.pixels[i].y();
      CHECK((j.block<2, 3>(2 * i, 0) - expected).cwiseAbs().maxCoeff() == 0.0);
    }
  }

  SUBCASE("matches finite differences on random instances") {
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> half(0.05, 0.4);
    std::uniform_real_distribution<double> noise(-5.0, 5.0);
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
      const CameraIntrinsics k(800 + 10 * trial, 820 + 5 * trial, 300, 250, 0.1 * trial);
      PlanarTarget t = trial % 2 ? square(half(rng)) : make_feature_set(8, half(rng));
      const Pose pose = testing::random_viewing_pose(rng, 0.5, 6.0);
      ObservationSet obs = oracle_pixels(k, pose.rotation.matrix(), pose.translation, t);
      for (Vec2& p : obs.pixels) p += Vec2(noise(rng), noise(rng));
      const double err =
          max_relative_error(jacobian(pose, t, obs, k), finite_difference_jacobian(pose, t, obs, k, 1e-6));
      worst = std::max(worst, err);
    }
    MESSAGE("worst relative Jacobian error: " << worst);
    CHECK(worst <= 1e-5);
  }

  SUBCASE("optical-axis point rotation block") {
    // At R = I, t = (0, 0, z), q = origin: w = (0, 0, z), -hat(w) has columns
    // (0, -z, 0), (z, 0, 0), 0. Check against finite differences only.
    const PlanarTarget t{{{0, 0}, {0.1, 0}, {0.1, 0.1}, {0, 0.1}}};
    const Pose pose{RotationMatrix(), Vec3(0, 0, 2)};
    const ObservationSet obs = oracle_pixels(kRef, Mat3::Identity(), pose.translation, t);
    const Jacobian j = jacobian(pose, t, obs, kRef);
    CHECK(max_relative_error(j, finite_difference_jacobian(pose, t, obs, kRef, 1e-6)) <= 1e-5);
    CHECK(j(0, 3) == doctest::Approx(0.0));
    CHECK(j(0, 4) == doctest::Approx(1562.5 * 2.0));
    CHECK(j(1, 3) == doctest::Approx(-1562.5 * 2.0));
  }

  SUBCASE("gradient vanishes at the noiseless optimum") {
    std::mt19937_64 rng(41);
    for (int trial = 0; trial < 20; ++trial) {
      const PlanarTarget t = make_feature_set(8, 0.2);
      const Pose pose = testing::random_viewing_pose(rng, 1.0, 5.0);
      const ObservationSet obs = oracle_pixels(kRef, pose.rotation.matrix(), pose.translation, t);
      const Eigen::Matrix<double, 6, 1> g =
          jacobian(pose, t, obs, kRef).transpose() * residual(pose, t, obs, kRef);
      CHECK(g.cwiseAbs().maxCoeff() <= 1e-10 * 1562.5 * 1562.5);
    }
  }
}

TEST_CASE("refine") {
  const PlanarTarget t = square(0.1333);
  const ObservationSet clean = oracle_pixels(kRef, Mat3::Identity(), kRefPose.translation, t);

  SUBCASE("already optimal") {
    const RefineReport rep = refine(kRefPose, t, clean, kRef);
    CHECK(rep.converged);
    CHECK(rep.iterations <= 1);
    CHECK(max_abs(rep.pose.rotation.matrix() - Mat3::Identity()) <= 1e-10);
    CHECK((rep.pose.translation - kRefPose.translation).norm() <= 1e-10);
  }

  SUBCASE("from the analytic pose on noiseless data") {
    std::mt19937_64 rng(43);
    for (int trial = 0; trial < 50; ++trial) {
      const Pose truth = testing::random_viewing_pose(rng, 0.5, 10.0);
      const ObservationSet obs = oracle_pixels(kRef, truth.rotation.matrix(), truth.translation, t);
      const RefineReport rep = refine(solve_p4p(t, obs, kRef), t, obs, kRef);
      CHECK(rep.final_objective <= 1e-16);
    }
  }

  SUBCASE("recovers from a perturbed start, staying on SO(3)") {
    std::mt19937_64 rng(47);
    const PlanarTarget t8 = make_feature_set(8, 0.2);
    for (int trial = 0; trial < 50; ++trial) {
      const Pose truth = testing::random_viewing_pose(rng, 1.0, 4.0, 0.6);
      const ObservationSet obs = oracle_pixels(kRef, truth.rotation.matrix(), truth.translation, t8);
      const Pose start = retract_left(
          {testing::random_vec3(rng, -0.05, 0.05), testing::random_vec3(rng, -0.05, 0.05)}, truth);
      const RefineReport rep = refine(start, t8, obs, kRef);
      CHECK(rep.converged);
      CHECK(rep.final_objective <= rep.initial_objective);
      CHECK(max_abs(rep.pose.rotation.matrix() - truth.rotation.matrix()) <= 1e-8);
      CHECK((rep.pose.translation - truth.translation).norm() <= 1e-8);
      CHECK(is_rotation(rep.pose.rotation.matrix()));
      for (std::size_t i = 1; i < rep.accepted_objectives.size(); ++i) {
        CHECK(rep.accepted_objectives[i] <= rep.accepted_objectives[i - 1]);
      }
    }
  }

  SUBCASE("noisy data: objective never increases") {
    std::mt19937_64 rng(53);
    for (int trial = 0; trial < 100; ++trial) {
      const ObservationSet noisy = add_awgn(clean, 15.0, rng);
      Pose start;
      try {
        start = solve_p4p(t, noisy, kRef);
      } catch (const PoseError&) {
        continue;
      }
      const RefineReport rep = refine(start, t, noisy, kRef);
      CHECK(rep.final_objective <= rep.initial_objective);
      CHECK(rep.accepted_objectives.back() == rep.final_objective);
    }
  }

  SUBCASE("mirror solution is never returned with negative depths") {
    // (R', -t) with the first two columns of R negated.
    Mat3 mirror = Mat3::Identity();
    mirror.col(0) *= -1.0;
    mirror.col(1) *= -1.0;
    const Pose seed{RotationMatrix(mirror), -kRefPose.translation};
    CHECK(code_of([&] { refine(seed, t, clean, kRef); }) == ErrorCode::kPointBehindCamera);
  }

  SUBCASE("options are validated") {
    RefineOptions bad;
    bad.lambda_up = 0.5;
    CHECK(code_of([&] { refine(kRefPose, t, clean, kRef, bad); }) == ErrorCode::kInvalidArgument);
    bad = {};
    bad.max_iterations = 0;
    CHECK(code_of([&] { refine(kRefPose, t, clean, kRef, bad); }) == ErrorCode::kInvalidArgument);
  }

  SUBCASE("iteration cap reports non-convergence") {
    RefineOptions opts;
    opts.max_iterations = 1;
    const Pose start{RotationMatrix(testing::axis_angle(Vec3(1, 1, 0), 0.2)), Vec3(0.1, 0, 2.3)};
    const RefineReport rep = refine(start, t, clean, kRef, opts);
    CHECK(rep.iterations == 1);
    CHECK_FALSE(rep.converged);
    CHECK(rep.final_objective <= rep.initial_objective);
  }
}
