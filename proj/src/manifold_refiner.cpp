#include "p4p/manifold_refiner.hpp"

#include <cmath>
#include <limits>

#include <Eigen/Cholesky>
#include <fmt/core.h>

#include "p4p/error.hpp"

namespace p4p {

SE3Exp se3_exp(const SE3Increment& inc) {
  const Vec3& rho = inc.rho;
  const double theta = rho.norm();
  const double theta2 = theta * theta;

  // Written in terms of rho rather than the unit axis so theta = 0 is exact:
  //   dR = cos I + (1 - cos)/th^2 rho rho^T + sin/th hat(rho)
  //   V  = sin/th I + (th - sin)/th^3 rho rho^T + (1 - cos)/th^2 hat(rho)
  double sin_over, one_minus_cos_over2, th_minus_sin_over3;
  if (theta < kTaylorAngle) {
    sin_over = 1.0 - theta2 / 6.0;
    one_minus_cos_over2 = 0.5 - theta2 / 24.0;
    th_minus_sin_over3 = 1.0 / 6.0 - theta2 / 120.0;
  } else {
    sin_over = std::sin(theta) / theta;
    one_minus_cos_over2 = (1.0 - std::cos(theta)) / theta2;
    th_minus_sin_over3 = (theta - std::sin(theta)) / (theta2 * theta);
  }
  const Mat3 outer = rho * rho.transpose();
  const Mat3 skew = hat(rho);

  const Mat3 dr = std::cos(theta) * Mat3::Identity() + one_minus_cos_over2 * outer + sin_over * skew;
  const Mat3 v = sin_over * Mat3::Identity() + th_minus_sin_over3 * outer + one_minus_cos_over2 * skew;
  return {RotationMatrix(dr), v, v * inc.s};
}

Pose retract_left(const SE3Increment& inc, const Pose& pose) {
  const SE3Exp e = se3_exp(inc);
  return {e.delta_r * pose.rotation, e.delta_r * pose.translation + e.delta_t};
}

namespace {

void check_sizes(const PlanarTarget& target, const ObservationSet& obs) {
  if (target.size() != obs.size()) {
    throw PoseError(ErrorCode::kInvalidCount,
                    fmt::format("{} observations for {} target points", obs.size(), target.size()));
  }
}

// Camera-frame point for feature i, with its depth checked.
Vec3 camera_point(const Pose& pose, const PlanarTarget& target, const Mat3& km, std::size_t i) {
  const Vec3 w = pose.apply(target.point3(i));
  const double depth = km.row(2).dot(w);
  if (!(depth > kDepthEps)) {
    throw PoseError(ErrorCode::kPointBehindCamera,
                    fmt::format("point {} at depth {:.6g}", i + 1, depth));
  }
  return w;
}

}  // namespace

Residual residual(const Pose& pose, const PlanarTarget& target, const ObservationSet& obs,
                  const CameraIntrinsics& k) {
  check_sizes(target, obs);
  const Mat3& km = k.matrix();
  Residual f(2 * target.size());
  for (std::size_t i = 0; i < target.size(); ++i) {
    const Vec3 w = camera_point(pose, target, km, i);
    const double z = km.row(2).dot(w);
    f(2 * i) = km.row(0).dot(w) - obs.pixels[i].x() * z;
    f(2 * i + 1) = km.row(1).dot(w) - obs.pixels[i].y() * z;
  }
  return f;
}

double objective(const Pose& pose, const PlanarTarget& target, const ObservationSet& obs,
                 const CameraIntrinsics& k) {
  return 0.5 * residual(pose, target, obs, k).squaredNorm();
}

double pixel_objective(const Pose& pose, const PlanarTarget& target, const ObservationSet& obs,
                       const CameraIntrinsics& k) {
  check_sizes(target, obs);
  double sum = 0.0;
  for (std::size_t i = 0; i < target.size(); ++i) {
    sum += (project(k, pose, target.point3(i)).pixel - obs.pixels[i]).squaredNorm();
  }
  return 0.5 * sum;
}

Jacobian jacobian(const Pose& pose, const PlanarTarget& target, const ObservationSet& obs,
                  const CameraIntrinsics& k) {
  check_sizes(target, obs);
  const Mat3& km = k.matrix();
  Jacobian j(2 * target.size(), 6);
  for (std::size_t i = 0; i < target.size(); ++i) {
    const Vec3 w = camera_point(pose, target, km, i);

    Eigen::Matrix<double, 2, 3> df_dw;
    df_dw.row(0) = km.row(0) - obs.pixels[i].x() * km.row(2);
    df_dw.row(1) = km.row(1) - obs.pixels[i].y() * km.row(2);

    Eigen::Matrix<double, 3, 6> dw_dxi;
    dw_dxi << Mat3::Identity(), -hat(w);

    j.middleRows<2>(2 * i) = df_dw * dw_dxi;
  }
  return j;
}

void RefineOptions::validate() const {
  if (max_iterations < 1 || !(lambda_init > 0.0) || !(lambda_up > 1.0) || !(lambda_down > 0.0) ||
      !(lambda_down < 1.0) || !(step_tol > 0.0) || !(objective_tol > 0.0)) {
    throw PoseError(ErrorCode::kInvalidArgument, "invalid refine options");
  }
}

RefineReport refine(const Pose& initial, const PlanarTarget& target, const ObservationSet& obs,
                    const CameraIntrinsics& k, const RefineOptions& opts) {
  opts.validate();
  if (target.size() < 4) {
    throw PoseError(ErrorCode::kInvalidCount,
                    fmt::format("need at least 4 points, got {}", target.size()));
  }

  RefineReport report;
  report.pose = initial;
  Residual f = residual(initial, target, obs, k);
  double cost = 0.5 * f.squaredNorm();
  report.initial_objective = cost;
  report.accepted_objectives.push_back(cost);

  double lambda = opts.lambda_init;
  Jacobian j = jacobian(report.pose, target, obs, k);
  bool relinearize = false;

  while (report.iterations < opts.max_iterations) {
    if (cost == 0.0) {
      report.converged = true;
      break;
    }
    if (relinearize) {
      j = jacobian(report.pose, target, obs, k);
      relinearize = false;
    }
    ++report.iterations;

    const Eigen::Matrix<double, 6, 6> jtj = j.transpose() * j;
    const Eigen::Matrix<double, 6, 1> jtf = j.transpose() * f;
    const Eigen::Matrix<double, 6, 6> damped = jtj + lambda * Eigen::Matrix<double, 6, 6>::Identity();

    const Eigen::LDLT<Eigen::Matrix<double, 6, 6>> ldlt(damped);
    Eigen::Matrix<double, 6, 1> step;
    if (ldlt.info() == Eigen::Success) step = -ldlt.solve(jtf);
    if (ldlt.info() != Eigen::Success || !step.allFinite()) {
      lambda *= opts.lambda_up;
      continue;
    }
    if (step.norm() < opts.step_tol) {
      report.converged = true;
      break;
    }

    const SE3Increment inc{step.head<3>(), step.tail<3>()};
    Pose candidate;
    Residual candidate_f;
    double candidate_cost = std::numeric_limits<double>::infinity();
    try {
      candidate = retract_left(inc, report.pose);
      candidate_f = residual(candidate, target, obs, k);
      candidate_cost = 0.5 * candidate_f.squaredNorm();
    } catch (const PoseError&) {
      // A candidate that loses depth positivity (or drifts off SO(3)) is
      // treated like an uphill step.
    }

    if (candidate_cost < cost) {
      const double decrease = cost - candidate_cost;
      report.pose = candidate;
      f = std::move(candidate_f);
      cost = candidate_cost;
      report.accepted_objectives.push_back(cost);
      lambda *= opts.lambda_down;
      relinearize = true;
      if (decrease < opts.objective_tol) {
        report.converged = true;
        break;
      }
    } else {
      lambda *= opts.lambda_up;
      if (!std::isfinite(lambda)) break;
    }
  }

  report.final_objective = cost;
  return report;
}

}  // namespace p4p
