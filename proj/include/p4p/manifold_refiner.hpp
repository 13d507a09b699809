#pragma once

#include <vector>

#include <Eigen/Core>

#include "p4p/geometry.hpp"
#include "p4p/p4p_solver.hpp"

namespace p4p {

/// Lie-algebra increment: translation part s, rotation part rho (axis * angle).
struct SE3Increment {
  Vec3 s = Vec3::Zero();
  Vec3 rho = Vec3::Zero();
};

struct SE3Exp {
  RotationMatrix delta_r;
  Mat3 v;        // left Jacobian applied to s
  Vec3 delta_t;  // v * s
};

// Below this rotation angle the trigonometric ratios use their series.
inline constexpr double kTaylorAngle = 1e-6;

SE3Exp se3_exp(const SE3Increment& inc);

/// Left-multiplies exp(inc) onto pose: (dR R, dR t + V s).
Pose retract_left(const SE3Increment& inc, const Pose& pose);

using Residual = Eigen::VectorXd;
using Jacobian = Eigen::Matrix<double, Eigen::Dynamic, 6>;

/// Depth-weighted reprojection residual, two rows per point:
///   (k1.w - u k3.w, k2.w - v k3.w),  w = R q + t.
/// Throws kPointBehindCamera if any point is not in front of the camera.
Residual residual(const Pose& pose, const PlanarTarget& target, const ObservationSet& obs,
                  const CameraIntrinsics& k);

/// Half the squared norm of residual().
double objective(const Pose& pose, const PlanarTarget& target, const ObservationSet& obs,
                 const CameraIntrinsics& k);

/// Plain pixel reprojection error, 0.5 * sum |p - p'|^2. Diagnostic only;
/// the refiner never minimizes it.
double pixel_objective(const Pose& pose, const PlanarTarget& target, const ObservationSet& obs,
                       const CameraIntrinsics& k);

/// d residual / d xi for a left-multiplied increment, columns (s, rho).
Jacobian jacobian(const Pose& pose, const PlanarTarget& target, const ObservationSet& obs,
                  const CameraIntrinsics& k);

struct RefineOptions {
  int max_iterations = 100;
  double lambda_init = 1e-3;
  double lambda_up = 10.0;
  double lambda_down = 0.1;
  double step_tol = 1e-10;
  double objective_tol = 1e-14;

  void validate() const;
};

struct RefineReport {
  Pose pose;
  double initial_objective = 0.0;
  double final_objective = 0.0;
  int iterations = 0;
  bool converged = false;
  // Objective after each accepted step, starting with the initial value.
  std::vector<double> accepted_objectives;
};

/// Levenberg-Marquardt on SE(3) with left-multiplicative updates. Steps that
/// raise the objective or push a point behind the camera are rejected.
RefineReport refine(const Pose& initial, const PlanarTarget& target, const ObservationSet& obs,
                    const CameraIntrinsics& k, const RefineOptions& opts = {});

}  // namespace p4p
