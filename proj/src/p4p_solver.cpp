#include "p4p/p4p_solver.hpp"

#include <cmath>

#include <fmt/core.h>

#include "p4p/error.hpp"

namespace p4p {

namespace {

Vec3 homogeneous(const Vec2& p) { return {p.x(), p.y(), 1.0}; }

// Re-raises a singular inverse under the caller's more specific code.
Mat3 invert_or(const Mat3& m, ErrorCode code, const char* what) {
  try {
    return invert3(m);
  } catch (const PoseError& e) {
    if (e.code() != ErrorCode::kSingularMatrix) throw;
    throw PoseError(code, fmt::format("{} ({})", what, e.what()));
  }
}

}  // namespace

void validate_correspondences(const PlanarTarget& target, const ObservationSet& obs) {
  if (target.size() < 4) {
    throw PoseError(ErrorCode::kInvalidCount,
                    fmt::format("need at least 4 points, got {}", target.size()));
  }
  if (obs.size() != target.size()) {
    throw PoseError(ErrorCode::kInvalidCount,
                    fmt::format("{} observations for {} target points", obs.size(), target.size()));
  }
  for (std::size_t i = 0; i < target.size(); ++i) {
    if (!target.points[i].allFinite() || !obs.pixels[i].allFinite()) {
      throw PoseError(ErrorCode::kInvalidArgument, fmt::format("non-finite coordinate at {}", i));
    }
  }
}

PointSystem build_point_system(const PlanarTarget& target, const ObservationSet& obs) {
  validate_correspondences(target, obs);

  PointSystem sys;
  for (int c = 0; c < 3; ++c) {
    sys.pixel_matrix.col(c) = homogeneous(obs.pixels[c]);
    sys.feature_matrix.col(c) = homogeneous(target.points[c]);
  }
  const Mat3 q_inv = invert_or(sys.feature_matrix, ErrorCode::kCollinearFeatures,
                               "feature points 1-3 are collinear");
  const Mat3 p_inv = invert_or(sys.pixel_matrix, ErrorCode::kCollinearPixels,
                               "pixel points 1-3 are collinear");
  sys.pixel_coeffs = p_inv * homogeneous(obs.pixels[3]);
  sys.feature_coeffs = q_inv * homogeneous(target.points[3]);
  return sys;
}

ScaledHomography compute_scaled_homography(const PointSystem& sys) {
  const Vec3& v = sys.pixel_coeffs;
  const Vec3& r = sys.feature_coeffs;

  const double d1 = r(0) * v(2);
  const double d2 = r(1) * v(2);
  if (std::abs(d1) < kSingularEps || std::abs(d2) < kSingularEps) {
    throw PoseError(ErrorCode::kDegenerateDepthRatio,
                    fmt::format("depth ratio denominators {:.3g}, {:.3g}", d1, d2));
  }
  const double w1 = r(2) * v(0) / d1;
  const double w2 = r(2) * v(1) / d2;
  if (!(w1 > 0.0) || !(w2 > 0.0)) {
    throw PoseError(ErrorCode::kDepthSignError,
                    fmt::format("depth ratios must be positive, got {:.6g}, {:.6g}", w1, w2));
  }

  const Mat3 q_inv = invert_or(sys.feature_matrix, ErrorCode::kCollinearFeatures,
                               "feature points 1-3 are collinear");
  const Vec3 w_diag(w1, w2, 1.0);
  return {sys.pixel_matrix * w_diag.asDiagonal() * q_inv, w1, w2};
}

double column_scale(double g1_norm, double g2_norm) {
  return (g1_norm + g2_norm) / (g1_norm * g1_norm + g2_norm * g2_norm);
}

Pose recover_scale_and_pose(const Mat3& t_matrix, const CameraIntrinsics& k,
                            const Vec2& depth_probe) {
  invert3(t_matrix);
  Mat3 g = k.inverse() * t_matrix;

  // T is only known up to sign; keep the one that puts the probe point in
  // front of the camera.
  if (g.row(2).dot(homogeneous(depth_probe)) < 0.0) g = -g;

  const double s0 = column_scale(g.col(0).norm(), g.col(1).norm());
  if (!std::isfinite(s0) || !(s0 > 0.0)) {
    throw PoseError(ErrorCode::kSingularMatrix, "scale recovery failed");
  }
  const Vec3 r1 = s0 * g.col(0);
  const Vec3 r2 = s0 * g.col(1);
  Mat3 r;
  r << r1, r2, r1.cross(r2);
  return Pose{gram_schmidt_so3(r), s0 * g.col(2)};
}

Pose solve_p4p(const PlanarTarget& target, const ObservationSet& obs, const CameraIntrinsics& k) {
  const PointSystem sys = build_point_system(target, obs);
  const ScaledHomography h = compute_scaled_homography(sys);
  const Pose pose = recover_scale_and_pose(h.t_matrix, k, target.points[2]);

  for (std::size_t i = 0; i < 4; ++i) {
    const double depth = k.matrix().row(2).dot(pose.apply(target.point3(i)));
    if (!(depth > kDepthEps)) {
      throw PoseError(ErrorCode::kDepthSignError,
                      fmt::format("recovered pose puts point {} at depth {:.6g}", i + 1, depth));
    }
  }
  return pose;
}

}  // namespace p4p
