#pragma once

#include <vector>

#include "p4p/geometry.hpp"

namespace p4p {

/// Metric (x, y) coordinates of coplanar feature points; each is (x, y, 0) in
/// the landmark frame.
struct PlanarTarget {
  std::vector<Vec2> points;

  std::size_t size() const { return points.size(); }
  Vec3 point3(std::size_t i) const { return {points[i].x(), points[i].y(), 0.0}; }
};

/// Observed pixel coordinates, index-aligned with a PlanarTarget.
struct ObservationSet {
  std::vector<Vec2> pixels;

  std::size_t size() const { return pixels.size(); }
};

/// Throws kInvalidCount / kInvalidArgument if the pair cannot feed the solvers.
void validate_correspondences(const PlanarTarget& target, const ObservationSet& obs);

struct PointSystem {
  Mat3 pixel_matrix;    // P: columns are homogeneous pixels 1..3
  Mat3 feature_matrix;  // Q: columns are homogeneous features 1..3
  Vec3 pixel_coeffs;    // v = P^-1 p4
  Vec3 feature_coeffs;  // r = Q^-1 q4
};

/// T = P W Q^-1 is the homography up to the positive factor 1/z3'.
struct ScaledHomography {
  Mat3 t_matrix;
  double w1;  // z1'/z3'
  double w2;  // z2'/z3'
};

PointSystem build_point_system(const PlanarTarget& target, const ObservationSet& obs);

ScaledHomography compute_scaled_homography(const PointSystem& system);

/// Least-squares scale s0 = (|g1| + |g2|) / (|g1|^2 + |g2|^2).
double column_scale(double g1_norm, double g2_norm);

/// Builds (R, t) from T and K. T's sign is fixed so that the landmark point
/// `depth_probe` has positive depth; solve_p4p passes feature point 3.
Pose recover_scale_and_pose(const Mat3& t_matrix, const CameraIntrinsics& k,
                            const Vec2& depth_probe = Vec2::Zero());

/// Analytic pose from the first four correspondences. The returned pose is on
/// SO(3) and places all four points in front of the camera.
Pose solve_p4p(const PlanarTarget& target, const ObservationSet& obs, const CameraIntrinsics& k);

}  // namespace p4p
