#pragma once

#include <Eigen/Dense>

namespace p4p {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

// Absolute floor on determinants and column norms. Healthy configurations
// (features ~0.1 m, pixels ~100 px) sit many orders of magnitude above it.
inline constexpr double kSingularEps = 1e-12;
// Minimum camera-frame depth for a point to count as in front of the camera.
inline constexpr double kDepthEps = 1e-6;
// Tolerance on ||R^T R - I||_inf and |det R - 1| for RotationMatrix.
inline constexpr double kRotationTol = 1e-9;

/// Max-abs entry of R^T R - I.
double orthogonality_error(const Mat3& m);

bool is_rotation(const Mat3& m, double tol = kRotationTol);

/// A 3x3 matrix known to lie on SO(3). Construction validates the invariant
/// and throws PoseError(kInvalidArgument) otherwise.
class RotationMatrix {
 public:
  RotationMatrix() : m_(Mat3::Identity()) {}
  explicit RotationMatrix(const Mat3& m);

  static RotationMatrix identity() { return RotationMatrix(); }

  const Mat3& matrix() const { return m_; }
  RotationMatrix transpose() const;

  Vec3 operator*(const Vec3& v) const { return m_ * v; }
  RotationMatrix operator*(const RotationMatrix& other) const;

 private:
  Mat3 m_;
};

/// Rigid transform x -> R x + t.
struct Pose {
  RotationMatrix rotation;
  Vec3 translation = Vec3::Zero();

  Vec3 apply(const Vec3& x) const { return rotation * x + translation; }
};

/// Pinhole intrinsics: [fx skew cx; 0 fy cy; 0 0 1].
class CameraIntrinsics {
 public:
  CameraIntrinsics(double fx, double fy, double cx = 0.0, double cy = 0.0, double skew = 0.0);

  double fx() const { return m_(0, 0); }
  double fy() const { return m_(1, 1); }
  double cx() const { return m_(0, 2); }
  double cy() const { return m_(1, 2); }
  double skew() const { return m_(0, 1); }

  const Mat3& matrix() const { return m_; }
  Mat3 inverse() const;

 private:
  Mat3 m_;
};

/// Skew-symmetric matrix with hat(v) * w == v.cross(w).
Mat3 hat(const Vec3& v);

/// Closed-form adjugate inverse. Throws kSingularMatrix when |det| <= kSingularEps.
Mat3 invert3(const Mat3& m);

struct Projection {
  Vec2 pixel;
  double depth;
};

/// Pinhole projection of a landmark-frame point. Throws kPointBehindCamera
/// when the camera-frame depth is not above kDepthEps.
Projection project(const CameraIntrinsics& k, const Pose& pose, const Vec3& point);

/// Orthonormalizes columns in order (c1, c2 corrected against c1, c3 = c1 x c2).
/// Throws kDegenerateColumns if an intermediate norm drops below kSingularEps.
RotationMatrix gram_schmidt_so3(const Mat3& m);

}  // namespace p4p
