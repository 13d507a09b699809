#include "p4p/geometry.hpp"

#include <cmath>

#include <fmt/core.h>

#include "p4p/error.hpp"

namespace p4p {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kSingularMatrix: return "SingularMatrix";
    case ErrorCode::kDegenerateColumns: return "DegenerateColumns";
    case ErrorCode::kPointBehindCamera: return "PointBehindCamera";
    case ErrorCode::kCollinearFeatures: return "CollinearFeatures";
    case ErrorCode::kCollinearPixels: return "CollinearPixels";
    case ErrorCode::kDegenerateDepthRatio: return "DegenerateDepthRatio";
    case ErrorCode::kDepthSignError: return "DepthSignError";
    case ErrorCode::kFrameMismatch: return "FrameMismatch";
    case ErrorCode::kInvalidCount: return "InvalidCount";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kAllTrialsFailed: return "AllTrialsFailed";
  }
  return "Unknown";
}

double orthogonality_error(const Mat3& m) {
  return (m.transpose() * m - Mat3::Identity()).cwiseAbs().maxCoeff();
}

bool is_rotation(const Mat3& m, double tol) {
  if (!m.allFinite()) return false;
  return orthogonality_error(m) <= tol && std::abs(m.determinant() - 1.0) <= tol;
}

RotationMatrix::RotationMatrix(const Mat3& m) : m_(m) {
  if (!is_rotation(m)) {
    throw PoseError(ErrorCode::kInvalidArgument,
                    fmt::format("matrix is not on SO(3) (orthogonality error {:.3g}, det {:.12g})",
                                orthogonality_error(m), m.determinant()));
  }
}

RotationMatrix RotationMatrix::transpose() const { return RotationMatrix(m_.transpose()); }

RotationMatrix RotationMatrix::operator*(const RotationMatrix& other) const {
  return RotationMatrix(m_ * other.m_);
}

CameraIntrinsics::CameraIntrinsics(double fx, double fy, double cx, double cy, double skew) {
  if (!(fx > 0.0) || !(fy > 0.0) || !std::isfinite(fx) || !std::isfinite(fy) ||
      !std::isfinite(cx) || !std::isfinite(cy) || !std::isfinite(skew)) {
    throw PoseError(ErrorCode::kInvalidArgument,
                    "intrinsics require finite values and fx > 0, fy > 0");
  }
  m_ << fx, skew, cx, 0.0, fy, cy, 0.0, 0.0, 1.0;
}

Mat3 CameraIntrinsics::inverse() const { return invert3(m_); }

Mat3 hat(const Vec3& v) {
  Mat3 s;
  s << 0.0, -v.z(), v.y(),
       v.z(), 0.0, -v.x(),
       -v.y(), v.x(), 0.0;
  return s;
}

Mat3 invert3(const Mat3& m) {
  Mat3 adj;
  adj(0, 0) = m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1);
  adj(0, 1) = m(0, 2) * m(2, 1) - m(0, 1) * m(2, 2);
  adj(0, 2) = m(0, 1) * m(1, 2) - m(0, 2) * m(1, 1);
  adj(1, 0) = m(1, 2) * m(2, 0) - m(1, 0) * m(2, 2);
  adj(1, 1) = m(0, 0) * m(2, 2) - m(0, 2) * m(2, 0);
  adj(1, 2) = m(0, 2) * m(1, 0) - m(0, 0) * m(1, 2);
  adj(2, 0) = m(1, 0) * m(2, 1) - m(1, 1) * m(2, 0);
  adj(2, 1) = m(0, 1) * m(2, 0) - m(0, 0) * m(2, 1);
  adj(2, 2) = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);

  const double det = m(0, 0) * adj(0, 0) + m(0, 1) * adj(1, 0) + m(0, 2) * adj(2, 0);
  if (!std::isfinite(det) || std::abs(det) <= kSingularEps) {
    throw PoseError(ErrorCode::kSingularMatrix, fmt::format("determinant {:.3g}", det));
  }
  return adj / det;
}

Projection project(const CameraIntrinsics& k, const Pose& pose, const Vec3& point) {
  const Vec3 w = pose.apply(point);
  const Mat3& km = k.matrix();
  const double depth = km.row(2).dot(w);
  if (!(depth > kDepthEps)) {
    throw PoseError(ErrorCode::kPointBehindCamera, fmt::format("depth {:.6g}", depth));
  }
  return {Vec2(km.row(0).dot(w) / depth, km.row(1).dot(w) / depth), depth};
}

RotationMatrix gram_schmidt_so3(const Mat3& m) {
  const Vec3 c1 = m.col(0);
  const double n1 = c1.norm();
  if (!(n1 >= kSingularEps)) {
    throw PoseError(ErrorCode::kDegenerateColumns, "first column vanishes");
  }
  const Vec3 e1 = c1 / n1;

  const Vec3 c2 = m.col(1) - e1.dot(m.col(1)) * e1;
  const double n2 = c2.norm();
  if (!(n2 >= kSingularEps)) {
    throw PoseError(ErrorCode::kDegenerateColumns, "second column is parallel to the first");
  }
  const Vec3 e2 = c2 / n2;

  Mat3 r;
  r.col(0) = e1;
  r.col(1) = e2;
  r.col(2) = e1.cross(e2);
  return RotationMatrix(r);
}

}  // namespace p4p
