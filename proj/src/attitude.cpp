#include "p4p/attitude.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "p4p/error.hpp"

namespace p4p {

using std::numbers::pi;

void GimbalConfig::validate() const {
  if (!(threshold > 0.0) || !(threshold < 1.0)) {
    throw PoseError(ErrorCode::kInvalidArgument, "gimbal threshold must lie in (0, 1)");
  }
}

Mat3 rot_z(double a) {
  const double c = std::cos(a), s = std::sin(a);
  Mat3 m;
  m << c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0;
  return m;
}

Mat3 rot_x(double a) {
  const double c = std::cos(a), s = std::sin(a);
  Mat3 m;
  m << 1.0, 0.0, 0.0, 0.0, c, -s, 0.0, s, c;
  return m;
}

Mat3 rot_y(double a) {
  const double c = std::cos(a), s = std::sin(a);
  Mat3 m;
  m << c, 0.0, s, 0.0, 1.0, 0.0, -s, 0.0, c;
  return m;
}

double wrap_angle(double angle) {
  double w = std::remainder(angle, 2.0 * pi);  // [-pi, pi]
  if (w <= -pi) w += 2.0 * pi;
  return w;
}

RotationMatrix rotation_from_euler(const EulerAngles& e) {
  const double cp = std::cos(e.heading), sp = std::sin(e.heading);
  const double ct = std::cos(e.pitch), st = std::sin(e.pitch);
  const double cg = std::cos(e.roll), sg = std::sin(e.roll);
  Mat3 m;
  m << cp * cg - sp * st * sg, -sp * ct, cp * sg + sp * cg * st,
       sp * cg + cp * st * sg, cp * ct, sp * sg - cp * st * cg,
       -ct * sg, st, ct * cg;
  return RotationMatrix(m);
}

EulerAngles euler_from_rotation(const RotationMatrix& rot, const GimbalConfig& cfg) {
  cfg.validate();
  const Mat3& r = rot.matrix();
  const double r32 = std::clamp(r(2, 1), -1.0, 1.0);

  EulerAngles e;
  if (std::abs(r32) > cfg.threshold) {
    e.pitch = std::copysign(pi / 2.0, r32);
    e.heading = 0.0;
    e.roll = wrap_angle(std::atan2(r(0, 2), r(0, 0)));
    return e;
  }
  e.pitch = std::asin(r32);
  e.heading = wrap_angle(std::atan2(-r(0, 1), r(1, 1)));
  e.roll = wrap_angle(std::atan2(-r(2, 0), r(2, 2)));
  return e;
}

EulerAngles canonicalize_euler(const EulerAngles& e) {
  if (e.pitch > pi / 2.0) {
    return {wrap_angle(e.heading + pi), pi - e.pitch, wrap_angle(e.roll + pi)};
  }
  if (e.pitch < -pi / 2.0) {
    return {wrap_angle(e.heading + pi), -pi - e.pitch, wrap_angle(e.roll + pi)};
  }
  return e;
}

}  // namespace p4p
