#pragma once

#include "p4p/geometry.hpp"

namespace p4p {

/// Heading psi (about z), pitch theta (about x), roll gamma (about y), applied
/// as intrinsic z-x-y rotations: R = Tz(psi) Tx(theta) Ty(gamma).
/// Canonical form: theta in [-pi/2, pi/2], psi and gamma in (-pi, pi].
struct EulerAngles {
  double heading = 0.0;
  double pitch = 0.0;
  double roll = 0.0;
};

/// Threshold on |r32| above which pitch is treated as exactly +-pi/2.
struct GimbalConfig {
  double threshold = 0.9999;

  void validate() const;
};

Mat3 rot_z(double angle);
Mat3 rot_x(double angle);
Mat3 rot_y(double angle);

/// Wraps an angle into (-pi, pi].
double wrap_angle(double angle);

/// Closed-form Tz(psi) Tx(theta) Ty(gamma).
RotationMatrix rotation_from_euler(const EulerAngles& e);

/// Inverse of rotation_from_euler. In the gimbal-lock branch (|r32| > T) the
/// heading is pinned to 0 and the roll absorbs the indistinguishable part.
EulerAngles euler_from_rotation(const RotationMatrix& r, const GimbalConfig& cfg = {});

/// Maps pitch in (-pi, pi] back into [-pi/2, pi/2] via the equivalent
/// (psi + pi, +-pi - theta, gamma + pi) triple. The rotation is unchanged.
EulerAngles canonicalize_euler(const EulerAngles& e);

}  // namespace p4p
