#pragma once

#include <string>

#include "p4p/geometry.hpp"

namespace p4p {

namespace frame {
inline const std::string kLandmark = "landmark";
inline const std::string kCamera = "camera";
inline const std::string kVehicle = "vehicle";
inline const std::string kWorld = "world";
}  // namespace frame

// Drift above which compose() re-projects its rotation onto SO(3).
inline constexpr double kFrameDriftTol = 1e-9;

/// Pose of frame `source` relative to frame `target`: a point a expressed in
/// source has coordinates R a + t in target.
class FramePose {
 public:
  FramePose(std::string source, std::string target, Pose pose);

  static FramePose identity(const std::string& source, const std::string& target) {
    return FramePose(source, target, Pose{});
  }

  const std::string& source() const { return source_; }
  const std::string& target() const { return target_; }
  const Pose& pose() const { return pose_; }
  const RotationMatrix& rotation() const { return pose_.rotation; }
  const Vec3& translation() const { return pose_.translation; }

 private:
  std::string source_;
  std::string target_;
  Pose pose_;
};

Vec3 transform_point(const FramePose& fp, const Vec3& a);

FramePose invert(const FramePose& fp);

/// Maps inner.source -> outer.target. Throws kFrameMismatch unless
/// inner.target == outer.source.
FramePose compose(const FramePose& outer, const FramePose& inner);

/// Camera origin in world: -R_lw R_lc^T t_lc + t_lw.
Vec3 camera_origin_in_world(const FramePose& landmark_in_world,
                            const FramePose& landmark_in_camera);

/// Vehicle pose in world from the solver output and the two extrinsics:
///   R = R_lw R_lc^T R_vc,  t = R_lw R_lc^T (t_vc - t_lc) + t_lw.
FramePose agv_pose_in_world(const FramePose& landmark_in_world,
                            const FramePose& landmark_in_camera,
                            const FramePose& vehicle_in_camera);

}  // namespace p4p
