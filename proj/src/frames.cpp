#include "p4p/frames.hpp"

#include <utility>

#include <fmt/core.h>

#include "p4p/error.hpp"

namespace p4p {

namespace {

void expect_labels(const FramePose& fp, const std::string& source, const std::string& target,
                   const char* role) {
  if (fp.source() != source || fp.target() != target) {
    throw PoseError(ErrorCode::kFrameMismatch,
                    fmt::format("{} must map {} -> {}, got {} -> {}", role, source, target,
                                fp.source(), fp.target()));
  }
}

}  // namespace

FramePose::FramePose(std::string source, std::string target, Pose pose)
    : source_(std::move(source)), target_(std::move(target)), pose_(std::move(pose)) {
  if (source_ == target_) {
    throw PoseError(ErrorCode::kFrameMismatch,
                    fmt::format("source and target frame are both '{}'", source_));
  }
}

Vec3 transform_point(const FramePose& fp, const Vec3& a) { return fp.pose().apply(a); }

FramePose invert(const FramePose& fp) {
  const RotationMatrix rt = fp.rotation().transpose();
  return FramePose(fp.target(), fp.source(), Pose{rt, -(rt * fp.translation())});
}

FramePose compose(const FramePose& outer, const FramePose& inner) {
  if (inner.target() != outer.source()) {
    throw PoseError(ErrorCode::kFrameMismatch,
                    fmt::format("cannot chain {} -> {} into {} -> {}", inner.source(),
                                inner.target(), outer.source(), outer.target()));
  }
  const Mat3 r = outer.rotation().matrix() * inner.rotation().matrix();
  const RotationMatrix rot =
      orthogonality_error(r) > kFrameDriftTol ? gram_schmidt_so3(r) : RotationMatrix(r);
  const Vec3 t = outer.rotation() * inner.translation() + outer.translation();
  return FramePose(inner.source(), outer.target(), Pose{rot, t});
}

Vec3 camera_origin_in_world(const FramePose& landmark_in_world,
                            const FramePose& landmark_in_camera) {
  expect_labels(landmark_in_world, frame::kLandmark, frame::kWorld, "landmark_in_world");
  expect_labels(landmark_in_camera, frame::kLandmark, frame::kCamera, "landmark_in_camera");
  const Mat3& r_lw = landmark_in_world.rotation().matrix();
  const Mat3& r_lc = landmark_in_camera.rotation().matrix();
  return -r_lw * r_lc.transpose() * landmark_in_camera.translation() +
         landmark_in_world.translation();
}

FramePose agv_pose_in_world(const FramePose& landmark_in_world,
                            const FramePose& landmark_in_camera,
                            const FramePose& vehicle_in_camera) {
  expect_labels(landmark_in_world, frame::kLandmark, frame::kWorld, "landmark_in_world");
  expect_labels(landmark_in_camera, frame::kLandmark, frame::kCamera, "landmark_in_camera");
  expect_labels(vehicle_in_camera, frame::kVehicle, frame::kCamera, "vehicle_in_camera");

  const Mat3 camera_to_world =
      landmark_in_world.rotation().matrix() * landmark_in_camera.rotation().matrix().transpose();
  const Mat3 r = camera_to_world * vehicle_in_camera.rotation().matrix();
  const Vec3 t = camera_to_world *
                     (vehicle_in_camera.translation() - landmark_in_camera.translation()) +
                 landmark_in_world.translation();
  const RotationMatrix rot =
      orthogonality_error(r) > kFrameDriftTol ? gram_schmidt_so3(r) : RotationMatrix(r);
  return FramePose(frame::kVehicle, frame::kWorld, Pose{rot, t});
}

}  // namespace p4p
