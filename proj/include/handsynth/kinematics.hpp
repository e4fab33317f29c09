#pragma once

#include <Eigen/Geometry>

#include <utility>
#include <vector>

#include "handsynth/joint_space.hpp"

namespace handsynth {

/// World-frame rigid transform per link, in canonical joint order. Link j's
/// frame has its origin at joint j and its +x axis along the link.
struct HandPose {
  std::vector<Eigen::Isometry3d> link_transforms;
};

/// Rotation about a unit axis.
template <typename Scalar>
Eigen::Matrix<Scalar, 3, 3> axis_angle_rotation(const Eigen::Matrix<Scalar, 3, 1>& axis,
                                                Scalar angle) {
  return Eigen::AngleAxis<Scalar>(angle, axis).toRotationMatrix();
}

/// Composes parent transforms with per-joint axis-angle rotations and link
/// translations along the kinematic tree, root at the wrist.
HandPose forward_kinematics(const JointSpace& space, const JointVector& q);

/// World-space endpoints of link j: (proximal joint origin, distal end).
std::pair<Eigen::Vector3d, Eigen::Vector3d> link_segment(const JointSpace& space,
                                                         const HandPose& pose, int j);

}  // namespace handsynth
