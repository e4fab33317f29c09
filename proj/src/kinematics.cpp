#include "handsynth/kinematics.hpp"

#include "handsynth/errors.hpp"

namespace handsynth {

HandPose forward_kinematics(const JointSpace& space, const JointVector& q) {
  require_length(space, q, "forward_kinematics");
  HandPose pose;
  pose.link_transforms.resize(space.size());
  for (std::size_t j = 0; j < space.size(); ++j) {
    const JointSpec& spec = space[j];
    Eigen::Isometry3d parent = Eigen::Isometry3d::Identity();
    if (spec.parent_index >= 0) {
      // Canonical order guarantees parents precede children.
      parent = pose.link_transforms[static_cast<std::size_t>(spec.parent_index)];
    }
    Eigen::Isometry3d local = Eigen::Isometry3d::Identity();
    local.translation() = spec.offset;
    local.linear() = axis_angle_rotation<double>(spec.axis, q[static_cast<Eigen::Index>(j)]);
    pose.link_transforms[j] = parent * local;
  }
  return pose;
}

std::pair<Eigen::Vector3d, Eigen::Vector3d> link_segment(const JointSpace& space,
                                                         const HandPose& pose, int j) {
  if (j < 0 || static_cast<std::size_t>(j) >= space.size() ||
      pose.link_transforms.size() != space.size())
    throw ValidationError("link_segment: joint index out of range");
  const Eigen::Isometry3d& t = pose.link_transforms[static_cast<std::size_t>(j)];
  Eigen::Vector3d a = t.translation();
  Eigen::Vector3d b = t * Eigen::Vector3d(space[static_cast<std::size_t>(j)].link_length, 0.0, 0.0);
  return {a, b};
}

}  // namespace handsynth
