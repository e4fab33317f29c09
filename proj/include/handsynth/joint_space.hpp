#pragma once

#include <Eigen/Core>

#include <filesystem>
#include <string>
#include <unordered_map>
#include <vector>

namespace handsynth {

/// One configuration Theta: angles in radians, index-aligned with the
/// canonical joint order of the JointSpace that produced it.
using JointVector = Eigen::VectorXd;

/// One revolute joint and the link it actuates. The child link extends along
/// the rotated local +x axis by link_length. `offset` is the joint's mount
/// point in the parent link frame; by default the parent link's distal end
/// (link_length, 0, 0), or the origin for root-mounted joints.
struct JointSpec {
  std::string name;
  std::string parent_link;  // "root" or the name of an earlier joint
  Eigen::Vector3d axis = Eigen::Vector3d::UnitZ();
  double link_length = 0.0;  // meters
  double min_angle = 0.0;    // radians
  double max_angle = 0.0;
  Eigen::Vector3d offset = Eigen::Vector3d::Zero();
  bool offset_explicit = false;
  int parent_index = -1;  // resolved index into JointSpace; -1 = root
};

/// Ordered joint definitions plus a content fingerprint. Immutable after
/// construction; safe to share across threads.
class JointSpace {
 public:
  JointSpace() = default;

  std::size_t size() const { return joints_.size(); }
  const JointSpec& operator[](std::size_t j) const { return joints_[j]; }
  const std::vector<JointSpec>& joints() const { return joints_; }

  /// Index of a joint by name, or -1.
  int index_of(const std::string& name) const;

  /// SHA-256 hex digest of the canonicalized definition.
  const std::string& fingerprint() const { return fingerprint_; }

  /// Canonical text form: comments stripped, fields normalized, offsets
  /// explicit. Reparsing it yields an identical space and fingerprint.
  const std::string& canonical_text() const { return canonical_text_; }

  /// Builds a space from definition text. Validates every JointSpec
  /// invariant; errors name the offending joint and line.
  static JointSpace parse(const std::string& text);

 private:
  std::vector<JointSpec> joints_;
  std::unordered_map<std::string, int> index_;
  std::string canonical_text_;
  std::string fingerprint_;
};

/// Loads a joint-definition file. See README for the line format.
JointSpace load_joint_space(const std::filesystem::path& definition_file);

/// The 25-joint definition shipped with the library (lh_WRJ2 ... lh_THJ1).
const JointSpace& default_joint_space();

/// Clamps every angle into its joint's [min, max] range. Idempotent.
JointVector clamp_to_ranges(const JointSpace& space, const JointVector& q);

/// Throws ValidationError when q's length differs from the space's.
void require_length(const JointSpace& space, const JointVector& q, const char* where);

}  // namespace handsynth
