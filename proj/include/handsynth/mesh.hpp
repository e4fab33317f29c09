#pragma once

#include <Eigen/Core>

#include <functional>
#include <vector>

#include "handsynth/kinematics.hpp"
#include "handsynth/sampling.hpp"

namespace handsynth {

/// Indexed triangle list with per-vertex unit normals and RGB colors in [0,1].
struct TriangleMesh {
  std::vector<Eigen::Vector3d> positions;
  std::vector<Eigen::Vector3d> normals;
  std::vector<Eigen::Vector3d> colors;
  std::vector<Eigen::Vector3i> faces;

  std::size_t vertex_count() const { return positions.size(); }
  std::size_t triangle_count() const { return faces.size(); }
};

/// Frozen tessellation: segments around the axis and rings along it.
/// Changing these breaks golden-image stability.
inline constexpr int kCapsuleSegments = 16;
inline constexpr int kCapsuleRings = 8;

/// Capsule radius for a link of the given length.
double link_radius(double link_length);

/// Maps surface parameters (u along the axis in [0,1], v around in [0,1))
/// to a vertex color.
using SurfaceColorFn = std::function<Eigen::Vector3d(double u, double v)>;

/// Appends a capsule (cylinder body plus two rounded cap fans) from a to b.
/// Adds exactly 2*kCapsuleSegments*kCapsuleRings + 2*kCapsuleSegments
/// triangles.
void append_capsule(TriangleMesh& mesh, const Eigen::Vector3d& a, const Eigen::Vector3d& b,
                    double radius, const SurfaceColorFn& color_at);

/// Appends a lat-long sphere; every vertex lies within `radius` of `center`.
void append_sphere(TriangleMesh& mesh, const Eigen::Vector3d& center, double radius,
                   const SurfaceColorFn& color_at);

/// One capsule per link (sphere fallback for zero-length links), colored
/// from the appearance parameters.
TriangleMesh build_hand_mesh(const JointSpace& space, const HandPose& pose,
                             const AppearanceParams& appearance);

}  // namespace handsynth
