#include "handsynth/mesh.hpp"

#include <algorithm>
#include <cmath>

#include "handsynth/errors.hpp"
#include "handsynth/rng.hpp"

namespace handsynth {
namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

// Deterministic per-cell value in [0,1) for the noise texture.
double hash01(int link, std::int64_t iu, std::int64_t iv) {
  std::uint64_t h = mix64(static_cast<std::uint64_t>(link) + 0x9E3779B97F4A7C15ULL);
  h = mix64(h ^ static_cast<std::uint64_t>(iu));
  h = mix64(h ^ static_cast<std::uint64_t>(iv));
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

Eigen::Vector3d texture_color(const AppearanceParams& app, int link, double u, double v) {
  double m = 1.0;
  switch (app.texture_kind) {
    case TextureKind::solid:
      break;
    case TextureKind::stripes:
      m = 0.7 + 0.3 * 0.5 * (1.0 + std::sin(kTwoPi * u * 5.0 / app.texture_scale));
      break;
    case TextureKind::noise: {
      auto iu = static_cast<std::int64_t>(std::floor(u * 8.0 / app.texture_scale));
      auto iv = static_cast<std::int64_t>(std::floor(v * 8.0 / app.texture_scale));
      m = 0.6 + 0.4 * hash01(link, iu, iv);
      break;
    }
  }
  return (app.base_color * m).cwiseMax(0.0).cwiseMin(1.0);
}

// Orthonormal frame perpendicular to unit vector d.
void perpendicular_frame(const Eigen::Vector3d& d, Eigen::Vector3d& e1, Eigen::Vector3d& e2) {
  Eigen::Vector3d ref =
      std::abs(d.x()) < 0.9 ? Eigen::Vector3d::UnitX() : Eigen::Vector3d::UnitY();
  e1 = d.cross(ref).normalized();
  e2 = d.cross(e1);
}

}  // namespace

double link_radius(double link_length) {
  return std::clamp(0.3 * link_length, 0.007, 0.024);
}

void append_capsule(TriangleMesh& mesh, const Eigen::Vector3d& a, const Eigen::Vector3d& b,
                    double radius, const SurfaceColorFn& color_at) {
  const int S = kCapsuleSegments;
  const int R = kCapsuleRings;
  Eigen::Vector3d axis = b - a;
  double length = axis.norm();
  if (length <= 0.0 || radius <= 0.0)
    throw ValidationError("append_capsule: degenerate axis or radius");
  Eigen::Vector3d d = axis / length;
  Eigen::Vector3d e1, e2;
  perpendicular_frame(d, e1, e2);

  int base = static_cast<int>(mesh.vertex_count());
  // R+1 rings of S vertices along the axis.
  for (int r = 0; r <= R; ++r) {
    double t = static_cast<double>(r) / R;
    Eigen::Vector3d center = a + axis * t;
    for (int s = 0; s < S; ++s) {
      double ang = kTwoPi * s / S;
      Eigen::Vector3d n = std::cos(ang) * e1 + std::sin(ang) * e2;
      mesh.positions.push_back(center + radius * n);
      mesh.normals.push_back(n);
      mesh.colors.push_back(color_at(t, static_cast<double>(s) / S));
    }
  }
  auto ring = [&](int r, int s) { return base + r * S + (s % S); };
  for (int r = 0; r < R; ++r) {
    for (int s = 0; s < S; ++s) {
      mesh.faces.emplace_back(ring(r, s), ring(r + 1, s), ring(r + 1, s + 1));
      mesh.faces.emplace_back(ring(r, s), ring(r + 1, s + 1), ring(r, s + 1));
    }
  }

  // Rounded caps: one apex per end, fanned to the boundary rings.
  int apex_a = static_cast<int>(mesh.vertex_count());
  mesh.positions.push_back(a - radius * d);
  mesh.normals.push_back(-d);
  mesh.colors.push_back(color_at(0.0, 0.0));
  int apex_b = static_cast<int>(mesh.vertex_count());
  mesh.positions.push_back(b + radius * d);
  mesh.normals.push_back(d);
  mesh.colors.push_back(color_at(1.0, 0.0));
  for (int s = 0; s < S; ++s) {
    mesh.faces.emplace_back(apex_a, ring(0, s + 1), ring(0, s));
    mesh.faces.emplace_back(apex_b, ring(R, s), ring(R, s + 1));
  }
}

void append_sphere(TriangleMesh& mesh, const Eigen::Vector3d& center, double radius,
                   const SurfaceColorFn& color_at) {
  const int S = kCapsuleSegments;
  const int R = kCapsuleRings;
  if (radius <= 0.0) throw ValidationError("append_sphere: non-positive radius");

  int top = static_cast<int>(mesh.vertex_count());
  mesh.positions.push_back(center + radius * Eigen::Vector3d::UnitZ());
  mesh.normals.push_back(Eigen::Vector3d::UnitZ());
  mesh.colors.push_back(color_at(0.0, 0.0));

  int rings_base = static_cast<int>(mesh.vertex_count());
  for (int r = 1; r < R; ++r) {
    double theta = M_PI * r / R;
    for (int s = 0; s < S; ++s) {
      double phi = kTwoPi * s / S;
      Eigen::Vector3d n(std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi),
                        std::cos(theta));
      mesh.positions.push_back(center + radius * n);
      mesh.normals.push_back(n);
      mesh.colors.push_back(color_at(theta / M_PI, static_cast<double>(s) / S));
    }
  }

  int bottom = static_cast<int>(mesh.vertex_count());
  mesh.positions.push_back(center - radius * Eigen::Vector3d::UnitZ());
  mesh.normals.push_back(-Eigen::Vector3d::UnitZ());
  mesh.colors.push_back(color_at(1.0, 0.0));

  auto ring = [&](int r, int s) { return rings_base + (r - 1) * S + (s % S); };
  for (int s = 0; s < S; ++s) {
    mesh.faces.emplace_back(top, ring(1, s), ring(1, s + 1));
    mesh.faces.emplace_back(bottom, ring(R - 1, s + 1), ring(R - 1, s));
  }
  for (int r = 1; r < R - 1; ++r) {
    for (int s = 0; s < S; ++s) {
      mesh.faces.emplace_back(ring(r, s), ring(r + 1, s), ring(r + 1, s + 1));
      mesh.faces.emplace_back(ring(r, s), ring(r + 1, s + 1), ring(r, s + 1));
    }
  }
}

TriangleMesh build_hand_mesh(const JointSpace& space, const HandPose& pose,
                             const AppearanceParams& appearance) {
  if (pose.link_transforms.size() != space.size())
    throw ValidationError("build_hand_mesh: pose does not match joint space");
  TriangleMesh mesh;
  for (std::size_t j = 0; j < space.size(); ++j) {
    auto [a, b] = link_segment(space, pose, static_cast<int>(j));
    double radius = link_radius(space[j].link_length);
    int link = static_cast<int>(j);
    SurfaceColorFn color_at = [&appearance, link](double u, double v) {
      return texture_color(appearance, link, u, v);
    };
    if (space[j].link_length < 1e-9)
      append_sphere(mesh, a, radius, color_at);
    else
      append_capsule(mesh, a, b, radius, color_at);
  }
  return mesh;
}

}  // namespace handsynth
