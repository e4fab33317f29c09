#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <vector>

#include "handsynth/mesh.hpp"

namespace handsynth {

/// Fixed pinhole camera.
struct CameraConfig {
  Eigen::Vector3d position = Eigen::Vector3d(0.13, -0.55, 0.0);
  Eigen::Vector3d look_at = Eigen::Vector3d(0.13, 0.0, 0.0);
  Eigen::Vector3d up = Eigen::Vector3d::UnitX();
  double vertical_fov = 0.959931;  // 55 degrees
  int width = 224;
  int height = 224;
};

/// Single fixed point light, no falloff.
struct LightConfig {
  Eigen::Vector3d position = Eigen::Vector3d(0.13, -0.30, 0.05);
  double intensity = 1.0;  // (0, 10]
};

/// 8-bit RGB image, row-major, top row first.
struct Image {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;  // width * height * 3 bytes

  static Image filled(int width, int height, std::uint8_t r, std::uint8_t g, std::uint8_t b);

  const std::uint8_t* at(int x, int y) const { return pixels.data() + 3 * (y * width + x); }
  std::uint8_t* at(int x, int y) { return pixels.data() + 3 * (y * width + x); }
};

/// Lambert term below which surfaces do not darken further.
inline constexpr double kAmbientFloor = 0.15;

CameraConfig default_camera(int width = 224, int height = 224);
LightConfig default_light();

/// Software rasterizer: pinhole perspective projection, z-buffer hidden
/// surface removal, per-pixel Lambertian shading with the ambient floor.
/// Pixels covered by no triangle are exactly (255,255,255). Deterministic.
Image render(const TriangleMesh& mesh, const CameraConfig& camera, const LightConfig& light);

}  // namespace handsynth
