#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <string>

#include "handsynth/joint_space.hpp"
#include "handsynth/rng.hpp"

namespace handsynth {

/// Identifies one sample of one dataset. The derived per-sample seed is a
/// pure function of these two values (see derive_sample_seed).
struct SeedSpec {
  std::uint64_t master_seed = 0;
  std::uint64_t sample_index = 0;
};

enum class TextureKind { solid, noise, stripes };

const char* to_string(TextureKind kind);

/// Per-sample hand appearance.
struct AppearanceParams {
  Eigen::Vector3d base_color = Eigen::Vector3d::Ones();  // RGB in [0,1]
  double texture_scale = 1.0;                            // [0.5, 2.0]
  TextureKind texture_kind = TextureKind::solid;
};

/// Declared sampling ranges for AppearanceParams, recorded in the dataset
/// manifest. The base-color cap below 1.0 keeps lit hand pixels strictly
/// darker than the pure-white background.
struct AppearanceRanges {
  Eigen::Vector3d base_color_low = Eigen::Vector3d::Constant(0.05);
  Eigen::Vector3d base_color_high = Eigen::Vector3d::Constant(0.92);
  double texture_scale_low = 0.5;
  double texture_scale_high = 2.0;
};

/// Draws each angle independently and uniformly from its joint's range,
/// using the per-sample `joints` stream. Frozen draw order: canonical joint
/// order, one next_in(min, max) each.
JointVector sample_configuration(const JointSpace& space, const SeedSpec& seed);

/// Draws appearance parameters from the per-sample `appearance` stream.
/// Frozen draw order: base color r, g, b; texture_scale; texture_kind.
AppearanceParams sample_appearance(const SeedSpec& seed, const AppearanceRanges& ranges = {});

}  // namespace handsynth
