#include "handsynth/sampling.hpp"

#include "handsynth/errors.hpp"

namespace handsynth {

const char* to_string(TextureKind kind) {
  switch (kind) {
    case TextureKind::solid: return "solid";
    case TextureKind::noise: return "noise";
    case TextureKind::stripes: return "stripes";
  }
  return "solid";
}

JointVector sample_configuration(const JointSpace& space, const SeedSpec& seed) {
  SplitMix64 rng(derive_sample_seed(seed.master_seed, seed.sample_index, SeedStream::joints));
  JointVector q(static_cast<Eigen::Index>(space.size()));
  for (std::size_t j = 0; j < space.size(); ++j)
    q[static_cast<Eigen::Index>(j)] = rng.next_in(space[j].min_angle, space[j].max_angle);
  return q;
}

AppearanceParams sample_appearance(const SeedSpec& seed, const AppearanceRanges& ranges) {
  for (int c = 0; c < 3; ++c) {
    if (!(ranges.base_color_low[c] <= ranges.base_color_high[c]))
      throw ValidationError("sample_appearance: base color range inverted");
  }
  if (!(ranges.texture_scale_low <= ranges.texture_scale_high) || ranges.texture_scale_low <= 0.0)
    throw ValidationError("sample_appearance: bad texture scale range");

  SplitMix64 rng(derive_sample_seed(seed.master_seed, seed.sample_index, SeedStream::appearance));
  AppearanceParams params;
  for (int c = 0; c < 3; ++c)
    params.base_color[c] = rng.next_in(ranges.base_color_low[c], ranges.base_color_high[c]);
  params.texture_scale = rng.next_in(ranges.texture_scale_low, ranges.texture_scale_high);
  switch (rng.next_u64() % 3) {
    case 0: params.texture_kind = TextureKind::solid; break;
    case 1: params.texture_kind = TextureKind::noise; break;
    default: params.texture_kind = TextureKind::stripes; break;
  }
  return params;
}

}  // namespace handsynth
