#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "handsynth/render.hpp"

namespace handsynth {

/// Encodes an image as an 8-bit RGB PNG (no alpha). Fixed compression
/// settings so identical pixels yield identical bytes.
std::vector<std::uint8_t> encode_png_bytes(const Image& image);
void encode_png(const Image& image, const std::filesystem::path& out);

/// Decodes an 8-bit RGB PNG. Throws IoError on missing or corrupt files.
Image decode_png_bytes(const std::vector<std::uint8_t>& bytes);
Image decode_png(const std::filesystem::path& path);

}  // namespace handsynth
