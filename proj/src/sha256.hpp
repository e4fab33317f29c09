#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace handsynth {

/// Lowercase hex SHA-256 digest.
std::string sha256_hex(const void* data, std::size_t size);
std::string sha256_hex(const std::string& text);
std::string sha256_hex(const std::vector<std::uint8_t>& bytes);

}  // namespace handsynth
