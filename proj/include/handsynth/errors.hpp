#pragma once

#include <stdexcept>
#include <string>

namespace handsynth {

/// Filesystem or OS failure. The CLI maps these to exit code 3.
struct IoError : std::runtime_error {
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

/// Contract violation in inputs: bad joint definitions, mismatched shapes,
/// corrupt datasets. The CLI maps these to exit code 4.
struct ValidationError : std::runtime_error {
  explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace handsynth
