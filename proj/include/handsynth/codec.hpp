#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "handsynth/joint_space.hpp"
#include "handsynth/render.hpp"

namespace handsynth {

/// Concatenated `<name>value</name>` elements in canonical joint order.
using AngleString = std::string;

enum class IssueKind {
  missing_tag,
  duplicate_tag,
  unknown_tag,
  malformed_number,
  mismatched_close,
  out_of_range,
};

const char* to_string(IssueKind kind);

struct ParseIssue {
  IssueKind kind;
  std::string joint;     // empty when no joint applies
  std::size_t position;  // character offset into the input
  bool fatal;
};

/// Parse outcome: `vector` is present iff no fatal issue was found under the
/// active mode.
struct ParseReport {
  std::optional<JointVector> vector;
  std::vector<ParseIssue> issues;

  bool ok() const { return vector.has_value(); }
  bool has_fatal() const;
};

/// Shortest decimal with at most six fractional digits that round-trips the
/// angle within 1e-6.
std::string format_angle(double value);

/// Emits elements in canonical order, no whitespace between them.
AngleString encode_angles(const JointSpace& space, const JointVector& q);

/// Accepts only the exact canonical order and tag set. Any deviation is a
/// fatal issue; the parser never throws on malformed text. Values more than
/// 1e-6 outside their joint's range are fatal out_of_range.
ParseReport parse_angles_strict(const JointSpace& space, std::string_view text);

/// Tolerates whitespace, arbitrary tag order, and surrounding non-tag text.
/// Missing and duplicate tags are fatal; unknown tags warn; out-of-range
/// values are clamped with a warning.
ParseReport parse_angles_lenient(const JointSpace& space, std::string_view text);

/// Dataset record layout: images/<8-digit-index>.png, labels/<same>.txt.
struct RecordPaths {
  std::filesystem::path image;
  std::filesystem::path label;
};

RecordPaths record_paths(const std::filesystem::path& dir, std::uint64_t index);

/// Writes the image and the label file (the AngleString plus a newline).
void write_record(const std::filesystem::path& dir, std::uint64_t index, const Image& image,
                  const AngleString& angles);

/// Exact inverse of write_record; strict-parses the label.
std::pair<Image, JointVector> read_record(const JointSpace& space,
                                          const std::filesystem::path& dir, std::uint64_t index);

}  // namespace handsynth
