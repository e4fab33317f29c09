#include "handsynth/joint_space.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "handsynth/default_hand.hpp"
#include "handsynth/errors.hpp"
#include "sha256.hpp"

namespace handsynth {
namespace {

std::vector<std::string> split_ws(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream is(line);
  std::string tok;
  while (is >> tok) out.push_back(tok);
  return out;
}

double parse_number(const std::string& tok, int line_no, const char* field) {
  double v = 0.0;
  auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (res.ec != std::errc() || res.ptr != tok.data() + tok.size())
    throw ValidationError("joint definition line " + std::to_string(line_no) + ": bad " +
                          field + " value '" + tok + "'");
  if (!std::isfinite(v))
    throw ValidationError("joint definition line " + std::to_string(line_no) +
                          ": non-finite " + field);
  return v;
}

// Shortest decimal form that round-trips exactly; stable across runs.
std::string format_number(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

bool valid_name(const std::string& s) {
  if (s.empty()) return false;
  for (char c : s) {
    bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
              (c >= '0' && c <= '9') || c == '_';
    if (!ok) return false;
  }
  return !(s[0] >= '0' && s[0] <= '9');
}

}  // namespace

int JointSpace::index_of(const std::string& name) const {
  auto it = index_.find(name);
  return it == index_.end() ? -1 : it->second;
}

JointSpace JointSpace::parse(const std::string& text) {
  JointSpace space;
  std::istringstream input(text);
  std::string line;
  int line_no = 0;
  while (std::getline(input, line)) {
    ++line_no;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    auto tokens = split_ws(line);
    if (tokens.empty()) continue;
    if (tokens.size() != 8 && tokens.size() != 11)
      throw ValidationError("joint definition line " + std::to_string(line_no) +
                            ": expected 8 or 11 fields, got " +
                            std::to_string(tokens.size()));

    JointSpec spec;
    spec.name = tokens[0];
    spec.parent_link = tokens[1];
    if (!valid_name(spec.name))
      throw ValidationError("joint definition line " + std::to_string(line_no) +
                            ": invalid joint name '" + spec.name + "'");
    if (space.index_.count(spec.name) != 0)
      throw ValidationError("duplicate joint name '" + spec.name + "' (line " +
                            std::to_string(line_no) + ")");

    spec.axis.x() = parse_number(tokens[2], line_no, "axis_x");
    spec.axis.y() = parse_number(tokens[3], line_no, "axis_y");
    spec.axis.z() = parse_number(tokens[4], line_no, "axis_z");
    spec.link_length = parse_number(tokens[5], line_no, "length");
    spec.min_angle = parse_number(tokens[6], line_no, "min");
    spec.max_angle = parse_number(tokens[7], line_no, "max");

    if (std::abs(spec.axis.norm() - 1.0) > 1e-9)
      throw ValidationError("joint '" + spec.name + "' (line " + std::to_string(line_no) +
                            "): axis must be unit length");
    if (spec.link_length < 0.0)
      throw ValidationError("joint '" + spec.name + "' (line " + std::to_string(line_no) +
                            "): negative link length");
    if (!(spec.min_angle <= spec.max_angle))
      throw ValidationError("joint '" + spec.name + "' (line " + std::to_string(line_no) +
                            "): min angle exceeds max angle");

    if (spec.parent_link == "root") {
      spec.parent_index = -1;
      spec.offset.setZero();
    } else {
      int pi = space.index_of(spec.parent_link);
      if (pi < 0)
        throw ValidationError("joint '" + spec.name + "' (line " + std::to_string(line_no) +
                              "): unknown parent link '" + spec.parent_link +
                              "' (parents must be declared first)");
      spec.parent_index = pi;
      spec.offset = Eigen::Vector3d(space.joints_[pi].link_length, 0.0, 0.0);
    }
    if (tokens.size() == 11) {
      spec.offset.x() = parse_number(tokens[8], line_no, "offset_x");
      spec.offset.y() = parse_number(tokens[9], line_no, "offset_y");
      spec.offset.z() = parse_number(tokens[10], line_no, "offset_z");
      spec.offset_explicit = true;
    }

    space.index_[spec.name] = static_cast<int>(space.joints_.size());
    space.joints_.push_back(std::move(spec));
  }

  if (space.joints_.empty())
    throw ValidationError("joint definition contains no joints");

  std::ostringstream canon;
  for (const auto& j : space.joints_) {
    canon << j.name << ' ' << j.parent_link << ' ' << format_number(j.axis.x()) << ' '
          << format_number(j.axis.y()) << ' ' << format_number(j.axis.z()) << ' '
          << format_number(j.link_length) << ' ' << format_number(j.min_angle) << ' '
          << format_number(j.max_angle) << ' ' << format_number(j.offset.x()) << ' '
          << format_number(j.offset.y()) << ' ' << format_number(j.offset.z()) << '\n';
  }
  space.canonical_text_ = canon.str();
  space.fingerprint_ = sha256_hex(space.canonical_text_);
  return space;
}

JointSpace load_joint_space(const std::filesystem::path& definition_file) {
  std::ifstream in(definition_file, std::ios::binary);
  if (!in)
    throw IoError("cannot open joint definition file: " + definition_file.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad())
    throw IoError("failed reading joint definition file: " + definition_file.string());
  return JointSpace::parse(buf.str());
}

const JointSpace& default_joint_space() {
  static const JointSpace space = JointSpace::parse(kDefaultHandDefinition);
  return space;
}

JointVector clamp_to_ranges(const JointSpace& space, const JointVector& q) {
  require_length(space, q, "clamp_to_ranges");
  JointVector out = q;
  for (std::size_t j = 0; j < space.size(); ++j)
    out[static_cast<Eigen::Index>(j)] =
        std::clamp(out[static_cast<Eigen::Index>(j)], space[j].min_angle, space[j].max_angle);
  return out;
}

void require_length(const JointSpace& space, const JointVector& q, const char* where) {
  if (static_cast<std::size_t>(q.size()) != space.size())
    throw ValidationError(std::string(where) + ": joint vector has " +
                          std::to_string(q.size()) + " entries, space has " +
                          std::to_string(space.size()));
}

}  // namespace handsynth
