#include "handsynth/codec.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "handsynth/errors.hpp"
#include "handsynth/image_io.hpp"

namespace handsynth {
namespace {

bool name_start(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_';
}

bool name_char(char c) { return name_start(c) || (c >= '0' && c <= '9'); }

// Lexes an identifier at pos; returns its length (0 if none).
std::size_t lex_name(std::string_view text, std::size_t pos) {
  if (pos >= text.size() || !name_start(text[pos])) return 0;
  std::size_t end = pos + 1;
  while (end < text.size() && name_char(text[end])) ++end;
  return end - pos;
}

bool parse_double(std::string_view token, double& out) {
  if (token.empty()) return false;
  const char* first = token.data();
  const char* last = token.data() + token.size();
  auto res = std::from_chars(first, last, out);
  return res.ec == std::errc() && res.ptr == last && std::isfinite(out);
}

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; }

std::string_view trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && is_space(s[b])) ++b;
  while (e > b && is_space(s[e - 1])) --e;
  return s.substr(b, e - b);
}

}  // namespace

const char* to_string(IssueKind kind) {
  switch (kind) {
    case IssueKind::missing_tag: return "missing_tag";
    case IssueKind::duplicate_tag: return "duplicate_tag";
    case IssueKind::unknown_tag: return "unknown_tag";
    case IssueKind::malformed_number: return "malformed_number";
    case IssueKind::mismatched_close: return "mismatched_close";
    case IssueKind::out_of_range: return "out_of_range";
  }
  return "unknown_tag";
}

bool ParseReport::has_fatal() const {
  return std::any_of(issues.begin(), issues.end(),
                     [](const ParseIssue& i) { return i.fatal; });
}

std::string format_angle(double value) {
  char buf[64];
  for (int prec = 0; prec <= 6; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*f", prec, value);
    double back = 0.0;
    std::sscanf(buf, "%lf", &back);
    if (std::abs(back - value) <= 1e-6) break;
  }
  std::string s(buf);
  if (s == "-0") s = "0";
  return s;
}

AngleString encode_angles(const JointSpace& space, const JointVector& q) {
  require_length(space, q, "encode_angles");
  AngleString out;
  for (std::size_t j = 0; j < space.size(); ++j) {
    const std::string& name = space[j].name;
    out += '<';
    out += name;
    out += '>';
    out += format_angle(q[static_cast<Eigen::Index>(j)]);
    out += "</";
    out += name;
    out += '>';
  }
  return out;
}

ParseReport parse_angles_strict(const JointSpace& space, std::string_view text) {
  ParseReport rep;
  const std::size_t n = text.size();
  const auto J = static_cast<Eigen::Index>(space.size());
  JointVector q(J);
  std::size_t pos = 0;

  auto fatal = [&rep](IssueKind kind, std::string joint, std::size_t at) {
    rep.issues.push_back({kind, std::move(joint), at, true});
  };

  for (Eigen::Index j = 0; j < J; ++j) {
    const std::string& expected = space[static_cast<std::size_t>(j)].name;
    if (pos >= n) {
      fatal(IssueKind::missing_tag, expected, pos);
      return rep;
    }
    if (text[pos] != '<') {
      fatal(IssueKind::unknown_tag, "", pos);
      return rep;
    }
    std::size_t name_len = lex_name(text, pos + 1);
    if (name_len == 0 || pos + 1 + name_len >= n || text[pos + 1 + name_len] != '>') {
      fatal(IssueKind::unknown_tag, "", pos);
      return rep;
    }
    std::string name(text.substr(pos + 1, name_len));
    if (name != expected) {
      // Reordered or foreign tag: report the first out-of-sequence tag.
      fatal(IssueKind::unknown_tag, name, pos);
      return rep;
    }
    std::size_t value_start = pos + 1 + name_len + 1;
    std::size_t lt = text.find('<', value_start);
    if (lt == std::string_view::npos) {
      fatal(IssueKind::mismatched_close, expected, n);
      return rep;
    }
    double value = 0.0;
    if (!parse_double(text.substr(value_start, lt - value_start), value)) {
      fatal(IssueKind::malformed_number, expected, value_start);
      return rep;
    }
    // Close tag must be exactly </expected>.
    std::string close = "</" + expected + ">";
    if (text.substr(lt, close.size()) != close) {
      fatal(IssueKind::mismatched_close, expected, lt);
      return rep;
    }
    const JointSpec& spec = space[static_cast<std::size_t>(j)];
    if (value < spec.min_angle - 1e-6 || value > spec.max_angle + 1e-6) {
      fatal(IssueKind::out_of_range, expected, value_start);
      return rep;
    }
    q[j] = value;
    pos = lt + close.size();
  }

  if (pos != n) {
    // Trailing content. A valid tag for a known joint is a duplicate.
    std::size_t name_len = pos < n && text[pos] == '<' ? lex_name(text, pos + 1) : 0;
    std::string name;
    if (name_len > 0 && pos + 1 + name_len < n && text[pos + 1 + name_len] == '>')
      name = std::string(text.substr(pos + 1, name_len));
    if (!name.empty() && space.index_of(name) >= 0)
      fatal(IssueKind::duplicate_tag, name, pos);
    else
      fatal(IssueKind::unknown_tag, name, pos);
    return rep;
  }

  rep.vector = std::move(q);
  return rep;
}

ParseReport parse_angles_lenient(const JointSpace& space, std::string_view text) {
  ParseReport rep;
  const std::size_t n = text.size();
  const std::size_t J = space.size();
  std::vector<bool> have(J, false);
  std::vector<bool> attempted(J, false);
  std::vector<double> values(J, 0.0);

  auto issue = [&rep](IssueKind kind, std::string joint, std::size_t at, bool fatal) {
    rep.issues.push_back({kind, std::move(joint), at, fatal});
  };

  std::size_t pos = 0;
  while (pos < n) {
    if (text[pos] != '<') {
      ++pos;  // surrounding junk is tolerated
      continue;
    }
    std::size_t tag_start = pos;
    if (pos + 1 < n && text[pos + 1] == '/') {
      // Stray close tag; skip it as junk.
      std::size_t name_len = lex_name(text, pos + 2);
      if (name_len > 0 && pos + 2 + name_len < n && text[pos + 2 + name_len] == '>')
        pos = pos + 2 + name_len + 1;
      else
        ++pos;
      continue;
    }
    std::size_t name_len = lex_name(text, pos + 1);
    if (name_len == 0 || pos + 1 + name_len >= n || text[pos + 1 + name_len] != '>') {
      ++pos;
      continue;
    }
    std::string name(text.substr(pos + 1, name_len));
    pos = pos + 1 + name_len + 1;
    int ji = space.index_of(name);
    if (ji < 0) {
      issue(IssueKind::unknown_tag, name, tag_start, false);
      continue;
    }

    std::size_t lt = text.find('<', pos);
    if (lt == std::string_view::npos) {
      attempted[static_cast<std::size_t>(ji)] = true;
      issue(IssueKind::mismatched_close, name, n, true);
      pos = n;
      continue;
    }
    std::string_view value_text = trim(text.substr(pos, lt - pos));
    double value = 0.0;
    bool value_ok = parse_double(value_text, value);

    // Expect </name> at lt; anything else is a mismatched close.
    std::string close = "</" + name + ">";
    bool close_ok = text.substr(lt, close.size()) == close;
    std::size_t after = close_ok ? lt + close.size() : lt;
    if (!close_ok) {
      attempted[static_cast<std::size_t>(ji)] = true;
      issue(IssueKind::mismatched_close, name, lt, true);
      pos = after;
      continue;
    }
    pos = after;
    if (!value_ok) {
      attempted[static_cast<std::size_t>(ji)] = true;
      issue(IssueKind::malformed_number, name, tag_start, true);
      continue;
    }
    if (have[static_cast<std::size_t>(ji)]) {
      issue(IssueKind::duplicate_tag, name, tag_start, true);
      continue;
    }
    const JointSpec& spec = space[static_cast<std::size_t>(ji)];
    if (value < spec.min_angle || value > spec.max_angle) {
      issue(IssueKind::out_of_range, name, tag_start, false);
      value = std::clamp(value, spec.min_angle, spec.max_angle);
    }
    have[static_cast<std::size_t>(ji)] = true;
    values[static_cast<std::size_t>(ji)] = value;
  }

  for (std::size_t j = 0; j < J; ++j) {
    if (!have[j] && !attempted[j])
      issue(IssueKind::missing_tag, space[j].name, n, true);
  }

  if (!rep.has_fatal()) {
    JointVector q(static_cast<Eigen::Index>(J));
    for (std::size_t j = 0; j < J; ++j) q[static_cast<Eigen::Index>(j)] = values[j];
    rep.vector = std::move(q);
  }
  return rep;
}

RecordPaths record_paths(const std::filesystem::path& dir, std::uint64_t index) {
  char name[32];
  std::snprintf(name, sizeof name, "%08llu", static_cast<unsigned long long>(index));
  RecordPaths paths;
  paths.image = dir / "images" / (std::string(name) + ".png");
  paths.label = dir / "labels" / (std::string(name) + ".txt");
  return paths;
}

void write_record(const std::filesystem::path& dir, std::uint64_t index, const Image& image,
                  const AngleString& angles) {
  RecordPaths paths = record_paths(dir, index);
  std::filesystem::create_directories(paths.image.parent_path());
  std::filesystem::create_directories(paths.label.parent_path());
  encode_png(image, paths.image);
  std::ofstream label(paths.label, std::ios::binary | std::ios::trunc);
  if (!label) throw IoError("cannot open for writing: " + paths.label.string());
  label << angles << '\n';
  if (!label) throw IoError("failed writing: " + paths.label.string());
}

std::pair<Image, JointVector> read_record(const JointSpace& space,
                                          const std::filesystem::path& dir,
                                          std::uint64_t index) {
  RecordPaths paths = record_paths(dir, index);
  if (!std::filesystem::exists(paths.image) || !std::filesystem::exists(paths.label))
    throw IoError("record " + std::to_string(index) + " not found: expected " +
                  paths.image.string() + " and " + paths.label.string());
  Image image = decode_png(paths.image);
  std::ifstream in(paths.label, std::ios::binary);
  if (!in) throw IoError("cannot open label: " + paths.label.string());
  std::string label((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("failed reading label: " + paths.label.string());
  // The trailing newline is file framing, not part of the angle string.
  while (!label.empty() && is_space(label.back())) label.pop_back();
  ParseReport rep = parse_angles_strict(space, label);
  if (!rep.ok()) {
    const ParseIssue* first = nullptr;
    for (const ParseIssue& i : rep.issues)
      if (i.fatal) { first = &i; break; }
    std::string detail = first == nullptr
                             ? "unparseable"
                             : std::string(to_string(first->kind)) + " at offset " +
                                   std::to_string(first->position);
    throw ValidationError("label " + paths.label.string() + ": " + detail);
  }
  return {std::move(image), *rep.vector};
}

}  // namespace handsynth
