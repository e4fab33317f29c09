#include "handsynth/eval.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

#include "handsynth/codec.hpp"
#include "handsynth/errors.hpp"
#include "handsynth/pipeline.hpp"
#include "sha256.hpp"

namespace handsynth {
namespace {

using nlohmann::json;

// Shortest decimal that round-trips the exact double.
std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

double parse_double_field(const std::string& token, int line_no) {
  double v = 0.0;
  auto res = std::from_chars(token.data(), token.data() + token.size(), v);
  if (res.ec != std::errc() || res.ptr != token.data() + token.size())
    throw ValidationError("report line " + std::to_string(line_no) + ": bad number '" +
                          token + "'");
  return v;
}

std::uint64_t parse_u64_field(const std::string& token, int line_no) {
  std::uint64_t v = 0;
  auto res = std::from_chars(token.data(), token.data() + token.size(), v);
  if (res.ec != std::errc() || res.ptr != token.data() + token.size())
    throw ValidationError("report line " + std::to_string(line_no) + ": bad integer '" +
                          token + "'");
  return v;
}

MseUnits units_from_string(const std::string& s) {
  if (s == "radians_squared") return MseUnits::radians_squared;
  if (s == "normalized_squared") return MseUnits::normalized_squared;
  throw ValidationError("unknown units '" + s + "'");
}

}  // namespace

const char* to_string(MseUnits units) {
  switch (units) {
    case MseUnits::radians_squared: return "radians_squared";
    case MseUnits::normalized_squared: return "normalized_squared";
  }
  return "radians_squared";
}

EvalDataset load_val_split(const std::filesystem::path& dataset_dir) {
  DatasetManifest manifest = load_manifest(dataset_dir);
  JointSpace space = load_dataset_space(dataset_dir);

  EvalDataset val;
  val.image_width = manifest.camera.width;
  val.image_height = manifest.camera.height;
  val.joint_space_fingerprint = space.fingerprint();
  {
    std::ifstream in(dataset_dir / kManifestFile, std::ios::binary);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    val.dataset_fingerprint = sha256_hex(text);
  }

  const auto J = static_cast<Eigen::Index>(space.size());
  const auto n = static_cast<Eigen::Index>(manifest.val_count);
  val.truths.resize(J, n);
  val.images.reserve(static_cast<std::size_t>(n));
  val.joint_min.resize(J);
  val.joint_max.resize(J);
  for (Eigen::Index j = 0; j < J; ++j) {
    val.joint_min[j] = space[static_cast<std::size_t>(j)].min_angle;
    val.joint_max[j] = space[static_cast<std::size_t>(j)].max_angle;
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    auto index = manifest.train_count + static_cast<std::uint64_t>(i);
    auto [image, q] = read_record(space, dataset_dir, index);
    if (image.width != val.image_width || image.height != val.image_height)
      throw ValidationError("validation record " + std::to_string(index) +
                            " has unexpected dimensions");
    val.truths.col(i) = q;
    val.images.push_back(std::move(image));
  }
  return val;
}

EvalRow summarize_predictions(std::uint64_t checkpoint_step, const Eigen::MatrixXd& preds,
                              const Eigen::MatrixXd& truths, const Eigen::VectorXd& joint_min,
                              const Eigen::VectorXd& joint_max, MseUnits units) {
  if (preds.rows() != truths.rows() || preds.cols() != truths.cols())
    throw ValidationError("summarize_predictions: shape mismatch");
  if (preds.size() == 0) throw ValidationError("summarize_predictions: empty prediction set");
  if (joint_min.size() != preds.rows() || joint_max.size() != preds.rows())
    throw ValidationError("summarize_predictions: range vectors do not match joint count");

  Eigen::MatrixXd residual = preds - truths;
  if (units == MseUnits::normalized_squared) {
    for (Eigen::Index j = 0; j < residual.rows(); ++j) {
      double range = joint_max[j] - joint_min[j];
      residual.row(j) /= range > 0.0 ? range : 1.0;
    }
  }
  Eigen::ArrayXXd cells = residual.array().square();

  EvalRow row;
  row.checkpoint_step = checkpoint_step;
  row.n_samples = static_cast<std::uint64_t>(preds.cols());
  row.avg_mse = cells.mean();
  row.std_mse = std::sqrt((cells - row.avg_mse).square().mean());
  row.min_mse = cells.minCoeff();
  row.max_mse = cells.maxCoeff();
  return row;
}

EvalRow evaluate_checkpoint(const Checkpoint& checkpoint, const EvalDataset& val,
                            MseUnits units) {
  if (val.size() == 0) throw ValidationError("evaluate_checkpoint: empty validation set");
  if (checkpoint.image_width != val.image_width || checkpoint.image_height != val.image_height)
    throw ValidationError("evaluate_checkpoint: checkpoint resolution " +
                          std::to_string(checkpoint.image_width) + "x" +
                          std::to_string(checkpoint.image_height) +
                          " does not match dataset " + std::to_string(val.image_width) + "x" +
                          std::to_string(val.image_height));
  if (!checkpoint.joint_space_fingerprint.empty() && !val.joint_space_fingerprint.empty() &&
      checkpoint.joint_space_fingerprint != val.joint_space_fingerprint)
    throw ValidationError("evaluate_checkpoint: joint space fingerprint mismatch");
  if (checkpoint.params.joint_count() != val.truths.rows())
    throw ValidationError("evaluate_checkpoint: joint count mismatch");

  const ModelParams& p = checkpoint.params;
  Eigen::MatrixXd features(p.feature_size(), static_cast<Eigen::Index>(val.size()));
  for (Eigen::Index i = 0; i < features.cols(); ++i)
    features.col(i) = extract_features(val.images[static_cast<std::size_t>(i)],
                                       p.feature_width, p.feature_height);
  Eigen::MatrixXd preds = predict_batch(p, features);
  return summarize_predictions(checkpoint.step, preds, val.truths, val.joint_min, val.joint_max,
                               units);
}

EvalReport sweep_checkpoints(const std::filesystem::path& checkpoint_dir, const EvalDataset& val,
                             MseUnits units) {
  if (!std::filesystem::is_directory(checkpoint_dir))
    throw IoError("checkpoint directory not found: " + checkpoint_dir.string());

  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(checkpoint_dir)) {
    if (!entry.is_regular_file()) continue;
    const std::string name = entry.path().filename().string();
    if (name.rfind("cp-", 0) == 0 && entry.path().extension() == ".json")
      files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());

  EvalReport report;
  report.units = units;
  report.dataset_fingerprint = val.dataset_fingerprint;
  for (const auto& path : files) {
    try {
      Checkpoint cp = load_checkpoint(path);
      report.rows.push_back(evaluate_checkpoint(cp, val, units));
    } catch (const std::exception& e) {
      std::cerr << "warning: skipping " << path.string() << ": " << e.what() << "\n";
    }
  }
  std::sort(report.rows.begin(), report.rows.end(),
            [](const EvalRow& a, const EvalRow& b) { return a.checkpoint_step < b.checkpoint_step; });
  for (std::size_t i = 1; i < report.rows.size(); ++i) {
    if (report.rows[i].checkpoint_step == report.rows[i - 1].checkpoint_step)
      throw ValidationError("sweep_checkpoints: duplicate checkpoint step " +
                            std::to_string(report.rows[i].checkpoint_step));
  }
  return report;
}

void emit_report(const EvalReport& report, ReportFormat format, std::ostream& out) {
  if (format == ReportFormat::csv) {
    out << "# units=" << to_string(report.units) << "\n";
    out << "# dataset_fingerprint=" << report.dataset_fingerprint << "\n";
    out << "checkpoint,avg_mse,std_mse,min_mse,max_mse,n_samples\n";
    for (const EvalRow& r : report.rows) {
      out << r.checkpoint_step << ',' << format_double(r.avg_mse) << ','
          << format_double(r.std_mse) << ',' << format_double(r.min_mse) << ','
          << format_double(r.max_mse) << ',' << r.n_samples << "\n";
    }
  } else {
    json j;
    j["units"] = to_string(report.units);
    j["dataset_fingerprint"] = report.dataset_fingerprint;
    j["rows"] = json::array();
    for (const EvalRow& r : report.rows) {
      j["rows"].push_back({
          {"checkpoint", r.checkpoint_step},
          {"avg_mse", r.avg_mse},
          {"std_mse", r.std_mse},
          {"min_mse", r.min_mse},
          {"max_mse", r.max_mse},
          {"n_samples", r.n_samples},
      });
    }
    out << j.dump(2) << "\n";
  }
  if (!out) throw IoError("failed writing evaluation report");
}

void emit_report(const EvalReport& report, ReportFormat format,
                 const std::filesystem::path& out) {
  std::ofstream f(out, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot open for writing: " + out.string());
  emit_report(report, format, f);
}

EvalReport ingest_report(ReportFormat format, std::istream& in) {
  EvalReport report;
  if (format == ReportFormat::csv) {
    std::string line;
    int line_no = 0;
    bool saw_header = false;
    while (std::getline(in, line)) {
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty()) continue;
      if (line[0] == '#') {
        auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        std::string key = line.substr(1, eq - 1);
        std::string value = line.substr(eq + 1);
        key.erase(0, key.find_first_not_of(' '));
        key.erase(key.find_last_not_of(' ') + 1);
        if (key == "units") report.units = units_from_string(value);
        else if (key == "dataset_fingerprint") report.dataset_fingerprint = value;
        continue;
      }
      if (line.rfind("checkpoint,", 0) == 0) {
        saw_header = true;
        continue;
      }
      std::vector<std::string> fields;
      std::stringstream ss(line);
      std::string field;
      while (std::getline(ss, field, ',')) fields.push_back(field);
      if (fields.size() != 6)
        throw ValidationError("report line " + std::to_string(line_no) +
                              ": expected 6 fields, got " + std::to_string(fields.size()));
      EvalRow row;
      row.checkpoint_step = parse_u64_field(fields[0], line_no);
      row.avg_mse = parse_double_field(fields[1], line_no);
      row.std_mse = parse_double_field(fields[2], line_no);
      row.min_mse = parse_double_field(fields[3], line_no);
      row.max_mse = parse_double_field(fields[4], line_no);
      row.n_samples = parse_u64_field(fields[5], line_no);
      report.rows.push_back(row);
    }
    if (!saw_header && report.rows.empty())
      throw ValidationError("report: no header or rows found");
  } else {
    json j;
    try {
      j = json::parse(in);
    } catch (const json::exception& e) {
      throw ValidationError(std::string("report: invalid JSON: ") + e.what());
    }
    try {
      report.units = units_from_string(j.at("units").get<std::string>());
      report.dataset_fingerprint = j.at("dataset_fingerprint").get<std::string>();
      for (const json& r : j.at("rows")) {
        EvalRow row;
        row.checkpoint_step = r.at("checkpoint").get<std::uint64_t>();
        row.avg_mse = r.at("avg_mse").get<double>();
        row.std_mse = r.at("std_mse").get<double>();
        row.min_mse = r.at("min_mse").get<double>();
        row.max_mse = r.at("max_mse").get<double>();
        row.n_samples = r.at("n_samples").get<std::uint64_t>();
        report.rows.push_back(row);
      }
    } catch (const json::exception& e) {
      throw ValidationError(std::string("report: ") + e.what());
    }
  }
  return report;
}

EvalReport ingest_report(ReportFormat format, const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open report: " + path.string());
  return ingest_report(format, in);
}

std::uint64_t best_checkpoint(const EvalReport& report) {
  if (report.rows.empty()) throw ValidationError("best_checkpoint: empty report");
  const EvalRow* best = &report.rows.front();
  for (const EvalRow& r : report.rows) {
    if (r.avg_mse < best->avg_mse ||
        (r.avg_mse == best->avg_mse && r.checkpoint_step < best->checkpoint_step))
      best = &r;
  }
  return best->checkpoint_step;
}

}  // namespace handsynth
