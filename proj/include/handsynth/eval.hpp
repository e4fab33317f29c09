#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "handsynth/regressor.hpp"
#include "handsynth/render.hpp"

namespace handsynth {

/// radians_squared mirrors the training objective literally; in
/// normalized_squared each residual is divided by its joint's range before
/// squaring, making joints comparable.
enum class MseUnits { radians_squared, normalized_squared };

const char* to_string(MseUnits units);

/// Metrics over the flattened N x J per-(sample, joint) squared errors;
/// std_mse is the population standard deviation.
struct EvalRow {
  std::uint64_t checkpoint_step = 0;
  double avg_mse = 0.0;
  double std_mse = 0.0;
  double min_mse = 0.0;
  double max_mse = 0.0;
  std::uint64_t n_samples = 0;
};

struct EvalReport {
  std::vector<EvalRow> rows;  // ascending by step
  MseUnits units = MseUnits::radians_squared;
  std::string dataset_fingerprint;
};

/// Validation split loaded in memory: images plus truth angles (J x N).
struct EvalDataset {
  std::vector<Image> images;
  Eigen::MatrixXd truths;
  Eigen::VectorXd joint_min;
  Eigen::VectorXd joint_max;
  int image_width = 0;
  int image_height = 0;
  std::string joint_space_fingerprint;
  std::string dataset_fingerprint;  // SHA-256 of manifest.json

  std::uint64_t size() const { return images.size(); }
};

EvalDataset load_val_split(const std::filesystem::path& dataset_dir);

/// Metrics core: squared errors of preds vs truths (both J x N), optionally
/// normalized per joint by (max - min), with a divisor of 1 for zero-width
/// ranges.
EvalRow summarize_predictions(std::uint64_t checkpoint_step, const Eigen::MatrixXd& preds,
                              const Eigen::MatrixXd& truths, const Eigen::VectorXd& joint_min,
                              const Eigen::VectorXd& joint_max, MseUnits units);

EvalRow evaluate_checkpoint(const Checkpoint& checkpoint, const EvalDataset& val, MseUnits units);

/// Evaluates every readable cp-*.json in the directory, rows ascending by
/// step. Unreadable checkpoints are skipped with a warning on stderr.
EvalReport sweep_checkpoints(const std::filesystem::path& checkpoint_dir, const EvalDataset& val,
                             MseUnits units);

enum class ReportFormat { csv, json };

void emit_report(const EvalReport& report, ReportFormat format, std::ostream& out);
void emit_report(const EvalReport& report, ReportFormat format, const std::filesystem::path& out);

EvalReport ingest_report(ReportFormat format, std::istream& in);
EvalReport ingest_report(ReportFormat format, const std::filesystem::path& path);

/// Step with minimal avg_mse; earliest step on ties.
std::uint64_t best_checkpoint(const EvalReport& report);

}  // namespace handsynth
