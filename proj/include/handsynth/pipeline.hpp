#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "handsynth/codec.hpp"
#include "handsynth/joint_space.hpp"
#include "handsynth/render.hpp"
#include "handsynth/sampling.hpp"

namespace handsynth {

inline constexpr const char* kManifestFile = "manifest.json";
inline constexpr const char* kJointDefFile = "joint_space.def";
inline constexpr const char* kGeneratorName = "splitmix64-v1";
inline constexpr int kFormatVersion = 1;

/// Reproducibility record written as manifest.json at the dataset root.
/// Indices [0, train_count) are the train split, the remainder validation.
struct DatasetManifest {
  std::uint64_t master_seed = 0;
  std::uint64_t count = 0;
  std::uint64_t train_count = 0;
  std::uint64_t val_count = 0;
  std::string joint_space_fingerprint;
  CameraConfig camera;
  LightConfig light;
  AppearanceRanges appearance_ranges;
  std::string generator_name = kGeneratorName;
  int format_version = kFormatVersion;
};

/// Desk-scale default split: val_count = min(500, count / 5).
std::uint64_t default_val_count(std::uint64_t count);

DatasetManifest make_manifest(const JointSpace& space, std::uint64_t master_seed,
                              std::uint64_t count, std::uint64_t val_count,
                              const CameraConfig& camera = {}, const LightConfig& light = {});

std::string manifest_to_json(const DatasetManifest& manifest);
DatasetManifest manifest_from_json(const std::string& json_text);
DatasetManifest load_manifest(const std::filesystem::path& dataset_dir);

/// Loads the dataset's canonical joint-definition copy and checks its
/// fingerprint against the manifest.
JointSpace load_dataset_space(const std::filesystem::path& dataset_dir);

/// Renders record `index` in isolation: (image, label string). Record bytes
/// are a pure function of (manifest, index).
std::pair<Image, AngleString> make_record(const JointSpace& space, const DatasetManifest& manifest,
                                          std::uint64_t index);

struct GenerationSummary {
  std::uint64_t count = 0;
  double wall_time_s = 0.0;
  std::uint64_t bytes_written = 0;
};

/// Generates all records with a worker pool over sample indices, then writes
/// the joint-definition copy and, last, the manifest as the commit marker.
/// Output bytes are identical for any `workers` value.
GenerationSummary generate_dataset(const JointSpace& space, const DatasetManifest& manifest,
                                   const std::filesystem::path& out, int workers);

struct VerificationFailure {
  std::uint64_t index;  // UINT64_MAX for dataset-level failures
  std::string cause;
};

struct VerificationReport {
  std::uint64_t records_checked = 0;
  std::vector<VerificationFailure> failures;

  bool ok() const { return failures.empty(); }
};

/// Checks every label (strict parse, ranges), every image (decode at the
/// manifest resolution), and re-derives a 1% sample of records from seeds,
/// confirming byte equality.
VerificationReport verify_dataset(const std::filesystem::path& dataset_dir);

}  // namespace handsynth
