#include "handsynth/pipeline.hpp"

#include <nlohmann/json.hpp>

#include <atomic>
#include <chrono>
#include <exception>
#include <fstream>
#include <mutex>
#include <thread>

#include "handsynth/errors.hpp"
#include "handsynth/image_io.hpp"
#include "handsynth/kinematics.hpp"
#include "handsynth/mesh.hpp"

namespace handsynth {
namespace {

using nlohmann::json;

json vec3_to_json(const Eigen::Vector3d& v) { return json::array({v.x(), v.y(), v.z()}); }

Eigen::Vector3d vec3_from_json(const json& j, const char* field) {
  if (!j.is_array() || j.size() != 3)
    throw ValidationError(std::string("manifest: field '") + field +
                          "' must be an array of 3 numbers");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

std::string read_text_file(const std::filesystem::path& path, const char* what) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(std::string("cannot open ") + what + ": " + path.string());
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError(std::string("failed reading ") + what + ": " + path.string());
  return text;
}

std::vector<std::uint8_t> read_binary_file(const std::filesystem::path& path, const char* what) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(std::string("cannot open ") + what + ": " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError(std::string("failed reading ") + what + ": " + path.string());
  return bytes;
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  out << text;
  if (!out) throw IoError("failed writing: " + path.string());
}

}  // namespace

std::uint64_t default_val_count(std::uint64_t count) {
  return std::min<std::uint64_t>(500, count / 5);
}

DatasetManifest make_manifest(const JointSpace& space, std::uint64_t master_seed,
                              std::uint64_t count, std::uint64_t val_count,
                              const CameraConfig& camera, const LightConfig& light) {
  if (val_count > count)
    throw ValidationError("make_manifest: val_count exceeds count");
  DatasetManifest m;
  m.master_seed = master_seed;
  m.count = count;
  m.val_count = val_count;
  m.train_count = count - val_count;
  m.joint_space_fingerprint = space.fingerprint();
  m.camera = camera;
  m.light = light;
  return m;
}

std::string manifest_to_json(const DatasetManifest& m) {
  json j;
  j["master_seed"] = m.master_seed;
  j["count"] = m.count;
  j["train_count"] = m.train_count;
  j["val_count"] = m.val_count;
  j["joint_space_fingerprint"] = m.joint_space_fingerprint;
  j["camera"] = {
      {"position", vec3_to_json(m.camera.position)},
      {"look_at", vec3_to_json(m.camera.look_at)},
      {"up", vec3_to_json(m.camera.up)},
      {"vertical_fov", m.camera.vertical_fov},
      {"width", m.camera.width},
      {"height", m.camera.height},
  };
  j["light"] = {
      {"position", vec3_to_json(m.light.position)},
      {"intensity", m.light.intensity},
  };
  j["appearance_ranges"] = {
      {"base_color_low", vec3_to_json(m.appearance_ranges.base_color_low)},
      {"base_color_high", vec3_to_json(m.appearance_ranges.base_color_high)},
      {"texture_scale_low", m.appearance_ranges.texture_scale_low},
      {"texture_scale_high", m.appearance_ranges.texture_scale_high},
      {"texture_kinds", json::array({"solid", "noise", "stripes"})},
  };
  j["generator_name"] = m.generator_name;
  j["format_version"] = m.format_version;
  return j.dump(2) + "\n";
}

DatasetManifest manifest_from_json(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ValidationError(std::string("manifest: invalid JSON: ") + e.what());
  }
  DatasetManifest m;
  try {
    m.master_seed = j.at("master_seed").get<std::uint64_t>();
    m.count = j.at("count").get<std::uint64_t>();
    m.train_count = j.at("train_count").get<std::uint64_t>();
    m.val_count = j.at("val_count").get<std::uint64_t>();
    m.joint_space_fingerprint = j.at("joint_space_fingerprint").get<std::string>();
    const json& cam = j.at("camera");
    m.camera.position = vec3_from_json(cam.at("position"), "camera.position");
    m.camera.look_at = vec3_from_json(cam.at("look_at"), "camera.look_at");
    m.camera.up = vec3_from_json(cam.at("up"), "camera.up");
    m.camera.vertical_fov = cam.at("vertical_fov").get<double>();
    m.camera.width = cam.at("width").get<int>();
    m.camera.height = cam.at("height").get<int>();
    const json& light = j.at("light");
    m.light.position = vec3_from_json(light.at("position"), "light.position");
    m.light.intensity = light.at("intensity").get<double>();
    const json& ar = j.at("appearance_ranges");
    m.appearance_ranges.base_color_low =
        vec3_from_json(ar.at("base_color_low"), "appearance_ranges.base_color_low");
    m.appearance_ranges.base_color_high =
        vec3_from_json(ar.at("base_color_high"), "appearance_ranges.base_color_high");
    m.appearance_ranges.texture_scale_low = ar.at("texture_scale_low").get<double>();
    m.appearance_ranges.texture_scale_high = ar.at("texture_scale_high").get<double>();
    m.generator_name = j.at("generator_name").get<std::string>();
    m.format_version = j.at("format_version").get<int>();
  } catch (const json::exception& e) {
    throw ValidationError(std::string("manifest: ") + e.what());
  }
  if (m.format_version != kFormatVersion)
    throw ValidationError("manifest: unsupported format_version " +
                          std::to_string(m.format_version));
  if (m.generator_name != kGeneratorName)
    throw ValidationError("manifest: unknown generator '" + m.generator_name + "'");
  if (m.train_count + m.val_count != m.count)
    throw ValidationError("manifest: train_count + val_count != count");
  if (m.joint_space_fingerprint.empty())
    throw ValidationError("manifest: empty joint_space_fingerprint");
  if (m.camera.width <= 0 || m.camera.height <= 0)
    throw ValidationError("manifest: non-positive image dimensions");
  return m;
}

DatasetManifest load_manifest(const std::filesystem::path& dataset_dir) {
  std::filesystem::path path = dataset_dir / kManifestFile;
  if (!std::filesystem::exists(path))
    throw IoError("dataset incomplete or not a dataset: missing " + path.string());
  return manifest_from_json(read_text_file(path, "manifest"));
}

JointSpace load_dataset_space(const std::filesystem::path& dataset_dir) {
  DatasetManifest manifest = load_manifest(dataset_dir);
  JointSpace space = load_joint_space(dataset_dir / kJointDefFile);
  if (space.fingerprint() != manifest.joint_space_fingerprint)
    throw ValidationError("dataset joint definition does not match manifest fingerprint");
  return space;
}

std::pair<Image, AngleString> make_record(const JointSpace& space,
                                          const DatasetManifest& manifest, std::uint64_t index) {
  if (space.fingerprint() != manifest.joint_space_fingerprint)
    throw ValidationError("make_record: joint space does not match manifest");
  if (index >= manifest.count)
    throw ValidationError("make_record: index " + std::to_string(index) +
                          " out of range for count " + std::to_string(manifest.count));
  SeedSpec seed{manifest.master_seed, index};
  JointVector q = sample_configuration(space, seed);
  AppearanceParams appearance = sample_appearance(seed, manifest.appearance_ranges);
  HandPose pose = forward_kinematics(space, q);
  TriangleMesh mesh = build_hand_mesh(space, pose, appearance);
  Image image = render(mesh, manifest.camera, manifest.light);
  return {std::move(image), encode_angles(space, q)};
}

GenerationSummary generate_dataset(const JointSpace& space, const DatasetManifest& manifest,
                                   const std::filesystem::path& out, int workers) {
  if (workers < 1 || workers > 256)
    throw ValidationError("generate_dataset: workers must be in [1, 256]");
  if (manifest.train_count + manifest.val_count != manifest.count)
    throw ValidationError("generate_dataset: inconsistent split counts");
  if (space.fingerprint() != manifest.joint_space_fingerprint)
    throw ValidationError("generate_dataset: joint space does not match manifest");

  auto start = std::chrono::steady_clock::now();
  std::filesystem::create_directories(out / "images");
  std::filesystem::create_directories(out / "labels");

  std::atomic<std::uint64_t> next{0};
  std::atomic<std::uint64_t> bytes{0};
  std::atomic<bool> failed{false};
  std::mutex error_mutex;
  std::exception_ptr first_error;

  auto work = [&]() {
    for (;;) {
      std::uint64_t i = next.fetch_add(1);
      if (i >= manifest.count || failed.load()) return;
      try {
        auto [image, label] = make_record(space, manifest, i);
        std::vector<std::uint8_t> png = encode_png_bytes(image);
        RecordPaths paths = record_paths(out, i);
        {
          std::ofstream img_out(paths.image, std::ios::binary | std::ios::trunc);
          if (!img_out) throw IoError("cannot open for writing: " + paths.image.string());
          img_out.write(reinterpret_cast<const char*>(png.data()),
                        static_cast<std::streamsize>(png.size()));
          if (!img_out) throw IoError("failed writing: " + paths.image.string());
        }
        write_text_file(paths.label, label + "\n");
        bytes.fetch_add(png.size() + label.size() + 1);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        failed.store(true);
        return;
      }
    }
  };

  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int t = 0; t < workers; ++t) pool.emplace_back(work);
    for (std::thread& t : pool) t.join();
  }
  if (first_error) std::rethrow_exception(first_error);

  // Commit markers: the canonical joint definition, then the manifest last.
  write_text_file(out / kJointDefFile, space.canonical_text());
  std::string manifest_text = manifest_to_json(manifest);
  write_text_file(out / kManifestFile, manifest_text);
  bytes.fetch_add(space.canonical_text().size() + manifest_text.size());

  GenerationSummary summary;
  summary.count = manifest.count;
  summary.bytes_written = bytes.load();
  summary.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return summary;
}

VerificationReport verify_dataset(const std::filesystem::path& dataset_dir) {
  DatasetManifest manifest = load_manifest(dataset_dir);
  VerificationReport report;

  JointSpace space = load_joint_space(dataset_dir / kJointDefFile);
  if (space.fingerprint() != manifest.joint_space_fingerprint)
    report.failures.push_back(
        {UINT64_MAX, "joint_space.def fingerprint does not match manifest"});

  bool can_rederive = report.failures.empty();
  for (std::uint64_t i = 0; i < manifest.count; ++i) {
    RecordPaths paths = record_paths(dataset_dir, i);
    bool record_ok = true;

    std::string label;
    try {
      label = read_text_file(paths.label, "label");
    } catch (const std::exception& e) {
      report.failures.push_back({i, e.what()});
      record_ok = false;
    }
    if (record_ok) {
      std::string stripped = label;
      while (!stripped.empty() &&
             (stripped.back() == '\n' || stripped.back() == '\r' || stripped.back() == ' ' ||
              stripped.back() == '\t'))
        stripped.pop_back();
      ParseReport parsed = parse_angles_strict(space, stripped);
      if (!parsed.ok()) {
        const ParseIssue& first = parsed.issues.front();
        report.failures.push_back({i, std::string("label: ") + to_string(first.kind) +
                                          " at offset " + std::to_string(first.position)});
        record_ok = false;
      }
    }

    std::vector<std::uint8_t> png_bytes;
    try {
      png_bytes = read_binary_file(paths.image, "image");
      Image image = decode_png_bytes(png_bytes);
      if (image.width != manifest.camera.width || image.height != manifest.camera.height) {
        report.failures.push_back({i, "image dimensions do not match manifest"});
        record_ok = false;
      }
    } catch (const std::exception& e) {
      report.failures.push_back({i, e.what()});
      record_ok = false;
    }

    // Re-derive every 100th record from seeds and compare bytes.
    if (record_ok && can_rederive && i % 100 == 0) {
      auto [image, expected_label] = make_record(space, manifest, i);
      if (encode_png_bytes(image) != png_bytes)
        report.failures.push_back({i, "re-derived image bytes differ"});
      if (expected_label + "\n" != label)
        report.failures.push_back({i, "re-derived label differs"});
    }
    ++report.records_checked;
  }
  return report;
}

}  // namespace handsynth
