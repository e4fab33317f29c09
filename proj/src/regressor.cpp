#include "handsynth/regressor.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "handsynth/codec.hpp"
#include "handsynth/errors.hpp"
#include "handsynth/pipeline.hpp"
#include "handsynth/rng.hpp"

namespace handsynth {
namespace {

using nlohmann::json;

// Distinct stream for epoch shuffling so it never correlates with init draws.
constexpr std::uint64_t kShuffleSalt = 0xD6E8FEB86659FD93ULL;

struct ForwardBackward {
  double loss = 0.0;
  ModelGradient grad;
};

void check_batch(const ModelParams& params, const Eigen::MatrixXd& features) {
  if (features.cols() < 1)
    throw ValidationError("regressor: empty feature batch");
  if (features.rows() != params.feature_size())
    throw ValidationError("regressor: feature batch has " + std::to_string(features.rows()) +
                          " rows, model expects " + std::to_string(params.feature_size()));
}

ForwardBackward forward_backward(const ModelParams& params, const Batch& batch) {
  check_batch(params, batch.features);
  if (batch.truths.cols() != batch.features.cols() ||
      batch.truths.rows() != params.joint_count())
    throw ValidationError("regressor: truth batch shape mismatch");

  const auto n = batch.features.cols();
  const double cells = static_cast<double>(params.joint_count()) * static_cast<double>(n);

  Eigen::MatrixXd z1 = (params.w1 * batch.features).colwise() + params.b1;
  if (!z1.allFinite()) throw ValidationError("regressor: non-finite values in hidden layer");
  Eigen::ArrayXXd h = z1.array().tanh();
  Eigen::MatrixXd z2 = (params.w2 * h.matrix()).colwise() + params.b2;
  if (!z2.allFinite()) throw ValidationError("regressor: non-finite values in output layer");
  Eigen::ArrayXXd u = z2.array().tanh();
  Eigen::ArrayXXd y = (u.colwise() * params.joint_half.array()).colwise() + params.joint_mid.array();

  Eigen::MatrixXd residual = y.matrix() - batch.truths;
  ForwardBackward out;
  out.loss = residual.squaredNorm() / cells;

  Eigen::ArrayXXd dy = (2.0 / cells) * residual.array();
  Eigen::ArrayXXd dz2 = (dy * (1.0 - u.square())).colwise() * params.joint_half.array();
  out.grad.w2 = dz2.matrix() * h.matrix().transpose();
  out.grad.b2 = dz2.matrix().rowwise().sum();
  Eigen::ArrayXXd dh = (params.w2.transpose() * dz2.matrix()).array();
  Eigen::ArrayXXd dz1 = dh * (1.0 - h.square());
  out.grad.w1 = dz1.matrix() * batch.features.transpose();
  out.grad.b1 = dz1.matrix().rowwise().sum();
  return out;
}

json matrix_to_json(const Eigen::MatrixXd& m) {
  json arr = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) arr.push_back(m(r, c));
  return arr;
}

Eigen::MatrixXd matrix_from_json(const json& arr, Eigen::Index rows, Eigen::Index cols,
                                 const char* field) {
  if (!arr.is_array() || static_cast<Eigen::Index>(arr.size()) != rows * cols)
    throw ValidationError(std::string("checkpoint: field '") + field + "' has wrong size");
  Eigen::MatrixXd m(rows, cols);
  std::size_t i = 0;
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = arr[i++].get<double>();
  return m;
}

Eigen::VectorXd vector_from_json(const json& arr, Eigen::Index size, const char* field) {
  return matrix_from_json(arr, size, 1, field);
}

void fill_uniform(SplitMix64& rng, Eigen::MatrixXd& m, double bound) {
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = rng.next_in(-bound, bound);
}

void fill_uniform(SplitMix64& rng, Eigen::VectorXd& v, double bound) {
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = rng.next_in(-bound, bound);
}

void validate_config(const TrainConfig& config) {
  if (config.batch_size < 1) throw ValidationError("train config: batch_size must be >= 1");
  if (config.hidden_size < 1) throw ValidationError("train config: hidden_size must be >= 1");
  if (!(config.learning_rate > 0.0) || !std::isfinite(config.learning_rate))
    throw ValidationError("train config: learning_rate must be positive");
  if (config.checkpoint_every < 1)
    throw ValidationError("train config: checkpoint_every must be >= 1");
  if (config.feature_width < 1 || config.feature_height < 1)
    throw ValidationError("train config: feature dimensions must be >= 1");
}

}  // namespace

Eigen::VectorXd extract_features(const Image& image, int down_w, int down_h) {
  if (down_w <= 0 || down_h <= 0)
    throw ValidationError("extract_features: non-positive target dimensions");
  if (image.width <= 0 || image.height <= 0 ||
      image.pixels.size() != static_cast<std::size_t>(image.width) * image.height * 3)
    throw ValidationError("extract_features: malformed image");

  Eigen::VectorXd out(static_cast<Eigen::Index>(down_w) * down_h);
  const double sx = static_cast<double>(image.width) / down_w;
  const double sy = static_cast<double>(image.height) / down_h;
  for (int ty = 0; ty < down_h; ++ty) {
    double y0 = ty * sy, y1 = (ty + 1) * sy;
    int py0 = std::max(0, static_cast<int>(std::floor(y0)));
    int py1 = std::min(image.height, static_cast<int>(std::ceil(y1)));
    for (int tx = 0; tx < down_w; ++tx) {
      double x0 = tx * sx, x1 = (tx + 1) * sx;
      int px0 = std::max(0, static_cast<int>(std::floor(x0)));
      int px1 = std::min(image.width, static_cast<int>(std::ceil(x1)));
      double num = 0.0, den = 0.0;
      for (int py = py0; py < py1; ++py) {
        double wy = std::min(y1, py + 1.0) - std::max(y0, static_cast<double>(py));
        if (wy <= 0.0) continue;
        for (int px = px0; px < px1; ++px) {
          double wx = std::min(x1, px + 1.0) - std::max(x0, static_cast<double>(px));
          if (wx <= 0.0) continue;
          const std::uint8_t* p = image.at(px, py);
          // Integer luma numerator keeps pure white at exactly 1.0.
          double luma = static_cast<double>(299 * p[0] + 587 * p[1] + 114 * p[2]) / 255000.0;
          num += wx * wy * luma;
          den += wx * wy;
        }
      }
      out[static_cast<Eigen::Index>(ty) * down_w + tx] = num / den;
    }
  }
  return out;
}

bool ModelParams::all_finite() const {
  return w1.allFinite() && b1.allFinite() && w2.allFinite() && b2.allFinite() &&
         joint_mid.allFinite() && joint_half.allFinite();
}

double mse_loss(const Eigen::MatrixXd& pred, const Eigen::MatrixXd& truth) {
  if (pred.rows() != truth.rows() || pred.cols() != truth.cols())
    throw ValidationError("mse_loss: shape mismatch");
  if (pred.size() == 0) throw ValidationError("mse_loss: empty batch");
  return (pred - truth).squaredNorm() /
         (static_cast<double>(pred.rows()) * static_cast<double>(pred.cols()));
}

Eigen::MatrixXd predict_batch(const ModelParams& params, const Eigen::MatrixXd& features) {
  check_batch(params, features);
  Eigen::ArrayXXd h = ((params.w1 * features).colwise() + params.b1).array().tanh();
  Eigen::ArrayXXd u = ((params.w2 * h.matrix()).colwise() + params.b2).array().tanh();
  return ((u.colwise() * params.joint_half.array()).colwise() + params.joint_mid.array())
      .matrix();
}

JointVector predict(const ModelParams& params, const Image& image) {
  Eigen::VectorXd features = extract_features(image, params.feature_width, params.feature_height);
  return predict_batch(params, features);
}

ModelGradient loss_gradient(const ModelParams& params, const Batch& batch) {
  return forward_backward(params, batch).grad;
}

ModelParams init_params(const JointSpace& space, const TrainConfig& config) {
  validate_config(config);
  const auto F = static_cast<Eigen::Index>(config.feature_width) * config.feature_height;
  const auto H = static_cast<Eigen::Index>(config.hidden_size);
  const auto J = static_cast<Eigen::Index>(space.size());

  ModelParams params;
  params.w1.resize(H, F);
  params.b1.resize(H);
  params.w2.resize(J, H);
  params.b2.resize(J);
  params.feature_width = config.feature_width;
  params.feature_height = config.feature_height;

  // Frozen draw order: w1 row-major, b1, w2 row-major, b2.
  SplitMix64 rng(config.seed);
  double bound1 = 1.0 / std::sqrt(static_cast<double>(F));
  double bound2 = 1.0 / std::sqrt(static_cast<double>(H));
  fill_uniform(rng, params.w1, bound1);
  fill_uniform(rng, params.b1, bound1);
  fill_uniform(rng, params.w2, bound2);
  fill_uniform(rng, params.b2, bound2);

  params.joint_mid.resize(J);
  params.joint_half.resize(J);
  for (Eigen::Index j = 0; j < J; ++j) {
    const JointSpec& spec = space[static_cast<std::size_t>(j)];
    params.joint_mid[j] = 0.5 * (spec.min_angle + spec.max_angle);
    params.joint_half[j] = 0.5 * (spec.max_angle - spec.min_angle);
  }
  return params;
}

std::vector<Checkpoint> train(const std::filesystem::path& dataset, const TrainConfig& config,
                              const std::filesystem::path& out) {
  validate_config(config);
  DatasetManifest manifest = load_manifest(dataset);
  JointSpace space = load_dataset_space(dataset);
  if (manifest.train_count == 0)
    throw ValidationError("train: dataset has an empty train split");

  const auto n = static_cast<Eigen::Index>(manifest.train_count);
  const auto F = static_cast<Eigen::Index>(config.feature_width) * config.feature_height;
  const auto J = static_cast<Eigen::Index>(space.size());
  Eigen::MatrixXd features(F, n);
  Eigen::MatrixXd truths(J, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    auto [image, q] = read_record(space, dataset, static_cast<std::uint64_t>(i));
    features.col(i) = extract_features(image, config.feature_width, config.feature_height);
    truths.col(i) = q;
  }

  std::filesystem::create_directories(out);
  ModelParams params = init_params(space, config);
  SplitMix64 shuffle_rng(mix64(config.seed + kShuffleSalt));

  std::vector<std::uint64_t> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), 0);
  std::size_t cursor = perm.size();  // forces a shuffle before the first batch

  auto reshuffle = [&]() {
    for (std::size_t i = perm.size(); i > 1; --i) {
      std::size_t k = static_cast<std::size_t>(shuffle_rng.next_u64() % i);
      std::swap(perm[i - 1], perm[k]);
    }
    cursor = 0;
  };

  const auto batch_n =
      static_cast<std::size_t>(std::min<Eigen::Index>(config.batch_size, n));
  Batch batch;
  batch.features.resize(F, static_cast<Eigen::Index>(batch_n));
  batch.truths.resize(J, static_cast<Eigen::Index>(batch_n));

  auto write_checkpoint = [&](std::uint64_t step, std::vector<Checkpoint>& sink) {
    if (!params.all_finite())
      throw ValidationError("train: non-finite parameters at step " + std::to_string(step));
    Checkpoint cp;
    cp.step = step;
    cp.params = params;
    cp.train_loss = mse_loss(predict_batch(params, features), truths);
    cp.config = config;
    cp.image_width = manifest.camera.width;
    cp.image_height = manifest.camera.height;
    cp.joint_space_fingerprint = space.fingerprint();
    save_checkpoint(cp, out / ("cp-" + std::to_string(step) + ".json"));
    sink.push_back(std::move(cp));
  };

  std::vector<Checkpoint> checkpoints;
  if (config.steps == 0) {
    write_checkpoint(0, checkpoints);
    return checkpoints;
  }

  for (std::uint64_t step = 1; step <= config.steps; ++step) {
    if (cursor + batch_n > perm.size()) reshuffle();
    for (std::size_t k = 0; k < batch_n; ++k) {
      auto src = static_cast<Eigen::Index>(perm[cursor + k]);
      batch.features.col(static_cast<Eigen::Index>(k)) = features.col(src);
      batch.truths.col(static_cast<Eigen::Index>(k)) = truths.col(src);
    }
    cursor += batch_n;

    ForwardBackward fb = forward_backward(params, batch);
    if (!std::isfinite(fb.loss))
      throw ValidationError("train: diverged at step " + std::to_string(step));
    params.w1 -= config.learning_rate * fb.grad.w1;
    params.b1 -= config.learning_rate * fb.grad.b1;
    params.w2 -= config.learning_rate * fb.grad.w2;
    params.b2 -= config.learning_rate * fb.grad.b2;

    if (step % config.checkpoint_every == 0 || step == config.steps)
      write_checkpoint(step, checkpoints);
  }
  return checkpoints;
}

void save_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path) {
  const ModelParams& p = checkpoint.params;
  json j;
  j["format_version"] = 1;
  j["step"] = checkpoint.step;
  j["train_loss"] = checkpoint.train_loss;
  j["config"] = {
      {"steps", checkpoint.config.steps},
      {"batch_size", checkpoint.config.batch_size},
      {"learning_rate", checkpoint.config.learning_rate},
      {"hidden_size", checkpoint.config.hidden_size},
      {"checkpoint_every", checkpoint.config.checkpoint_every},
      {"seed", checkpoint.config.seed},
      {"feature_width", checkpoint.config.feature_width},
      {"feature_height", checkpoint.config.feature_height},
  };
  j["image_width"] = checkpoint.image_width;
  j["image_height"] = checkpoint.image_height;
  j["joint_space_fingerprint"] = checkpoint.joint_space_fingerprint;
  j["params"] = {
      {"hidden_size", p.hidden_size()},
      {"feature_size", p.feature_size()},
      {"joint_count", p.joint_count()},
      {"feature_width", p.feature_width},
      {"feature_height", p.feature_height},
      {"w1", matrix_to_json(p.w1)},
      {"b1", matrix_to_json(p.b1)},
      {"w2", matrix_to_json(p.w2)},
      {"b2", matrix_to_json(p.b2)},
      {"joint_mid", matrix_to_json(p.joint_mid)},
      {"joint_half", matrix_to_json(p.joint_half)},
  };
  std::ofstream outf(path, std::ios::binary | std::ios::trunc);
  if (!outf) throw IoError("cannot open for writing: " + path.string());
  outf << j.dump() << '\n';
  if (!outf) throw IoError("failed writing: " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint: " + path.string());
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("failed reading checkpoint: " + path.string());

  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ValidationError("checkpoint " + path.string() + ": invalid JSON: " + e.what());
  }
  Checkpoint cp;
  try {
    if (j.at("format_version").get<int>() != 1)
      throw ValidationError("checkpoint " + path.string() + ": unsupported format_version");
    cp.step = j.at("step").get<std::uint64_t>();
    cp.train_loss = j.at("train_loss").get<double>();
    const json& cfg = j.at("config");
    cp.config.steps = cfg.at("steps").get<std::uint64_t>();
    cp.config.batch_size = cfg.at("batch_size").get<int>();
    cp.config.learning_rate = cfg.at("learning_rate").get<double>();
    cp.config.hidden_size = cfg.at("hidden_size").get<int>();
    cp.config.checkpoint_every = cfg.at("checkpoint_every").get<std::uint64_t>();
    cp.config.seed = cfg.at("seed").get<std::uint64_t>();
    cp.config.feature_width = cfg.at("feature_width").get<int>();
    cp.config.feature_height = cfg.at("feature_height").get<int>();
    cp.image_width = j.at("image_width").get<int>();
    cp.image_height = j.at("image_height").get<int>();
    cp.joint_space_fingerprint = j.at("joint_space_fingerprint").get<std::string>();
    const json& p = j.at("params");
    auto H = p.at("hidden_size").get<Eigen::Index>();
    auto F = p.at("feature_size").get<Eigen::Index>();
    auto J = p.at("joint_count").get<Eigen::Index>();
    if (H < 1 || F < 1 || J < 1)
      throw ValidationError("checkpoint " + path.string() + ": non-positive dimensions");
    cp.params.feature_width = p.at("feature_width").get<int>();
    cp.params.feature_height = p.at("feature_height").get<int>();
    if (static_cast<Eigen::Index>(cp.params.feature_width) * cp.params.feature_height != F)
      throw ValidationError("checkpoint " + path.string() +
                            ": feature dimensions do not match feature_size");
    cp.params.w1 = matrix_from_json(p.at("w1"), H, F, "w1");
    cp.params.b1 = vector_from_json(p.at("b1"), H, "b1");
    cp.params.w2 = matrix_from_json(p.at("w2"), J, H, "w2");
    cp.params.b2 = vector_from_json(p.at("b2"), J, "b2");
    cp.params.joint_mid = vector_from_json(p.at("joint_mid"), J, "joint_mid");
    cp.params.joint_half = vector_from_json(p.at("joint_half"), J, "joint_half");
  } catch (const json::exception& e) {
    throw ValidationError("checkpoint " + path.string() + ": " + e.what());
  }
  return cp;
}

}  // namespace handsynth
