#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "handsynth/joint_space.hpp"
#include "handsynth/render.hpp"

namespace handsynth {

/// Area-averaged grayscale downsample, luma = (299 R + 587 G + 114 B)/1000,
/// scaled to [0,1]. Returns down_w * down_h values in row-major order.
Eigen::VectorXd extract_features(const Image& image, int down_w, int down_h);

/// One-hidden-layer MLP F -> H -> J with tanh activations. The output layer
/// is affine-mapped per joint from [-1,1] onto [min_angle, max_angle], so
/// predictions are in range by construction.
struct ModelParams {
  Eigen::MatrixXd w1;  // H x F
  Eigen::VectorXd b1;  // H
  Eigen::MatrixXd w2;  // J x H
  Eigen::VectorXd b2;  // J
  Eigen::VectorXd joint_mid;   // J, (min+max)/2
  Eigen::VectorXd joint_half;  // J, (max-min)/2
  int feature_width = 0;
  int feature_height = 0;

  int feature_size() const { return static_cast<int>(w1.cols()); }
  int hidden_size() const { return static_cast<int>(w1.rows()); }
  int joint_count() const { return static_cast<int>(w2.rows()); }
  bool all_finite() const;
};

/// Gradient of the loss with respect to the trainable parameters.
struct ModelGradient {
  Eigen::MatrixXd w1;
  Eigen::VectorXd b1;
  Eigen::MatrixXd w2;
  Eigen::VectorXd b2;
};

struct TrainConfig {
  std::uint64_t steps = 4500;
  int batch_size = 32;
  double learning_rate = 0.05;
  int hidden_size = 64;
  std::uint64_t checkpoint_every = 500;
  std::uint64_t seed = 0;
  int feature_width = 32;
  int feature_height = 32;
};

struct Checkpoint {
  std::uint64_t step = 0;
  ModelParams params;
  double train_loss = 0.0;  // full train-split MSE at this step
  TrainConfig config;
  int image_width = 0;   // dataset resolution the run trained on
  int image_height = 0;
  std::string joint_space_fingerprint;
};

/// Mean squared error over all (sample, joint) cells. Batches are J x N,
/// one sample per column.
double mse_loss(const Eigen::MatrixXd& pred, const Eigen::MatrixXd& truth);

/// Forward pass for a batch of feature columns (F x N) -> predictions (J x N).
Eigen::MatrixXd predict_batch(const ModelParams& params, const Eigen::MatrixXd& features);

/// Forward pass for one image.
JointVector predict(const ModelParams& params, const Image& image);

struct Batch {
  Eigen::MatrixXd features;  // F x N
  Eigen::MatrixXd truths;    // J x N
};

/// Exact analytic gradient of mse_loss composed with the network.
ModelGradient loss_gradient(const ModelParams& params, const Batch& batch);

/// Seeded uniform init in [-1/sqrt(fan_in), +1/sqrt(fan_in)].
ModelParams init_params(const JointSpace& space, const TrainConfig& config);

/// Mini-batch SGD over the dataset's train split with seeded shuffling.
/// Writes cp-<step>.json checkpoints into `out` at every multiple of
/// checkpoint_every and at the final step; deterministic given the seed.
std::vector<Checkpoint> train(const std::filesystem::path& dataset, const TrainConfig& config,
                              const std::filesystem::path& out);

void save_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace handsynth
