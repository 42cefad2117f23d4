#pragma once

#include <cstdint>
#include <variant>
#include <vector>

#include "scatterkit/datasets.hpp"
#include "scatterkit/image.hpp"
#include "scatterkit/linalg.hpp"

namespace spk::learners {

enum class MappingKind { ridge_affine, small_net };
enum class RidgeSolver { cholesky, conjugate_gradient };

struct RidgeConfig {
  double lambda_rel = 1e-4;  // relative ridge: lambda_rel * tr(S_yy) / speckle_pixels
  RidgeSolver solver = RidgeSolver::cholesky;
  double cg_tol = 1e-10;
  std::size_t cg_max_iter = 0;  // 0 = 10 * speckle_pixels
};

struct NetConfig {
  std::size_t hidden_width = 256;
  double learning_rate = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::size_t batch_size = 32;
  std::size_t max_epochs = 50;
  std::size_t early_stop_patience = 5;
  double dice_weight = 0.3;
  double validation_fraction = 0.1;
  std::uint64_t init_seed = 0;
};

// Affine map x = W (y - y_mean) + x_mean with W of shape
// target_pixels x speckle_pixels.
struct RidgeParams {
  Matrix weights;
  std::vector<double> target_mean;
  std::vector<double> speckle_mean;
};

// flatten -> dense(hidden) -> relu -> dense(out) -> logistic.
struct NetParams {
  Matrix w1;               // hidden x in
  std::vector<double> b1;  // hidden
  Matrix w2;               // out x hidden
  std::vector<double> b2;  // out
};

struct LearnedMapping {
  Dims in_dims;   // speckle plane
  Dims out_dims;  // target plane
  std::variant<RidgeParams, NetParams> params;
  std::uint64_t training_fingerprint = 0;

  MappingKind kind() const {
    return std::holds_alternative<RidgeParams>(params)
               ? MappingKind::ridge_affine
               : MappingKind::small_net;
  }
};

struct Reconstruction {
  Image values;      // clamped to [0, 1]
  Image raw_values;  // pre-clamp
};

// Closed-form regularised affine regression from centred second moments:
//   (S_yy + lambda_eff I) W^t = S_xy^t,  lambda_eff = lambda_rel tr(S_yy)/p.
// A target pixel that is zero across training yields an exactly zero weight
// row and predicts exactly zero: its residuals, cross moments and solve are
// all bit-exact zeros. A pixel pinned to any other constant is only
// numerically null, since the stored mean can round.
LearnedMapping train_ridge(const datasets::Dataset& dataset,
                           const RidgeConfig& cfg);

LearnedMapping train_net(const datasets::Dataset& dataset, const NetConfig& cfg);

Reconstruction predict(const LearnedMapping& mapping, const Image& speckle);
Reconstruction predict(const LearnedMapping& mapping,
                       const media::SpecklePattern& speckle);

struct TrainBatch {
  Matrix inputs;   // batch x in_pixels
  Matrix targets;  // batch x out_pixels
};

struct NetGrads {
  Matrix w1;
  std::vector<double> b1;
  Matrix w2;
  std::vector<double> b2;
};

// Loss (1-w) MSE + w (1 - SoftDice) over the batch, with
// SoftDice = (2 sum(x_hat*x) + 1) / (sum(x_hat^2) + sum(x^2) + 1) taken over
// all batch elements, and its analytic reverse-mode gradients.
std::pair<double, NetGrads> loss_and_grads(const NetParams& params,
                                           const TrainBatch& batch,
                                           double dice_weight);

std::vector<double> net_forward(const NetParams& params,
                                std::span<const double> input);

}  // namespace spk::learners
