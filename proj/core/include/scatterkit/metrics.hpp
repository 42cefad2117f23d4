#pragma once

#include <optional>
#include <string>

#include "scatterkit/image.hpp"

namespace spk::metrics {

// Pearson correlation over the flattened pixels. Raises
// Errc::undefined_metric when both inputs are constant; when exactly one is
// constant the covariance is exactly zero and 0.0 is returned.
double pcc(const Image& a, const Image& b);

struct SsimParams {
  std::size_t window = 7;
  double sigma = 1.5;
  double k1 = 0.01;
  double k2 = 0.03;
  double dynamic_range = 1.0;
};

// Mean local structural similarity with a Gaussian-weighted window over all
// fully-inside positions. Both dims must reach the window size.
double ssim(const Image& a, const Image& b, const SsimParams& params = {});

// Raises Errc::undefined_metric on a zero vector.
double cosine(const Image& a, const Image& b);

// Dice overlap of the masks {value > threshold}; two empty masks count as a
// perfect match (1.0).
double dice_coeff(const Image& a, const Image& b, double threshold = 0.5);

// All four metrics for one reconstruction/truth pair; an undefined metric is
// recorded as missing rather than a number. ssim also goes missing on planes
// smaller than its stock window, since no window choice exists here.
struct MetricReport {
  std::string id;
  std::optional<double> pcc;
  std::optional<double> ssim;
  std::optional<double> cosine;
  std::optional<double> dice;
};

MetricReport evaluate_pair(std::string id, const Image& reconstruction,
                           const Image& truth);

}  // namespace spk::metrics
