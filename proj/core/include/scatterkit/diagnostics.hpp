#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "scatterkit/image.hpp"

namespace spk::diagnostics {

enum class CoverageMode { saturated, normalized };

std::string_view coverage_mode_name(CoverageMode mode);

struct CoverageMap {
  Image values;
  CoverageMode mode = CoverageMode::saturated;
  std::size_t sample_count = 0;
};

// Per-pixel sum over the stack clipped at 1. A pixel reads 0 exactly when no
// image in the stack ever lights it.
CoverageMap superpose_saturated(std::span<const Image> targets);

// Per-pixel sum rescaled by its maximum, exposing relative visitation rates.
CoverageMap superpose_normalized(std::span<const Image> targets);

struct PixelPoint {
  std::size_t y = 0;
  std::size_t x = 0;

  bool operator==(const PixelPoint&) const = default;
};

struct PixelHistogram {
  PixelPoint point;
  std::vector<std::size_t> counts;
  std::vector<double> frequencies;  // counts / sample_count, sums to 1
};

struct HistogramSet {
  std::vector<PixelHistogram> per_point;
  std::vector<std::size_t> pooled_counts;
  std::vector<double> pooled;  // mean of the per-point frequency vectors
  std::size_t bins = 0;
  std::size_t sample_count = 0;
};

// Value histograms at chosen pixels over an image stack. Bins split [0, 1]
// evenly; a value of exactly 1 folds into the top bin.
HistogramSet pixel_histograms(std::span<const Image> targets,
                              std::span<const PixelPoint> points,
                              std::size_t bins);

}  // namespace spk::diagnostics
