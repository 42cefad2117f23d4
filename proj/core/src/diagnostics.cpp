#include "scatterkit/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "scatterkit/error.hpp"

namespace spk::diagnostics {

std::string_view coverage_mode_name(CoverageMode mode) {
  return mode == CoverageMode::saturated ? "saturated" : "normalized";
}

namespace {

Dims common_dims(std::span<const Image> targets, const char* who) {
  if (targets.empty()) {
    raise(Errc::empty_input, std::string(who) + ": no images given");
  }
  const Dims d = targets[0].dims();
  for (const Image& img : targets) {
    if (!(img.dims() == d)) {
      raise(Errc::consistency, std::string(who) + ": image dims differ across the stack");
    }
  }
  return d;
}

Image pixel_sums(std::span<const Image> targets, Dims d) {
  Image sum(d);
  for (const Image& img : targets) {
    for (std::size_t i = 0; i < sum.size(); ++i) {
      sum.values()[i] += img.values()[i];
    }
  }
  return sum;
}

}  // namespace

CoverageMap superpose_saturated(std::span<const Image> targets) {
  const Dims d = common_dims(targets, "superpose_saturated");
  Image sum = pixel_sums(targets, d);
  for (double& v : sum.values()) v = std::min(v, 1.0);
  return {std::move(sum), CoverageMode::saturated, targets.size()};
}

CoverageMap superpose_normalized(std::span<const Image> targets) {
  const Dims d = common_dims(targets, "superpose_normalized");
  Image sum = pixel_sums(targets, d);
  const double mx = max_value(sum);
  if (mx <= 0.0) {
    raise(Errc::degenerate_input,
          "superpose_normalized: every pixel is zero across the stack");
  }
  for (double& v : sum.values()) v /= mx;
  return {std::move(sum), CoverageMode::normalized, targets.size()};
}

HistogramSet pixel_histograms(std::span<const Image> targets,
                              std::span<const PixelPoint> points,
                              std::size_t bins) {
  const Dims d = common_dims(targets, "pixel_histograms");
  if (bins < 2) {
    raise(Errc::invalid_argument, "pixel_histograms: need at least 2 bins");
  }
  if (points.empty()) {
    raise(Errc::empty_input, "pixel_histograms: no probe points given");
  }
  for (const PixelPoint& p : points) {
    if (p.y >= d.h || p.x >= d.w) {
      raise(Errc::invalid_point,
            "pixel_histograms: point (" + std::to_string(p.y) + ", " +
                std::to_string(p.x) + ") lies outside " + std::to_string(d.h) +
                "x" + std::to_string(d.w));
    }
  }

  HistogramSet set;
  set.bins = bins;
  set.sample_count = targets.size();
  set.per_point.reserve(points.size());
  set.pooled_counts.assign(bins, 0);
  set.pooled.assign(bins, 0.0);
  const double inv_n = 1.0 / static_cast<double>(targets.size());
  for (const PixelPoint& p : points) {
    PixelHistogram h;
    h.point = p;
    h.counts.assign(bins, 0);
    for (const Image& img : targets) {
      const double v = img.at(p.y, p.x);
      auto bin = static_cast<std::size_t>(
          std::max(0.0, std::floor(v * static_cast<double>(bins))));
      bin = std::min(bin, bins - 1);
      ++h.counts[bin];
    }
    h.frequencies.resize(bins);
    for (std::size_t b = 0; b < bins; ++b) {
      h.frequencies[b] = static_cast<double>(h.counts[b]) * inv_n;
      set.pooled_counts[b] += h.counts[b];
      set.pooled[b] += h.frequencies[b];
    }
    set.per_point.push_back(std::move(h));
  }
  const double inv_p = 1.0 / static_cast<double>(points.size());
  for (double& f : set.pooled) f *= inv_p;
  return set;
}

}  // namespace spk::diagnostics
