#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace spk {

struct Dims {
  std::size_t h = 0;
  std::size_t w = 0;

  std::size_t pixels() const { return h * w; }
  bool operator==(const Dims&) const = default;
};

// Rectangular grid of doubles, row-major. Targets, speckles, coverage maps
// and reconstructions all use this one representation.
class Image {
 public:
  Image() = default;
  Image(Dims dims, double fill = 0.0)
      : dims_(dims), v_(dims.pixels(), fill) {}
  Image(Dims dims, std::vector<double> values);

  Dims dims() const { return dims_; }
  std::size_t height() const { return dims_.h; }
  std::size_t width() const { return dims_.w; }
  std::size_t size() const { return v_.size(); }

  double& at(std::size_t y, std::size_t x) { return v_[y * dims_.w + x]; }
  double at(std::size_t y, std::size_t x) const { return v_[y * dims_.w + x]; }

  std::vector<double>& values() { return v_; }
  const std::vector<double>& values() const { return v_; }
  double* data() { return v_.data(); }
  const double* data() const { return v_.data(); }

  bool operator==(const Image&) const = default;

 private:
  Dims dims_;
  std::vector<double> v_;
};

double min_value(const Image& img);
double max_value(const Image& img);
double mean_value(const Image& img);

// True when every pixel is exactly 0.0 or 1.0.
bool is_binary(const Image& img);

bool in_unit_range(const Image& img);

Image clamp01(Image img);

// Resize with half-pixel-centre sampling and edge clamping; the output of a
// constant input is constant and every value stays inside the input's range
// up to clamping into [0, 1].
Image bilinear_resize(const Image& src, Dims out);

// Morphological dilation with the full 3x3 structuring element.
Image dilate3x3(const Image& img);

}  // namespace spk
