#include "scatterkit/image.hpp"

#include <algorithm>
#include <cmath>

#include "scatterkit/error.hpp"

namespace spk {

Image::Image(Dims dims, std::vector<double> values)
    : dims_(dims), v_(std::move(values)) {
  if (v_.size() != dims_.pixels()) {
    raise(Errc::shape, "image value count does not match dims");
  }
}

double min_value(const Image& img) {
  double m = img.values().empty() ? 0.0 : img.values()[0];
  for (double v : img.values()) m = std::min(m, v);
  return m;
}

double max_value(const Image& img) {
  double m = img.values().empty() ? 0.0 : img.values()[0];
  for (double v : img.values()) m = std::max(m, v);
  return m;
}

double mean_value(const Image& img) {
  if (img.values().empty()) return 0.0;
  double s = 0.0;
  for (double v : img.values()) s += v;
  return s / static_cast<double>(img.size());
}

bool is_binary(const Image& img) {
  for (double v : img.values()) {
    if (v != 0.0 && v != 1.0) return false;
  }
  return true;
}

bool in_unit_range(const Image& img) {
  for (double v : img.values()) {
    if (!(v >= 0.0 && v <= 1.0)) return false;
  }
  return true;
}

Image clamp01(Image img) {
  for (double& v : img.values()) v = std::clamp(v, 0.0, 1.0);
  return img;
}

Image bilinear_resize(const Image& src, Dims out) {
  if (src.size() == 0 || out.pixels() == 0) {
    raise(Errc::shape, "bilinear_resize: empty image");
  }
  const std::size_t sh = src.height(), sw = src.width();
  Image dst(out);
  const double sy_scale = static_cast<double>(sh) / static_cast<double>(out.h);
  const double sx_scale = static_cast<double>(sw) / static_cast<double>(out.w);
  for (std::size_t dy = 0; dy < out.h; ++dy) {
    double sy = (static_cast<double>(dy) + 0.5) * sy_scale - 0.5;
    sy = std::clamp(sy, 0.0, static_cast<double>(sh - 1));
    const std::size_t y0 = static_cast<std::size_t>(sy);
    const std::size_t y1 = std::min(y0 + 1, sh - 1);
    const double fy = sy - static_cast<double>(y0);
    for (std::size_t dx = 0; dx < out.w; ++dx) {
      double sx = (static_cast<double>(dx) + 0.5) * sx_scale - 0.5;
      sx = std::clamp(sx, 0.0, static_cast<double>(sw - 1));
      const std::size_t x0 = static_cast<std::size_t>(sx);
      const std::size_t x1 = std::min(x0 + 1, sw - 1);
      const double fx = sx - static_cast<double>(x0);
      const double top = (1.0 - fx) * src.at(y0, x0) + fx * src.at(y0, x1);
      const double bot = (1.0 - fx) * src.at(y1, x0) + fx * src.at(y1, x1);
      dst.at(dy, dx) = (1.0 - fy) * top + fy * bot;
    }
  }
  return dst;
}

Image dilate3x3(const Image& img) {
  const std::size_t h = img.height(), w = img.width();
  Image out(img.dims());
  for (std::size_t y = 0; y < h; ++y) {
    const std::size_t y0 = y == 0 ? 0 : y - 1;
    const std::size_t y1 = std::min(y + 1, h - 1);
    for (std::size_t x = 0; x < w; ++x) {
      const std::size_t x0 = x == 0 ? 0 : x - 1;
      const std::size_t x1 = std::min(x + 1, w - 1);
      double m = img.at(y, x);
      for (std::size_t yy = y0; yy <= y1; ++yy) {
        for (std::size_t xx = x0; xx <= x1; ++xx) {
          m = std::max(m, img.at(yy, xx));
        }
      }
      out.at(y, x) = m;
    }
  }
  return out;
}

}  // namespace spk
