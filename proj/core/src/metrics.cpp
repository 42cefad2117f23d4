#include "scatterkit/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "scatterkit/error.hpp"

namespace spk::metrics {

namespace {

void check_same_dims(const Image& a, const Image& b, const char* who) {
  if (!(a.dims() == b.dims())) {
    raise(Errc::shape, std::string(who) + ": dims mismatch");
  }
  if (a.size() == 0) {
    raise(Errc::empty_input, std::string(who) + ": empty images");
  }
}

}  // namespace

double pcc(const Image& a, const Image& b) {
  check_same_dims(a, b, "pcc");
  const std::size_t n = a.size();
  // Constancy is decided on the pixel values themselves, not on the centred
  // variance: the mean of n copies of one value can round, leaving a
  // rounding-scale variance that would dodge a variance == 0 test.
  const auto is_constant = [n](const Image& img) {
    const double first = img.values()[0];
    for (std::size_t i = 1; i < n; ++i) {
      if (img.values()[i] != first) return false;
    }
    return true;
  };
  const bool const_a = is_constant(a);
  const bool const_b = is_constant(b);
  if (const_a && const_b) {
    raise(Errc::undefined_metric, "pcc: both images are constant");
  }
  if (const_a || const_b) return 0.0;

  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    ma += a.values()[i];
    mb += b.values()[i];
  }
  ma /= static_cast<double>(n);
  mb /= static_cast<double>(n);
  double saa = 0.0, sbb = 0.0, sab = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double da = a.values()[i] - ma;
    const double db = b.values()[i] - mb;
    saa += da * da;
    sbb += db * db;
    sab += da * db;
  }
  if (saa == 0.0 || sbb == 0.0) return 0.0;  // cancellation guard
  return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

double ssim(const Image& a, const Image& b, const SsimParams& params) {
  check_same_dims(a, b, "ssim");
  const std::size_t win = params.window;
  if (win < 2) raise(Errc::invalid_argument, "ssim: window must be at least 2");
  if (a.height() < win || a.width() < win) {
    raise(Errc::invalid_argument, "ssim: images smaller than the window");
  }

  // Normalised Gaussian weights over the window.
  std::vector<double> weight(win * win);
  const double half = (static_cast<double>(win) - 1.0) / 2.0;
  double wsum = 0.0;
  for (std::size_t wy = 0; wy < win; ++wy) {
    for (std::size_t wx = 0; wx < win; ++wx) {
      const double dy = static_cast<double>(wy) - half;
      const double dx = static_cast<double>(wx) - half;
      const double v = std::exp(-(dy * dy + dx * dx) / (2.0 * params.sigma * params.sigma));
      weight[wy * win + wx] = v;
      wsum += v;
    }
  }
  for (double& v : weight) v /= wsum;

  const double c1 = params.k1 * params.dynamic_range * params.k1 * params.dynamic_range;
  const double c2 = params.k2 * params.dynamic_range * params.k2 * params.dynamic_range;

  const std::size_t yn = a.height() - win + 1;
  const std::size_t xn = a.width() - win + 1;
  double total = 0.0;
  for (std::size_t y = 0; y < yn; ++y) {
    for (std::size_t x = 0; x < xn; ++x) {
      double mu_a = 0.0, mu_b = 0.0, aa = 0.0, bb = 0.0, ab = 0.0;
      for (std::size_t wy = 0; wy < win; ++wy) {
        for (std::size_t wx = 0; wx < win; ++wx) {
          const double wgt = weight[wy * win + wx];
          const double va = a.at(y + wy, x + wx);
          const double vb = b.at(y + wy, x + wx);
          mu_a += wgt * va;
          mu_b += wgt * vb;
          aa += wgt * va * va;
          bb += wgt * vb * vb;
          ab += wgt * va * vb;
        }
      }
      const double var_a = aa - mu_a * mu_a;
      const double var_b = bb - mu_b * mu_b;
      const double cov = ab - mu_a * mu_b;
      total += ((2.0 * mu_a * mu_b + c1) * (2.0 * cov + c2)) /
               ((mu_a * mu_a + mu_b * mu_b + c1) * (var_a + var_b + c2));
    }
  }
  return total / static_cast<double>(yn * xn);
}

double cosine(const Image& a, const Image& b) {
  check_same_dims(a, b, "cosine");
  double na = 0.0, nb = 0.0, dot = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    na += a.values()[i] * a.values()[i];
    nb += b.values()[i] * b.values()[i];
    dot += a.values()[i] * b.values()[i];
  }
  if (na == 0.0 || nb == 0.0) {
    raise(Errc::undefined_metric, "cosine: zero vector");
  }
  return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0);
}

double dice_coeff(const Image& a, const Image& b, double threshold) {
  check_same_dims(a, b, "dice");
  std::size_t na = 0, nb = 0, overlap = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const bool ia = a.values()[i] > threshold;
    const bool ib = b.values()[i] > threshold;
    na += ia;
    nb += ib;
    overlap += ia && ib;
  }
  if (na + nb == 0) return 1.0;
  return 2.0 * static_cast<double>(overlap) / static_cast<double>(na + nb);
}

MetricReport evaluate_pair(std::string id, const Image& reconstruction,
                           const Image& truth) {
  MetricReport r;
  r.id = std::move(id);
  try {
    r.pcc = pcc(reconstruction, truth);
  } catch (const Error& e) {
    if (e.code() != Errc::undefined_metric) throw;
  }
  // The stock window cannot be renegotiated from here, so on planes too
  // small for it the metric is missing rather than an error; ssim() itself
  // still rejects such inputs when called with an explicit choice.
  const SsimParams stock;
  if (truth.height() >= stock.window && truth.width() >= stock.window) {
    try {
      r.ssim = ssim(reconstruction, truth);
    } catch (const Error& e) {
      if (e.code() != Errc::undefined_metric) throw;
    }
  }
  try {
    r.cosine = cosine(reconstruction, truth);
  } catch (const Error& e) {
    if (e.code() != Errc::undefined_metric) throw;
  }
  r.dice = dice_coeff(reconstruction, truth);
  return r;
}

}  // namespace spk::metrics
