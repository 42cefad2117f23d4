#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "scatterkit/error.hpp"
#include "scatterkit/metrics.hpp"
#include "scatterkit/rng.hpp"

using namespace spk;
using namespace spk::metrics;

namespace {

Image random_image(Dims dims, std::uint64_t seed) {
  Rng rng(seed);
  Image img(dims);
  for (double& v : img.values()) v = rng.next_double();
  return img;
}

// Textbook Pearson correlation, written independently of the library.
double oracle_pcc(const Image& a, const Image& b) {
  const std::size_t n = a.size();
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    ma += a.values()[i];
    mb += b.values()[i];
  }
  ma /= static_cast<double>(n);
  mb /= static_cast<double>(n);
  double num = 0.0, da = 0.0, db = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double xa = a.values()[i] - ma;
    const double xb = b.values()[i] - mb;
    num += xa * xb;
    da += xa * xa;
    db += xb * xb;
  }
  return num / std::sqrt(da * db);
}

}  // namespace

TEST_CASE("pcc matches the textbook formula and its fixed points") {
  const Image a = random_image({8, 8}, 1);
  const Image b = random_image({8, 8}, 2);
  CHECK(pcc(a, b) == doctest::Approx(oracle_pcc(a, b)).epsilon(1e-12));
  CHECK(pcc(a, a) == doctest::Approx(1.0).epsilon(1e-12));

  // Positive affine maps leave the correlation untouched; negation flips it.
  Image scaled = a;
  for (double& v : scaled.values()) v = 0.25 * v + 0.3;
  CHECK(pcc(a, scaled) == doctest::Approx(1.0).epsilon(1e-12));
  Image flipped = a;
  for (double& v : flipped.values()) v = 1.0 - v;
  CHECK(pcc(a, flipped) == doctest::Approx(-1.0).epsilon(1e-12));
}

TEST_CASE("pcc handles constant images the documented way") {
  const Image flat({4, 4}, 0.7);
  const Image varied = random_image({4, 4}, 3);
  CHECK(pcc(flat, varied) == 0.0);
  CHECK(pcc(varied, flat) == 0.0);
  try {
    pcc(flat, flat);
    FAIL("two constant images have no correlation");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::undefined_metric);
  }
  CHECK_THROWS_AS(pcc(varied, random_image({4, 5}, 4)), Error);
}

TEST_CASE("ssim is one on identical images and symmetric otherwise") {
  const Image a = random_image({12, 12}, 11);
  const Image b = random_image({12, 12}, 12);
  CHECK(ssim(a, a) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(ssim(a, b) == doctest::Approx(ssim(b, a)).epsilon(1e-12));
  CHECK(ssim(a, b) < 0.9);  // independent noise shares no structure

  // Constant images: only the luminance term is active.
  const double c1 = 0.01 * 0.01, mu_a = 0.3, mu_b = 0.5;
  const double want =
      (2.0 * mu_a * mu_b + c1) / (mu_a * mu_a + mu_b * mu_b + c1);
  CHECK(ssim(Image({8, 8}, mu_a), Image({8, 8}, mu_b)) ==
        doctest::Approx(want).epsilon(1e-12));
}

TEST_CASE("ssim degrades monotonically with added noise") {
  const Image a = random_image({16, 16}, 21);
  Rng rng(22);
  Image small_noise = a, big_noise = a;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double e = rng.normal();
    small_noise.values()[i] += 0.02 * e;
    big_noise.values()[i] += 0.3 * e;
  }
  const double near = ssim(a, small_noise);
  const double far = ssim(a, big_noise);
  CHECK(near > far);
  CHECK(near > 0.9);
}

TEST_CASE("ssim rejects images smaller than the window") {
  const Image tiny({4, 4}, 0.5);
  try {
    ssim(tiny, tiny);
    FAIL("default 7-pixel window cannot fit a 4x4 image");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::invalid_argument);
  }
  SsimParams p;
  p.window = 1;
  CHECK_THROWS_AS(ssim(Image({8, 8}, 0.1), Image({8, 8}, 0.1), p), Error);
}

TEST_CASE("cosine similarity on hand vectors") {
  Image a({1, 3});
  Image b({1, 3});
  a.values() = {1.0, 0.0, 0.0};
  b.values() = {0.0, 1.0, 0.0};
  CHECK(cosine(a, b) == doctest::Approx(0.0));
  b.values() = {2.0, 0.0, 0.0};
  CHECK(cosine(a, b) == doctest::Approx(1.0));
  b.values() = {1.0, 1.0, 0.0};
  CHECK(cosine(a, b) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-12));

  try {
    cosine(a, Image({1, 3}, 0.0));
    FAIL("zero vector has no direction");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::undefined_metric);
  }
}

TEST_CASE("dice overlap counts thresholded masks") {
  Image a({2, 2});
  Image b({2, 2});
  a.values() = {0.9, 0.8, 0.1, 0.2};
  b.values() = {0.7, 0.1, 0.9, 0.0};
  // Masks {0,1} and {0,2}: intersection 1, sizes 2 and 2.
  CHECK(dice_coeff(a, b) == doctest::Approx(2.0 * 1.0 / 4.0));
  CHECK(dice_coeff(a, a) == doctest::Approx(1.0));

  const Image dark({2, 2}, 0.0);
  CHECK(dice_coeff(dark, dark) == 1.0);  // two empty masks agree
  CHECK(dice_coeff(a, dark) == doctest::Approx(0.0));

  // The threshold is a real parameter, not a fixed constant.
  CHECK(dice_coeff(a, b, 0.05) == doctest::Approx(2.0 * 3.0 / 7.0));
}

TEST_CASE("evaluate_pair records undefined metrics as missing") {
  const Image truth({8, 8}, 0.0);           // constant and zero
  const Image recon = random_image({8, 8}, 31);
  const MetricReport r = evaluate_pair("probe:0", recon, truth);
  CHECK(r.id == "probe:0");
  REQUIRE(r.pcc.has_value());
  CHECK(*r.pcc == 0.0);                     // one constant side
  CHECK(!r.cosine.has_value());             // zero truth vector
  REQUIRE(r.dice.has_value());

  const Image both_flat({8, 8}, 0.4);
  const MetricReport r2 = evaluate_pair("probe:1", both_flat, both_flat);
  CHECK(!r2.pcc.has_value());
  REQUIRE(r2.cosine.has_value());
  CHECK(*r2.cosine == doctest::Approx(1.0));

  const Image a = random_image({8, 8}, 32);
  const Image b = random_image({8, 8}, 33);
  const MetricReport r3 = evaluate_pair("probe:2", a, b);
  REQUIRE(r3.pcc.has_value());
  REQUIRE(r3.ssim.has_value());
  CHECK(*r3.pcc == doctest::Approx(pcc(a, b)));
  CHECK(*r3.ssim == doctest::Approx(ssim(a, b)));

  // Planes smaller than the stock ssim window lose only that metric here;
  // the direct call keeps rejecting them.
  const Image sa = random_image({6, 6}, 34);
  const Image sb = random_image({6, 6}, 35);
  const MetricReport r4 = evaluate_pair("probe:3", sa, sb);
  CHECK(!r4.ssim.has_value());
  REQUIRE(r4.pcc.has_value());
  CHECK(*r4.pcc == doctest::Approx(pcc(sa, sb)));
  CHECK_THROWS_AS(ssim(sa, sb), Error);
}
