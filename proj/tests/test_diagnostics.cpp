#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <vector>

#include "scatterkit/diagnostics.hpp"
#include "scatterkit/error.hpp"

using namespace spk;
using namespace spk::diagnostics;

namespace {

std::vector<Image> two_by_two_stack() {
  // Pixel 0 lit twice, pixel 1 once, pixel 2 faintly once, pixel 3 never.
  Image a({2, 2});
  a.values() = {0.5, 1.0, 0.0, 0.0};
  Image b({2, 2});
  b.values() = {1.0, 0.0, 0.25, 0.0};
  return {a, b};
}

}  // namespace

TEST_CASE("saturated coverage flags exactly the never-lit pixels") {
  const auto stack = two_by_two_stack();
  const CoverageMap map = superpose_saturated(stack);
  CHECK(map.mode == CoverageMode::saturated);
  CHECK(map.sample_count == 2);
  CHECK(map.values.values() == std::vector<double>{1.0, 1.0, 0.25, 0.0});
}

TEST_CASE("normalized coverage reports visitation relative to the busiest pixel") {
  const auto stack = two_by_two_stack();
  const CoverageMap map = superpose_normalized(stack);
  CHECK(map.mode == CoverageMode::normalized);
  // Sums are {1.5, 1.0, 0.25, 0.0}; the busiest pixel rescales to 1.
  CHECK(map.values.values() ==
        std::vector<double>{1.0, 1.0 / 1.5, 0.25 / 1.5, 0.0});
}

TEST_CASE("coverage stacks must agree on dims and not be empty") {
  try {
    superpose_saturated({});
    FAIL("empty stack must throw");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::empty_input);
  }
  const std::vector<Image> mixed = {Image({2, 2}, 1.0), Image({2, 3}, 1.0)};
  try {
    superpose_normalized(mixed);
    FAIL("mixed dims must throw");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::consistency);
  }
}

TEST_CASE("normalized coverage of an all-dark stack is degenerate") {
  const std::vector<Image> dark = {Image({2, 2}, 0.0), Image({2, 2}, 0.0)};
  CHECK(superpose_saturated(dark).values.values() ==
        std::vector<double>(4, 0.0));
  try {
    superpose_normalized(dark);
    FAIL("no busiest pixel to rescale by");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::degenerate_input);
  }
}

TEST_CASE("pixel histograms count bins the documented way") {
  // Values at pixel (0,0): 0.0, 0.3, 0.999, 1.0 with 4 bins of width 0.25.
  std::vector<Image> stack;
  for (double v : {0.0, 0.3, 0.999, 1.0}) {
    stack.push_back(Image({1, 2}, v));
  }
  const std::vector<PixelPoint> points = {{0, 0}, {0, 1}};
  const HistogramSet set = pixel_histograms(stack, points, 4);

  CHECK(set.bins == 4);
  CHECK(set.sample_count == 4);
  REQUIRE(set.per_point.size() == 2);
  CHECK(set.per_point[0].point == PixelPoint{0, 0});
  // Bin 0 gets 0.0; bin 1 gets 0.3; the top bin absorbs 0.999 and exactly 1.
  CHECK(set.per_point[0].counts == std::vector<std::size_t>{1, 1, 0, 2});
  CHECK(set.per_point[0].frequencies ==
        std::vector<double>{0.25, 0.25, 0.0, 0.5});

  // Both pixels see the same constants, so the pooled mean equals each.
  CHECK(set.pooled == set.per_point[1].frequencies);
  CHECK(set.pooled_counts == std::vector<std::size_t>{2, 2, 0, 4});

  double total = 0.0;
  for (double f : set.pooled) total += f;
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("pixel histograms validate points, bins and input") {
  const std::vector<Image> stack = {Image({2, 2}, 0.5)};
  const std::vector<PixelPoint> inside = {{1, 1}};
  const std::vector<PixelPoint> outside = {{2, 0}};

  try {
    pixel_histograms(stack, outside, 4);
    FAIL("point outside the image must throw");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::invalid_point);
  }
  CHECK_THROWS_AS(pixel_histograms(stack, inside, 1), Error);
  CHECK_THROWS_AS(pixel_histograms({}, inside, 4), Error);
  const std::vector<PixelPoint> none;
  CHECK_THROWS_AS(pixel_histograms(stack, none, 4), Error);
}

TEST_CASE("coverage mode names are stable identifiers") {
  CHECK(coverage_mode_name(CoverageMode::saturated) == "saturated");
  CHECK(coverage_mode_name(CoverageMode::normalized) == "normalized");
}
