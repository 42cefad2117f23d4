#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "scatterkit/image.hpp"
#include "scatterkit/media.hpp"

namespace spk::datasets {

enum class Family { digit, texture, external };
enum class CaseRecipe {
  plain,
  enlarged,
  mod_a,
  mod_b,
  mod_c,
  embedded_fixed,
  embedded_random,
};
enum class AmplitudeMode { fixed_one, uniform };

const char* family_name(Family f);
const char* recipe_name(CaseRecipe r);
std::optional<Family> parse_family(std::string_view s);
std::optional<CaseRecipe> parse_recipe(std::string_view s);

struct TargetImage {
  Image values;  // in [0, 1]
  Family family = Family::digit;
  std::optional<std::uint64_t> gen_seed;
};

struct ModulationParams {
  AmplitudeMode amplitude_mode = AmplitudeMode::uniform;
  // Cycle counts per axis; one entry is picked uniformly per axis.
  std::vector<double> cycles_choices = {4.0, 8.0 / 3.0};
  std::uint64_t phase_seed = 0;
};

struct DatasetSpec {
  Family family = Family::digit;
  CaseRecipe case_recipe = CaseRecipe::plain;
  std::size_t count = 0;
  Dims target_dims;
  Dims canvas_dims;  // embedded recipes only; left zero, recorded as target_dims
  std::uint64_t seed = 0;
};

struct Dataset {
  std::vector<std::pair<TargetImage, media::SpecklePattern>> pairs;
  DatasetSpec spec;
  std::uint64_t medium_fingerprint = 0;
};

// Deterministic glyph rendering primitive: one of the ten built-in 5x7
// bitmaps, nearest-neighbour scaled into a box_side x box_side box placed at
// (dy, dx). Exposed so tests and the position-sweep protocol can pin every
// choice that gen_digit otherwise samples.
Image render_digit(int digit, Dims dims, std::size_t box_side, std::size_t dy,
                   std::size_t dx, bool dilate);

// Binary digit target. dims must be at least 8x8; the glyph box side is
// uniform in [0.5, 0.8] * min(dims), placement keeps the glyph inside the
// central 75% of the frame, dilation by one pixel happens with probability
// one half, and the outer 12.5% ring is always zero.
TargetImage gen_digit(std::uint64_t seed, Dims dims);

// Per-pixel grayscale texture: Gaussian-filtered white noise (sigma uniform
// in [1, 2] px, reflective boundary, per-pixel variance equalised), then
// rank-transformed so the sorted values are exactly the equispaced grid
//   0.02 + 0.98 (rank + phase) / N,  rank = 0..N-1,
// with one uniform phase draw per image. Pooled pixel histograms stay flat
// while the per-image pixel sum still varies; a fixed grid would pin the sum
// and leave the global-brightness direction of the training covariance empty.
TargetImage gen_texture(std::uint64_t seed, Dims dims);

// Bilinear upscale by factor, centre-crop back to the original dims;
// binary inputs are re-binarised at 0.5.
TargetImage enlarge_center_crop(const TargetImage& target, double factor);

// Applies one random intensity sheet
//   P(x', y') = A (sin(k_x x' + phi_x) + sin(k_y y' + phi_y)),
// k = 2 pi cycles / side, rescaled to P_pos = (P + 2A) / (4A) in [0, 1],
// then multiplies the target by P_pos.
TargetImage modulate(const TargetImage& target, const ModulationParams& params);

// Deterministic core of modulate with every sampled quantity pinned.
Image modulate_with(const Image& target, double amplitude, double cycles_x,
                    double cycles_y, double phase_x, double phase_y);

// Pixelwise min(a + b, 1).
TargetImage superpose_targets(const TargetImage& a, const TargetImage& b);

// Copies the target into a zero canvas at (offset_y, offset_x).
TargetImage embed(const TargetImage& target, Dims canvas_dims,
                  std::size_t offset_y, std::size_t offset_x);

// Builds count pairs through the medium. Per-item seeds derive from
// (spec.seed, index), so datasets with different seeds partition into
// disjoint sample streams. A nonempty pool replaces the generator for the
// digit and external families (items cycle through it); the external family
// requires one.
Dataset build_dataset(const DatasetSpec& spec,
                      const media::TransmissionMedium& medium,
                      std::span<const TargetImage> pool = {});

// Propagates already-made targets; the last step of build_dataset, exposed
// for custom target sets.
Dataset assemble_dataset(std::vector<TargetImage> targets,
                         const media::TransmissionMedium& medium,
                         const DatasetSpec& spec);

struct IdxData {
  std::vector<TargetImage> images;  // family external, values in [0, 1]
  std::vector<std::uint8_t> labels; // empty when no label stream was given
};

// Parses big-endian IDX byte streams (image magic 0x00000803, label magic
// 0x00000801). Sizes must match the header exactly; image/label counts must
// agree.
IdxData load_idx(std::span<const std::uint8_t> image_bytes);
IdxData load_idx(std::span<const std::uint8_t> image_bytes,
                 std::span<const std::uint8_t> label_bytes);

std::vector<std::uint8_t> save_idx_images(std::span<const TargetImage> images);
std::vector<std::uint8_t> save_idx_labels(std::span<const std::uint8_t> labels);

// Adapts an external image for digit-family use: centre-pad when the
// requested frame is larger, bilinear-resize otherwise, binarise at 0.5.
TargetImage to_digit_target(const TargetImage& src, Dims dims);

// Exact content hash of the pixel values; used for train/test disjointness.
std::uint64_t target_hash(const TargetImage& t);

}  // namespace spk::datasets
