#include "scatterkit/datasets.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <string>

#include "scatterkit/error.hpp"
#include "scatterkit/hash.hpp"
#include "scatterkit/rng.hpp"

namespace spk::datasets {

namespace {

// Ten 5x7 glyphs, one bit per pixel, row by row (top row first, msb = left
// column). The set is chosen so the corners and edges of the glyph box are
// all hit by several digits.
constexpr std::uint8_t kGlyphs[10][7] = {
    {0b01110, 0b10001, 0b10011, 0b10101, 0b11001, 0b10001, 0b01110},  // 0
    {0b00100, 0b01100, 0b00100, 0b00100, 0b00100, 0b00100, 0b01110},  // 1
    {0b01110, 0b10001, 0b00001, 0b00010, 0b00100, 0b01000, 0b11111},  // 2
    {0b11111, 0b00010, 0b00100, 0b00010, 0b00001, 0b10001, 0b01110},  // 3
    {0b00010, 0b00110, 0b01010, 0b10010, 0b11111, 0b00010, 0b00010},  // 4
    {0b11111, 0b10000, 0b11110, 0b00001, 0b00001, 0b10001, 0b01110},  // 5
    {0b00110, 0b01000, 0b10000, 0b11110, 0b10001, 0b10001, 0b01110},  // 6
    {0b11111, 0b00001, 0b00010, 0b00100, 0b01000, 0b01000, 0b01000},  // 7
    {0b01110, 0b10001, 0b10001, 0b01110, 0b10001, 0b10001, 0b01110},  // 8
    {0b01110, 0b10001, 0b10001, 0b01111, 0b00001, 0b00010, 0b01100},  // 9
};
constexpr std::size_t kGlyphRows = 7;
constexpr std::size_t kGlyphCols = 5;

bool glyph_bit(int digit, std::size_t gy, std::size_t gx) {
  return (kGlyphs[digit][gy] >> (kGlyphCols - 1 - gx)) & 1u;
}

// Symmetric reflection: ... 1 0 | 0 1 2 ... n-1 | n-1 n-2 ...
std::size_t reflect_index(long i, std::size_t n) {
  const long nn = static_cast<long>(n);
  if (nn == 1) return 0;
  const long period = 2 * nn;
  long r = i % period;
  if (r < 0) r += period;
  return static_cast<std::size_t>(r < nn ? r : period - 1 - r);
}

std::vector<double> gauss_kernel(double sigma, long radius) {
  std::vector<double> kernel(2 * radius + 1);
  double ksum = 0.0;
  for (long i = -radius; i <= radius; ++i) {
    const double v = std::exp(-0.5 * (static_cast<double>(i) * i) / (sigma * sigma));
    kernel[i + radius] = v;
    ksum += v;
  }
  for (double& v : kernel) v /= ksum;
  return kernel;
}

// Per-position output variance of one reflective 1D pass over unit white
// noise: reflection folds kernel taps onto shared samples, so border pixels
// come out with more variance than interior ones.
std::vector<double> reflect_pass_variance(std::size_t len, long radius,
                                          const std::vector<double>& kernel) {
  std::vector<double> var(len, 0.0);
  std::vector<double> folded(len);
  for (std::size_t p = 0; p < len; ++p) {
    std::fill(folded.begin(), folded.end(), 0.0);
    for (long k = -radius; k <= radius; ++k) {
      folded[reflect_index(static_cast<long>(p) + k, len)] += kernel[k + radius];
    }
    for (const double wgt : folded) var[p] += wgt * wgt;
  }
  return var;
}

void gaussian_blur_reflect(Image& img, double sigma) {
  const long radius = std::max<long>(1, static_cast<long>(std::ceil(3.0 * sigma)));
  const std::vector<double> kernel = gauss_kernel(sigma, radius);

  const std::size_t h = img.height(), w = img.width();
  Image tmp(img.dims());
  for (std::size_t y = 0; y < h; ++y) {  // horizontal pass
    for (std::size_t x = 0; x < w; ++x) {
      double s = 0.0;
      for (long k = -radius; k <= radius; ++k) {
        s += kernel[k + radius] * img.at(y, reflect_index(static_cast<long>(x) + k, w));
      }
      tmp.at(y, x) = s;
    }
  }
  for (std::size_t y = 0; y < h; ++y) {  // vertical pass
    for (std::size_t x = 0; x < w; ++x) {
      double s = 0.0;
      for (long k = -radius; k <= radius; ++k) {
        s += kernel[k + radius] * tmp.at(reflect_index(static_cast<long>(y) + k, h), x);
      }
      img.at(y, x) = s;
    }
  }
}

void zero_border_ring(Image& img) {
  const std::size_t h = img.height(), w = img.width();
  const std::size_t ry = h / 8, rx = w / 8;
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      if (y < ry || y >= h - ry || x < rx || x >= w - rx) img.at(y, x) = 0.0;
    }
  }
}

}  // namespace

const char* family_name(Family f) {
  switch (f) {
    case Family::digit: return "digit";
    case Family::texture: return "texture";
    case Family::external: return "external";
  }
  return "unknown";
}

const char* recipe_name(CaseRecipe r) {
  switch (r) {
    case CaseRecipe::plain: return "plain";
    case CaseRecipe::enlarged: return "enlarged";
    case CaseRecipe::mod_a: return "mod-a";
    case CaseRecipe::mod_b: return "mod-b";
    case CaseRecipe::mod_c: return "mod-c";
    case CaseRecipe::embedded_fixed: return "embed-fixed";
    case CaseRecipe::embedded_random: return "embed-random";
  }
  return "unknown";
}

std::optional<Family> parse_family(std::string_view s) {
  if (s == "digit") return Family::digit;
  if (s == "texture") return Family::texture;
  if (s == "external") return Family::external;
  return std::nullopt;
}

std::optional<CaseRecipe> parse_recipe(std::string_view s) {
  if (s == "plain") return CaseRecipe::plain;
  if (s == "enlarged") return CaseRecipe::enlarged;
  if (s == "mod-a") return CaseRecipe::mod_a;
  if (s == "mod-b") return CaseRecipe::mod_b;
  if (s == "mod-c") return CaseRecipe::mod_c;
  if (s == "embed-fixed") return CaseRecipe::embedded_fixed;
  if (s == "embed-random") return CaseRecipe::embedded_random;
  return std::nullopt;
}

Image render_digit(int digit, Dims dims, std::size_t box_side, std::size_t dy,
                   std::size_t dx, bool dilate) {
  if (digit < 0 || digit > 9) {
    raise(Errc::invalid_argument, "render_digit: digit must be in 0..9");
  }
  if (box_side == 0 || dy + box_side > dims.h || dx + box_side > dims.w) {
    raise(Errc::invalid_offset, "render_digit: glyph box does not fit the frame");
  }
  Image img(dims);
  for (std::size_t by = 0; by < box_side; ++by) {
    const std::size_t gy = by * kGlyphRows / box_side;
    for (std::size_t bx = 0; bx < box_side; ++bx) {
      const std::size_t gx = bx * kGlyphCols / box_side;
      if (glyph_bit(digit, gy, gx)) img.at(dy + by, dx + bx) = 1.0;
    }
  }
  if (dilate) img = dilate3x3(img);
  return img;
}

TargetImage gen_digit(std::uint64_t seed, Dims dims) {
  if (dims.h < 8 || dims.w < 8) {
    raise(Errc::invalid_spec, "gen_digit: dims must be at least 8x8");
  }
  const std::size_t ry = dims.h / 8, rx = dims.w / 8;
  const std::size_t ch = dims.h - 2 * ry, cw = dims.w - 2 * rx;

  Rng rng(seed);
  const int digit = static_cast<int>(rng.below(10));
  const double u = rng.uniform(0.5, 0.8);
  std::size_t side = static_cast<std::size_t>(u * static_cast<double>(std::min(dims.h, dims.w)));
  side = std::min(side, std::min(ch, cw));
  const std::size_t dy = ry + rng.below(ch - side + 1);
  const std::size_t dx = rx + rng.below(cw - side + 1);
  const bool dilate = rng.next_double() < 0.5;

  TargetImage t;
  t.values = render_digit(digit, dims, side, dy, dx, dilate);
  // Dilation may spill one pixel past the central 75%; the ring stays zero.
  zero_border_ring(t.values);
  t.family = Family::digit;
  t.gen_seed = seed;
  return t;
}

TargetImage gen_texture(std::uint64_t seed, Dims dims) {
  const std::size_t n = dims.pixels();
  if (n < 2) raise(Errc::invalid_spec, "gen_texture: dims must hold at least 2 pixels");

  Rng rng(seed);
  const double sigma = rng.uniform(1.0, 2.0);
  Image img(dims);
  for (double& v : img.values()) v = rng.normal();
  gaussian_blur_reflect(img, sigma);

  // Equalize the per-pixel variance the reflective blur leaves behind, so
  // every pixel's rank is (nearly) uniformly distributed and fixed-point
  // histograms stay flat. The two passes are independent across the other
  // axis, so the output variance is the product of the per-axis ones.
  {
    const long radius = std::max<long>(1, static_cast<long>(std::ceil(3.0 * sigma)));
    const std::vector<double> kernel = gauss_kernel(sigma, radius);
    const std::vector<double> vy = reflect_pass_variance(dims.h, radius, kernel);
    const std::vector<double> vx = reflect_pass_variance(dims.w, radius, kernel);
    for (std::size_t y = 0; y < dims.h; ++y) {
      for (std::size_t x = 0; x < dims.w; ++x) {
        img.at(y, x) /= std::sqrt(vy[y] * vx[x]);
      }
    }
  }

  // Rank transform: the sorted values become exactly the uniform grid
  // 0.02 + 0.98 * (rank + phase) / N with a per-image phase in [0, 1). Ties
  // (measure zero for blurred noise) break by pixel index. The phase slides
  // the whole grid inside [0.02, 1.0], so pooled pixel histograms stay
  // exactly uniform while the pixel sum varies between images. A fixed grid
  // would freeze the sum, leaving the global-brightness direction with zero
  // variance, and an inverse fitted on such data cannot recover the
  // brightness of any other image family.
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  const std::vector<double>& v = img.values();
  std::stable_sort(order.begin(), order.end(),
                   [&v](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  const double phase = rng.uniform(0.0, 1.0);
  Image out(dims);
  for (std::size_t rank = 0; rank < n; ++rank) {
    out.values()[order[rank]] =
        0.02 + 0.98 * (static_cast<double>(rank) + phase) / static_cast<double>(n);
  }

  TargetImage t;
  t.values = std::move(out);
  t.family = Family::texture;
  t.gen_seed = seed;
  return t;
}

TargetImage enlarge_center_crop(const TargetImage& target, double factor) {
  if (!(factor >= 1.0)) {
    raise(Errc::invalid_argument, "enlarge_center_crop: factor must be >= 1");
  }
  const Dims dims = target.values.dims();
  const bool binary = is_binary(target.values);
  const Dims big{static_cast<std::size_t>(std::lround(static_cast<double>(dims.h) * factor)),
                 static_cast<std::size_t>(std::lround(static_cast<double>(dims.w) * factor))};
  Image up = bilinear_resize(target.values, big);
  const std::size_t oy = (big.h - dims.h) / 2, ox = (big.w - dims.w) / 2;
  Image crop(dims);
  for (std::size_t y = 0; y < dims.h; ++y) {
    for (std::size_t x = 0; x < dims.w; ++x) {
      crop.at(y, x) = up.at(oy + y, ox + x);
    }
  }
  crop = clamp01(std::move(crop));
  if (binary) {
    for (double& p : crop.values()) p = p >= 0.5 ? 1.0 : 0.0;
  }
  TargetImage t = target;
  t.values = std::move(crop);
  return t;
}

Image modulate_with(const Image& target, double amplitude, double cycles_x,
                    double cycles_y, double phase_x, double phase_y) {
  if (!(amplitude > 0.0)) {
    raise(Errc::invalid_argument, "modulate: amplitude must be positive");
  }
  if (!in_unit_range(target)) {
    raise(Errc::invalid_argument, "modulate: target values must lie in [0, 1]");
  }
  const std::size_t h = target.height(), w = target.width();
  const double kx = 2.0 * std::numbers::pi * cycles_x / static_cast<double>(w);
  const double ky = 2.0 * std::numbers::pi * cycles_y / static_cast<double>(h);
  Image out(target.dims());
  for (std::size_t y = 0; y < h; ++y) {
    const double sy = std::sin(ky * static_cast<double>(y) + phase_y);
    for (std::size_t x = 0; x < w; ++x) {
      const double sx = std::sin(kx * static_cast<double>(x) + phase_x);
      // (P + 2A) / (4A) with P = A (sx + sy); the amplitude cancels exactly,
      // so this stays stable down to A -> 0+.
      const double p_pos = (sx + sy + 2.0) * 0.25;
      out.at(y, x) = target.at(y, x) * p_pos;
    }
  }
  return clamp01(std::move(out));
}

TargetImage modulate(const TargetImage& target, const ModulationParams& params) {
  if (params.cycles_choices.empty()) {
    raise(Errc::invalid_spec, "modulate: cycles_choices must not be empty");
  }
  Rng rng(params.phase_seed);
  // Draw order: amplitude (uniform mode only), cycles x, cycles y, phase x,
  // phase y.
  double amplitude = 1.0;
  if (params.amplitude_mode == AmplitudeMode::uniform) {
    amplitude = 1.0 - rng.next_double();  // (0, 1]
  }
  const double cx = params.cycles_choices[rng.below(params.cycles_choices.size())];
  const double cy = params.cycles_choices[rng.below(params.cycles_choices.size())];
  const double px = rng.uniform(0.0, 2.0 * std::numbers::pi);
  const double py = rng.uniform(0.0, 2.0 * std::numbers::pi);

  TargetImage t = target;
  t.values = modulate_with(target.values, amplitude, cx, cy, px, py);
  return t;
}

TargetImage superpose_targets(const TargetImage& a, const TargetImage& b) {
  if (!(a.values.dims() == b.values.dims())) {
    raise(Errc::shape, "superpose_targets: dims mismatch");
  }
  TargetImage t;
  t.family = a.family;
  t.values = Image(a.values.dims());
  for (std::size_t i = 0; i < t.values.size(); ++i) {
    t.values.values()[i] =
        std::min(a.values.values()[i] + b.values.values()[i], 1.0);
  }
  return t;
}

TargetImage embed(const TargetImage& target, Dims canvas_dims,
                  std::size_t offset_y, std::size_t offset_x) {
  const Dims td = target.values.dims();
  if (offset_y + td.h > canvas_dims.h || offset_x + td.w > canvas_dims.w) {
    raise(Errc::invalid_offset, "embed: target does not fit the canvas at this offset");
  }
  TargetImage t = target;
  t.values = Image(canvas_dims);
  for (std::size_t y = 0; y < td.h; ++y) {
    for (std::size_t x = 0; x < td.w; ++x) {
      t.values.at(offset_y + y, offset_x + x) = target.values.at(y, x);
    }
  }
  return t;
}

namespace {

bool recipe_is_embedded(CaseRecipe r) {
  return r == CaseRecipe::embedded_fixed || r == CaseRecipe::embedded_random;
}

TargetImage base_target(const DatasetSpec& spec,
                        std::span<const TargetImage> pool, std::uint64_t seed,
                        std::size_t pool_index) {
  if (!pool.empty()) {
    const TargetImage& src = pool[pool_index % pool.size()];
    if (!(src.values.dims() == spec.target_dims)) {
      raise(Errc::shape, "build_dataset: pool image dims do not match target_dims");
    }
    return src;
  }
  switch (spec.family) {
    case Family::digit: return gen_digit(seed, spec.target_dims);
    case Family::texture: return gen_texture(seed, spec.target_dims);
    case Family::external:
      raise(Errc::invalid_spec, "build_dataset: the external family needs a pool of images");
  }
  raise(Errc::invalid_spec, "build_dataset: unknown family");
}

}  // namespace

Dataset build_dataset(const DatasetSpec& spec,
                      const media::TransmissionMedium& medium,
                      std::span<const TargetImage> pool) {
  if (spec.family == Family::texture && !pool.empty()) {
    raise(Errc::invalid_spec, "build_dataset: the texture family is always generated");
  }
  if (recipe_is_embedded(spec.case_recipe)) {
    if (!(spec.canvas_dims == medium.spec.in_dims)) {
      raise(Errc::shape, "build_dataset: canvas_dims must match the medium input plane");
    }
    if (spec.target_dims.h > spec.canvas_dims.h ||
        spec.target_dims.w > spec.canvas_dims.w) {
      raise(Errc::shape, "build_dataset: target does not fit the canvas");
    }
  } else if (!(spec.target_dims == medium.spec.in_dims)) {
    raise(Errc::shape, "build_dataset: target_dims must match the medium input plane");
  }

  std::vector<TargetImage> targets;
  targets.reserve(spec.count);
  for (std::size_t i = 0; i < spec.count; ++i) {
    const std::uint64_t item = derive_seed(spec.seed, i);
    const std::uint64_t s_target = derive_seed(item, 0);
    const std::uint64_t s_second = derive_seed(item, 1);
    const std::uint64_t s_mod = derive_seed(item, 2);
    const std::uint64_t s_embed = derive_seed(item, 3);

    TargetImage t = base_target(spec, pool, s_target, i);

    ModulationParams mod;
    mod.phase_seed = s_mod;
    switch (spec.case_recipe) {
      case CaseRecipe::plain:
        break;
      case CaseRecipe::enlarged:
        t = enlarge_center_crop(t, 1.5);
        break;
      case CaseRecipe::mod_a:
        t = enlarge_center_crop(t, 1.5);
        mod.amplitude_mode = AmplitudeMode::fixed_one;
        t = modulate(t, mod);
        break;
      case CaseRecipe::mod_b:
        t = enlarge_center_crop(t, 1.5);
        mod.amplitude_mode = AmplitudeMode::uniform;
        t = modulate(t, mod);
        break;
      case CaseRecipe::mod_c: {
        TargetImage second =
            pool.empty()
                ? base_target(spec, pool, s_second, i)
                : pool[Rng(s_second).below(pool.size())];
        t = superpose_targets(t, second);
        t = enlarge_center_crop(t, 1.5);
        mod.amplitude_mode = AmplitudeMode::uniform;
        t = modulate(t, mod);
        break;
      }
      case CaseRecipe::embedded_fixed:
        t = embed(t, spec.canvas_dims, (spec.canvas_dims.h - spec.target_dims.h) / 2,
                  (spec.canvas_dims.w - spec.target_dims.w) / 2);
        break;
      case CaseRecipe::embedded_random: {
        Rng ernd(s_embed);
        const std::size_t oy = ernd.below(spec.canvas_dims.h - spec.target_dims.h + 1);
        const std::size_t ox = ernd.below(spec.canvas_dims.w - spec.target_dims.w + 1);
        t = embed(t, spec.canvas_dims, oy, ox);
        break;
      }
    }
    t.gen_seed = pool.empty() ? std::optional<std::uint64_t>(item) : std::nullopt;
    targets.push_back(std::move(t));
  }
  return assemble_dataset(std::move(targets), medium, spec);
}

Dataset assemble_dataset(std::vector<TargetImage> targets,
                         const media::TransmissionMedium& medium,
                         const DatasetSpec& spec) {
  Dataset ds;
  ds.spec = spec;
  // A zero canvas means "no embedding plane". Record the target plane
  // instead, so the stored spec stays valid through save and load.
  if (ds.spec.canvas_dims.h == 0 || ds.spec.canvas_dims.w == 0) {
    ds.spec.canvas_dims = ds.spec.target_dims;
  }
  ds.medium_fingerprint = media::medium_fingerprint(medium);
  ds.pairs.reserve(targets.size());
  for (TargetImage& t : targets) {
    media::SpecklePattern sp = propagate(medium, t.values);
    ds.pairs.emplace_back(std::move(t), std::move(sp));
  }
  return ds;
}

namespace {

std::uint32_t read_be32(const std::uint8_t* p) {
  return (static_cast<std::uint32_t>(p[0]) << 24) |
         (static_cast<std::uint32_t>(p[1]) << 16) |
         (static_cast<std::uint32_t>(p[2]) << 8) |
         static_cast<std::uint32_t>(p[3]);
}

void write_be32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 24));
  out.push_back(static_cast<std::uint8_t>(v >> 16));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v));
}

std::string hex32(std::uint32_t v) {
  static const char* d = "0123456789abcdef";
  std::string s = "0x";
  for (int shift = 28; shift >= 0; shift -= 4) s += d[(v >> shift) & 0xf];
  return s;
}

constexpr std::uint32_t kIdxImageMagic = 0x00000803u;
constexpr std::uint32_t kIdxLabelMagic = 0x00000801u;

}  // namespace

IdxData load_idx(std::span<const std::uint8_t> image_bytes) {
  if (image_bytes.size() < 4) {
    raise(Errc::truncation, "idx: image stream shorter than the 4-byte magic");
  }
  const std::uint32_t magic = read_be32(image_bytes.data());
  if (magic != kIdxImageMagic) {
    raise(Errc::format, "idx: bad image magic: expected 0x00000803, got " + hex32(magic));
  }
  if (image_bytes.size() < 16) {
    raise(Errc::truncation, "idx: image header needs 16 bytes, got " +
                                std::to_string(image_bytes.size()));
  }
  const std::uint64_t count = read_be32(image_bytes.data() + 4);
  const std::uint64_t rows = read_be32(image_bytes.data() + 8);
  const std::uint64_t cols = read_be32(image_bytes.data() + 12);
  if (count > 0 && (rows == 0 || cols == 0)) {
    raise(Errc::format, "idx: zero image dimensions");
  }
  // 32-bit factors: the product fits 96 bits, so guard in two steps.
  if (rows != 0 && cols > std::numeric_limits<std::uint64_t>::max() / std::max<std::uint64_t>(rows, 1)) {
    raise(Errc::format, "idx: image dimensions overflow");
  }
  const std::uint64_t per = rows * cols;
  if (per != 0 && count > (std::numeric_limits<std::uint64_t>::max() - 16) / per) {
    raise(Errc::format, "idx: image payload size overflows");
  }
  const std::uint64_t need = 16 + count * per;
  if (image_bytes.size() < need) {
    raise(Errc::truncation, "idx: expected " + std::to_string(need) +
                                " bytes, got " + std::to_string(image_bytes.size()));
  }
  if (image_bytes.size() > need) {
    raise(Errc::format, "idx: " + std::to_string(image_bytes.size() - need) +
                            " trailing bytes after the image payload");
  }

  IdxData out;
  out.images.reserve(count);
  const std::uint8_t* p = image_bytes.data() + 16;
  for (std::uint64_t i = 0; i < count; ++i) {
    TargetImage t;
    t.family = Family::external;
    t.values = Image(Dims{rows, cols});
    for (std::uint64_t k = 0; k < per; ++k) {
      t.values.values()[k] = static_cast<double>(*p++) / 255.0;
    }
    out.images.push_back(std::move(t));
  }
  return out;
}

IdxData load_idx(std::span<const std::uint8_t> image_bytes,
                 std::span<const std::uint8_t> label_bytes) {
  IdxData out = load_idx(image_bytes);
  if (label_bytes.size() < 4) {
    raise(Errc::truncation, "idx: label stream shorter than the 4-byte magic");
  }
  const std::uint32_t magic = read_be32(label_bytes.data());
  if (magic != kIdxLabelMagic) {
    raise(Errc::format, "idx: bad label magic: expected 0x00000801, got " + hex32(magic));
  }
  if (label_bytes.size() < 8) {
    raise(Errc::truncation, "idx: label header needs 8 bytes, got " +
                                std::to_string(label_bytes.size()));
  }
  const std::uint64_t count = read_be32(label_bytes.data() + 4);
  const std::uint64_t need = 8 + count;
  if (label_bytes.size() < need) {
    raise(Errc::truncation, "idx: expected " + std::to_string(need) +
                                " label bytes, got " + std::to_string(label_bytes.size()));
  }
  if (label_bytes.size() > need) {
    raise(Errc::format, "idx: trailing bytes after the label payload");
  }
  if (count != out.images.size()) {
    raise(Errc::consistency, "idx: " + std::to_string(out.images.size()) +
                                 " images but " + std::to_string(count) + " labels");
  }
  out.labels.assign(label_bytes.begin() + 8, label_bytes.end());
  return out;
}

std::vector<std::uint8_t> save_idx_images(std::span<const TargetImage> images) {
  Dims dims{0, 0};
  if (!images.empty()) dims = images[0].values.dims();
  for (const TargetImage& t : images) {
    if (!(t.values.dims() == dims)) {
      raise(Errc::consistency, "idx: images must all share one size");
    }
  }
  std::vector<std::uint8_t> out;
  out.reserve(16 + images.size() * dims.pixels());
  write_be32(out, kIdxImageMagic);
  write_be32(out, static_cast<std::uint32_t>(images.size()));
  write_be32(out, static_cast<std::uint32_t>(dims.h));
  write_be32(out, static_cast<std::uint32_t>(dims.w));
  for (const TargetImage& t : images) {
    for (double v : t.values.values()) {
      const long b = std::lround(std::clamp(v, 0.0, 1.0) * 255.0);
      out.push_back(static_cast<std::uint8_t>(b));
    }
  }
  return out;
}

std::vector<std::uint8_t> save_idx_labels(std::span<const std::uint8_t> labels) {
  std::vector<std::uint8_t> out;
  out.reserve(8 + labels.size());
  write_be32(out, kIdxLabelMagic);
  write_be32(out, static_cast<std::uint32_t>(labels.size()));
  out.insert(out.end(), labels.begin(), labels.end());
  return out;
}

TargetImage to_digit_target(const TargetImage& src, Dims dims) {
  const Dims sd = src.values.dims();
  Image img;
  if (sd == dims) {
    img = src.values;
  } else if (sd.h <= dims.h && sd.w <= dims.w) {
    img = Image(dims);
    const std::size_t oy = (dims.h - sd.h) / 2, ox = (dims.w - sd.w) / 2;
    for (std::size_t y = 0; y < sd.h; ++y) {
      for (std::size_t x = 0; x < sd.w; ++x) {
        img.at(oy + y, ox + x) = src.values.at(y, x);
      }
    }
  } else {
    img = bilinear_resize(src.values, dims);
  }
  for (double& v : img.values()) v = v >= 0.5 ? 1.0 : 0.0;
  TargetImage t;
  t.values = std::move(img);
  t.family = Family::digit;
  return t;
}

std::uint64_t target_hash(const TargetImage& t) {
  Fnv1a64 h;
  h.update_u32(static_cast<std::uint32_t>(t.values.height()));
  h.update_u32(static_cast<std::uint32_t>(t.values.width()));
  for (double v : t.values.values()) h.update_f64(v);
  return h.digest();
}

}  // namespace spk::datasets
