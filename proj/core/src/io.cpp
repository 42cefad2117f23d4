#include "scatterkit/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cctype>
#include <cstring>
#include <fstream>
#include <limits>

#include <json.hpp>

#include "scatterkit/error.hpp"
#include "scatterkit/hash.hpp"
#include "scatterkit/version.hpp"

namespace spk::io {

using nlohmann::json;

namespace {

// Header fields above these are treated as corruption rather than intent.
constexpr std::uint32_t kMaxSide = 65535;
constexpr std::uint32_t kMaxCount = 1u << 24;

void push_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v >> 16));
  out.push_back(static_cast<std::uint8_t>(v >> 24));
}

void push_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
  push_u32(out, static_cast<std::uint32_t>(v));
  push_u32(out, static_cast<std::uint32_t>(v >> 32));
}

void push_f64(std::vector<std::uint8_t>& out, double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, 8);
  push_u64(out, bits);
}

void push_f32(std::vector<std::uint8_t>& out, float v) {
  std::uint32_t bits;
  std::memcpy(&bits, &v, 4);
  push_u32(out, bits);
}

std::string printable(std::span<const std::uint8_t> bytes) {
  std::string s;
  for (std::uint8_t b : bytes) {
    if (b >= 0x20 && b < 0x7f) {
      s.push_back(static_cast<char>(b));
    } else {
      static const char* hex = "0123456789abcdef";
      s += "\\x";
      s.push_back(hex[b >> 4]);
      s.push_back(hex[b & 0xf]);
    }
  }
  return s;
}

// Sequential little-endian reader with typed failures.
class Reader {
 public:
  Reader(std::span<const std::uint8_t> bytes, const char* container)
      : bytes_(bytes), container_(container) {}

  void expect_magic(const char* magic) {
    if (bytes_.size() < 4) {
      raise(Errc::truncation, std::string(container_) +
                                  ": file ends before the 4-byte magic (got " +
                                  std::to_string(bytes_.size()) + " bytes)");
    }
    if (std::memcmp(bytes_.data(), magic, 4) != 0) {
      raise(Errc::format, std::string(container_) + ": expected magic \"" +
                              magic + "\", got \"" +
                              printable(bytes_.subspan(0, 4)) + "\"");
    }
    pos_ = 4;
  }

  std::uint8_t u8(const char* what) {
    need(1, what);
    return bytes_[pos_++];
  }

  std::uint32_t u32(const char* what) {
    need(4, what);
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i) v = (v << 8) | bytes_[pos_ + static_cast<std::size_t>(i)];
    pos_ += 4;
    return v;
  }

  std::uint64_t u64(const char* what) {
    const std::uint64_t lo = u32(what);
    const std::uint64_t hi = u32(what);
    return lo | (hi << 32);
  }

  double f64(const char* what) {
    const std::uint64_t bits = u64(what);
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
  }

  float f32(const char* what) {
    const std::uint32_t bits = u32(what);
    float v;
    std::memcpy(&v, &bits, 4);
    return v;
  }

  std::size_t pos() const { return pos_; }
  std::size_t size() const { return bytes_.size(); }

  // The whole payload must be consumed; anything after is corruption.
  void expect_end() const {
    if (pos_ != bytes_.size()) {
      raise(Errc::format, std::string(container_) + ": " +
                              std::to_string(bytes_.size() - pos_) +
                              " trailing bytes after the payload");
    }
  }

  void expect_total(std::uint64_t total) const {
    if (bytes_.size() < total) {
      raise(Errc::truncation, std::string(container_) + ": expected " +
                                  std::to_string(total) + " bytes, file ends at " +
                                  std::to_string(bytes_.size()));
    }
    if (bytes_.size() > total) {
      raise(Errc::format, std::string(container_) + ": " +
                              std::to_string(bytes_.size() - total) +
                              " trailing bytes after the payload");
    }
  }

 private:
  void need(std::size_t n, const char* what) {
    if (pos_ + n > bytes_.size()) {
      raise(Errc::truncation, std::string(container_) + ": " + what +
                                  " needs " + std::to_string(n) +
                                  " bytes at offset " + std::to_string(pos_) +
                                  ", file ends at " + std::to_string(bytes_.size()));
    }
  }

  std::span<const std::uint8_t> bytes_;
  const char* container_;
  std::size_t pos_ = 0;
};

Dims most_square(std::size_t pixels) {
  for (std::size_t h = static_cast<std::size_t>(std::sqrt(static_cast<double>(pixels)));
       h >= 1; --h) {
    if (pixels % h == 0) return {h, pixels / h};
  }
  return {1, pixels};
}

Dims plane_dims(std::optional<Dims> hint, std::size_t pixels, const char* which) {
  if (!hint) return most_square(pixels);
  if (hint->pixels() != pixels) {
    raise(Errc::shape, std::string("load_medium: ") + which + " dims hint " +
                           std::to_string(hint->h) + "x" + std::to_string(hint->w) +
                           " does not cover " + std::to_string(pixels) + " pixels");
  }
  return *hint;
}

std::uint64_t parse_hex64(const std::string& s, const char* what) {
  if (s.size() != 16) {
    raise(Errc::format, std::string(what) + ": expected 16 hex digits, got \"" + s + "\"");
  }
  std::uint64_t v = 0;
  for (char c : s) {
    v <<= 4;
    if (c >= '0' && c <= '9') v |= static_cast<std::uint64_t>(c - '0');
    else if (c >= 'a' && c <= 'f') v |= static_cast<std::uint64_t>(c - 'a' + 10);
    else if (c >= 'A' && c <= 'F') v |= static_cast<std::uint64_t>(c - 'A' + 10);
    else raise(Errc::format, std::string(what) + ": non-hex digit in \"" + s + "\"");
  }
  return v;
}

}  // namespace

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    raise(Errc::io, "cannot open " + path.string() + " for reading");
  }
  in.seekg(0, std::ios::end);
  const std::streamoff n = in.tellg();
  in.seekg(0, std::ios::beg);
  std::vector<std::uint8_t> bytes(static_cast<std::size_t>(n));
  if (n > 0) {
    in.read(reinterpret_cast<char*>(bytes.data()), n);
  }
  if (!in) {
    raise(Errc::io, "cannot read " + path.string());
  }
  return bytes;
}

void write_file(const std::filesystem::path& path,
                std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    raise(Errc::io, "cannot open " + path.string() + " for writing");
  }
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  out.flush();
  if (!out) {
    raise(Errc::io, "cannot write " + path.string());
  }
}

void write_text(const std::filesystem::path& path, std::string_view text) {
  write_file(path, {reinterpret_cast<const std::uint8_t*>(text.data()), text.size()});
}

std::vector<std::uint8_t> encode_medium(const media::TransmissionMedium& medium) {
  const bool linear = medium.spec.kind == media::MediumKind::linear;
  const std::size_t rows = medium.out_pixels();
  const std::size_t cols = medium.in_pixels();
  std::vector<std::uint8_t> out;
  out.reserve(13 + rows * cols * (linear ? 8 : 16));
  out.insert(out.end(), {'S', 'T', 'M', '1'});
  out.push_back(linear ? 0 : 1);
  push_u32(out, static_cast<std::uint32_t>(rows));
  push_u32(out, static_cast<std::uint32_t>(cols));
  if (linear) {
    for (double v : medium.real_matrix.values()) push_f64(out, v);
  } else {
    for (const std::complex<double>& v : medium.complex_matrix.values()) {
      push_f64(out, v.real());
      push_f64(out, v.imag());
    }
  }
  return out;
}

media::TransmissionMedium decode_medium(std::span<const std::uint8_t> bytes,
                                        std::optional<Dims> in_dims,
                                        std::optional<Dims> out_dims) {
  Reader r(bytes, "stm");
  r.expect_magic("STM1");
  const std::uint8_t kind = r.u8("kind byte");
  if (kind > 1) {
    raise(Errc::format, "stm: unknown medium kind byte " + std::to_string(kind));
  }
  const std::uint32_t rows = r.u32("row count");
  const std::uint32_t cols = r.u32("column count");
  if (rows == 0 || cols == 0) {
    raise(Errc::format, "stm: matrix dimensions must be nonzero");
  }
  if (rows > kMaxSide * kMaxSide || cols > kMaxSide * kMaxSide) {
    raise(Errc::format, "stm: unreasonable matrix dimensions");
  }
  const bool linear = kind == 0;
  const std::uint64_t doubles =
      static_cast<std::uint64_t>(rows) * cols * (linear ? 1 : 2);
  r.expect_total(13 + doubles * 8);

  media::TransmissionMedium m;
  m.spec.kind = linear ? media::MediumKind::linear : media::MediumKind::coherent;
  m.spec.in_dims = plane_dims(in_dims, cols, "input");
  m.spec.out_dims = plane_dims(out_dims, rows, "output");
  m.spec.seed = 0;  // not stored
  if (linear) {
    m.real_matrix = Matrix(rows, cols);
    for (double& v : m.real_matrix.values()) {
      v = r.f64("matrix entry");
      if (!std::isfinite(v) || v < 0.0) {
        raise(Errc::format, "stm: linear medium entries must be finite and nonnegative");
      }
    }
  } else {
    m.complex_matrix = CMatrix(rows, cols);
    for (std::complex<double>& v : m.complex_matrix.values()) {
      const double re = r.f64("matrix entry");
      const double im = r.f64("matrix entry");
      if (!std::isfinite(re) || !std::isfinite(im)) {
        raise(Errc::format, "stm: coherent medium entries must be finite");
      }
      v = {re, im};
    }
  }
  r.expect_end();
  return m;
}

void save_medium(const media::TransmissionMedium& medium,
                 const std::filesystem::path& path) {
  write_file(path, encode_medium(medium));
}

media::TransmissionMedium load_medium(const std::filesystem::path& path,
                                      std::optional<Dims> in_dims,
                                      std::optional<Dims> out_dims) {
  return decode_medium(read_file(path), in_dims, out_dims);
}

namespace {

bool is_embedded(datasets::CaseRecipe r) {
  return r == datasets::CaseRecipe::embedded_fixed ||
         r == datasets::CaseRecipe::embedded_random;
}

Dims stored_target_dims(const datasets::DatasetSpec& spec) {
  return is_embedded(spec.case_recipe) ? spec.canvas_dims : spec.target_dims;
}

json dims_json(Dims d) { return json::array({d.h, d.w}); }

Dims dims_from_json(const json& j, const char* what) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number_unsigned() ||
      !j[1].is_number_unsigned()) {
    raise(Errc::format, std::string(what) + ": dims must be [h, w] with unsigned entries");
  }
  const auto h = j[0].get<std::uint64_t>();
  const auto w = j[1].get<std::uint64_t>();
  if (h == 0 || w == 0 || h > kMaxSide || w > kMaxSide) {
    raise(Errc::format, std::string(what) + ": dims out of range");
  }
  return {static_cast<std::size_t>(h), static_cast<std::size_t>(w)};
}

}  // namespace

std::vector<std::uint8_t> encode_dataset(const datasets::Dataset& ds) {
  const std::size_t n = ds.pairs.size();
  Dims td = stored_target_dims(ds.spec);
  Dims sd{0, 0};
  if (n > 0) {
    td = ds.pairs[0].first.values.dims();
    sd = ds.pairs[0].second.values.dims();
  }
  std::vector<std::uint8_t> out;
  out.reserve(24 + n * (td.pixels() + sd.pixels()) * 4);
  out.insert(out.end(), {'S', 'D', 'S', '1'});
  push_u32(out, static_cast<std::uint32_t>(n));
  push_u32(out, static_cast<std::uint32_t>(td.h));
  push_u32(out, static_cast<std::uint32_t>(td.w));
  push_u32(out, static_cast<std::uint32_t>(sd.h));
  push_u32(out, static_cast<std::uint32_t>(sd.w));
  for (const auto& [t, y] : ds.pairs) {
    if (!(t.values.dims() == td) || !(y.values.dims() == sd)) {
      raise(Errc::consistency, "encode_dataset: pair dims differ across the dataset");
    }
    for (double v : t.values.values()) push_f32(out, static_cast<float>(v));
    for (double v : y.values.values()) push_f32(out, static_cast<float>(v));
  }
  return out;
}

std::string dataset_sidecar_json(const datasets::Dataset& ds) {
  json j;
  j["spec"] = {
      {"family", datasets::family_name(ds.spec.family)},
      {"recipe", datasets::recipe_name(ds.spec.case_recipe)},
      {"count", ds.spec.count},
      {"target_dims", dims_json(ds.spec.target_dims)},
      {"canvas_dims", dims_json(ds.spec.canvas_dims)},
      {"seed", ds.spec.seed},
  };
  j["medium_fingerprint"] = hex64(ds.medium_fingerprint);
  return j.dump(2) + "\n";
}

datasets::Dataset decode_dataset(std::span<const std::uint8_t> bytes,
                                 std::string_view sidecar_json) {
  Reader r(bytes, "sds");
  r.expect_magic("SDS1");
  const std::uint32_t count = r.u32("pair count");
  const std::uint32_t th = r.u32("target height");
  const std::uint32_t tw = r.u32("target width");
  const std::uint32_t sh = r.u32("speckle height");
  const std::uint32_t sw = r.u32("speckle width");
  if (count > kMaxCount) {
    raise(Errc::format, "sds: unreasonable pair count");
  }
  if (count > 0 &&
      (th == 0 || tw == 0 || sh == 0 || sw == 0 || th > kMaxSide ||
       tw > kMaxSide || sh > kMaxSide || sw > kMaxSide)) {
    raise(Errc::format, "sds: plane dimensions out of range");
  }
  const std::uint64_t per_pair =
      (static_cast<std::uint64_t>(th) * tw + static_cast<std::uint64_t>(sh) * sw) * 4;
  r.expect_total(24 + static_cast<std::uint64_t>(count) * per_pair);

  datasets::Dataset ds;
  try {
    const json j = json::parse(sidecar_json);
    const json& s = j.at("spec");
    const auto family_str = s.at("family").get<std::string>();
    const auto family = datasets::parse_family(family_str);
    if (!family) raise(Errc::format, "sds sidecar: unknown family \"" + family_str + "\"");
    const auto recipe_str = s.at("recipe").get<std::string>();
    const auto recipe = datasets::parse_recipe(recipe_str);
    if (!recipe) raise(Errc::format, "sds sidecar: unknown recipe \"" + recipe_str + "\"");
    ds.spec.family = *family;
    ds.spec.case_recipe = *recipe;
    ds.spec.count = s.at("count").get<std::uint64_t>();
    ds.spec.target_dims = dims_from_json(s.at("target_dims"), "sds sidecar");
    ds.spec.canvas_dims = dims_from_json(s.at("canvas_dims"), "sds sidecar");
    ds.spec.seed = s.at("seed").get<std::uint64_t>();
    ds.medium_fingerprint =
        parse_hex64(j.at("medium_fingerprint").get<std::string>(), "sds sidecar");
  } catch (const json::exception& e) {
    raise(Errc::format, std::string("sds sidecar: ") + e.what());
  }

  if (ds.spec.count != count) {
    raise(Errc::consistency, "sds: sidecar count " + std::to_string(ds.spec.count) +
                                 " does not match file count " + std::to_string(count));
  }
  if (count > 0) {
    const Dims expect = stored_target_dims(ds.spec);
    if (!(expect == Dims{th, tw})) {
      raise(Errc::consistency,
            "sds: stored target dims " + std::to_string(th) + "x" + std::to_string(tw) +
                " do not match the sidecar spec");
    }
  }

  const Dims tdims{th, tw};
  const Dims sdims{sh, sw};
  ds.pairs.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    datasets::TargetImage t;
    t.family = ds.spec.family;
    t.values = Image(tdims);
    for (double& v : t.values.values()) {
      v = static_cast<double>(r.f32("target value"));
      if (!std::isfinite(v) || v < 0.0 || v > 1.0) {
        raise(Errc::format, "sds: target value out of [0, 1] in pair " + std::to_string(i));
      }
    }
    media::SpecklePattern y;
    y.medium_fingerprint = ds.medium_fingerprint;
    y.values = Image(sdims);
    for (double& v : y.values.values()) {
      v = static_cast<double>(r.f32("speckle value"));
      if (!std::isfinite(v) || v < 0.0) {
        raise(Errc::format, "sds: speckle value must be finite and nonnegative in pair " +
                                std::to_string(i));
      }
    }
    ds.pairs.emplace_back(std::move(t), std::move(y));
  }
  r.expect_end();
  return ds;
}

void save_dataset(const datasets::Dataset& ds, const std::filesystem::path& path) {
  write_file(path, encode_dataset(ds));
  std::filesystem::path sidecar = path;
  sidecar.replace_extension(".json");
  write_text(sidecar, dataset_sidecar_json(ds));
}

datasets::Dataset load_dataset(const std::filesystem::path& path) {
  const std::vector<std::uint8_t> bytes = read_file(path);
  std::filesystem::path sidecar = path;
  sidecar.replace_extension(".json");
  const std::vector<std::uint8_t> side = read_file(sidecar);
  return decode_dataset(bytes,
                        std::string_view(reinterpret_cast<const char*>(side.data()),
                                         side.size()));
}

std::vector<std::uint8_t> encode_mapping(const learners::LearnedMapping& m) {
  const std::size_t in_px = m.in_dims.pixels();
  const std::size_t out_px = m.out_dims.pixels();
  const bool ridge = m.kind() == learners::MappingKind::ridge_affine;
  std::vector<std::uint8_t> out;
  out.insert(out.end(), {'S', 'L', 'M', '1'});
  out.push_back(ridge ? 0 : 1);
  push_u32(out, static_cast<std::uint32_t>(m.in_dims.h));
  push_u32(out, static_cast<std::uint32_t>(m.in_dims.w));
  push_u32(out, static_cast<std::uint32_t>(m.out_dims.h));
  push_u32(out, static_cast<std::uint32_t>(m.out_dims.w));
  if (ridge) {
    const auto& p = std::get<learners::RidgeParams>(m.params);
    if (p.weights.rows() != out_px || p.weights.cols() != in_px ||
        p.target_mean.size() != out_px || p.speckle_mean.size() != in_px) {
      raise(Errc::shape, "encode_mapping: ridge parameter shapes do not match the planes");
    }
    push_u32(out, 0);
    push_u64(out, m.training_fingerprint);
    for (double v : p.weights.values()) push_f64(out, v);
    for (double v : p.target_mean) push_f64(out, v);
    for (double v : p.speckle_mean) push_f64(out, v);
  } else {
    const auto& p = std::get<learners::NetParams>(m.params);
    const std::size_t hidden = p.w1.rows();
    if (hidden == 0 || p.w1.cols() != in_px || p.b1.size() != hidden ||
        p.w2.rows() != out_px || p.w2.cols() != hidden || p.b2.size() != out_px) {
      raise(Errc::shape, "encode_mapping: net parameter shapes do not match the planes");
    }
    push_u32(out, static_cast<std::uint32_t>(hidden));
    push_u64(out, m.training_fingerprint);
    for (double v : p.w1.values()) push_f64(out, v);
    for (double v : p.b1) push_f64(out, v);
    for (double v : p.w2.values()) push_f64(out, v);
    for (double v : p.b2) push_f64(out, v);
  }
  return out;
}

learners::LearnedMapping decode_mapping(std::span<const std::uint8_t> bytes) {
  Reader r(bytes, "slm");
  r.expect_magic("SLM1");
  const std::uint8_t kind = r.u8("kind byte");
  if (kind > 1) {
    raise(Errc::format, "slm: unknown mapping kind byte " + std::to_string(kind));
  }
  const std::uint32_t in_h = r.u32("input height");
  const std::uint32_t in_w = r.u32("input width");
  const std::uint32_t out_h = r.u32("output height");
  const std::uint32_t out_w = r.u32("output width");
  const std::uint32_t hidden = r.u32("hidden width");
  if (in_h == 0 || in_w == 0 || out_h == 0 || out_w == 0 || in_h > kMaxSide ||
      in_w > kMaxSide || out_h > kMaxSide || out_w > kMaxSide || hidden > kMaxSide) {
    raise(Errc::format, "slm: plane dimensions out of range");
  }
  const std::uint64_t in_px = static_cast<std::uint64_t>(in_h) * in_w;
  const std::uint64_t out_px = static_cast<std::uint64_t>(out_h) * out_w;

  learners::LearnedMapping m;
  m.in_dims = {in_h, in_w};
  m.out_dims = {out_h, out_w};

  std::uint64_t doubles = 0;
  if (kind == 0) {
    if (hidden != 0) {
      raise(Errc::format, "slm: a ridge mapping must store hidden width 0");
    }
    doubles = out_px * in_px + out_px + in_px;
  } else {
    if (hidden == 0) {
      raise(Errc::format, "slm: a net mapping needs a nonzero hidden width");
    }
    doubles = static_cast<std::uint64_t>(hidden) * in_px + hidden +
              out_px * hidden + out_px;
  }
  r.expect_total(33 + doubles * 8);
  m.training_fingerprint = r.u64("training fingerprint");

  const auto finite_f64 = [&r](const char* what) {
    const double v = r.f64(what);
    if (!std::isfinite(v)) {
      raise(Errc::format, std::string("slm: ") + what + " must be finite");
    }
    return v;
  };

  if (kind == 0) {
    learners::RidgeParams p;
    p.weights = Matrix(out_px, in_px);
    for (double& v : p.weights.values()) v = finite_f64("weight");
    p.target_mean.resize(out_px);
    for (double& v : p.target_mean) v = finite_f64("target mean");
    p.speckle_mean.resize(in_px);
    for (double& v : p.speckle_mean) v = finite_f64("speckle mean");
    m.params = std::move(p);
  } else {
    learners::NetParams p;
    p.w1 = Matrix(hidden, in_px);
    for (double& v : p.w1.values()) v = finite_f64("layer-1 weight");
    p.b1.resize(hidden);
    for (double& v : p.b1) v = finite_f64("layer-1 bias");
    p.w2 = Matrix(out_px, hidden);
    for (double& v : p.w2.values()) v = finite_f64("layer-2 weight");
    p.b2.resize(out_px);
    for (double& v : p.b2) v = finite_f64("layer-2 bias");
    m.params = std::move(p);
  }
  r.expect_end();
  return m;
}

void save_mapping(const learners::LearnedMapping& m,
                  const std::filesystem::path& path) {
  write_file(path, encode_mapping(m));
}

learners::LearnedMapping load_mapping(const std::filesystem::path& path) {
  return decode_mapping(read_file(path));
}

std::vector<std::uint8_t> encode_pgm(const Image& img) {
  if (img.height() == 0 || img.width() == 0) {
    raise(Errc::empty_input, "encode_pgm: empty image");
  }
  std::string header = "P5\n" + std::to_string(img.width()) + " " +
                       std::to_string(img.height()) + "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.reserve(out.size() + img.size());
  for (double v : img.values()) {
    const double c = std::min(1.0, std::max(0.0, v));
    out.push_back(static_cast<std::uint8_t>(std::lround(c * 255.0)));
  }
  return out;
}

namespace {

// Whitespace and '#' comments are legal between PGM header tokens.
void pgm_skip(std::span<const std::uint8_t> b, std::size_t& pos) {
  while (pos < b.size()) {
    if (std::isspace(b[pos])) {
      ++pos;
    } else if (b[pos] == '#') {
      while (pos < b.size() && b[pos] != '\n') ++pos;
    } else {
      break;
    }
  }
}

std::uint32_t pgm_int(std::span<const std::uint8_t> b, std::size_t& pos,
                      const char* what) {
  pgm_skip(b, pos);
  if (pos >= b.size()) {
    raise(Errc::truncation, std::string("pgm: file ends before ") + what);
  }
  if (!std::isdigit(b[pos])) {
    raise(Errc::format, std::string("pgm: ") + what + " is not a number");
  }
  std::uint64_t v = 0;
  while (pos < b.size() && std::isdigit(b[pos])) {
    v = v * 10 + (b[pos] - '0');
    if (v > 1000000000ull) {
      raise(Errc::format, std::string("pgm: ") + what + " is out of range");
    }
    ++pos;
  }
  return static_cast<std::uint32_t>(v);
}

}  // namespace

Image decode_pgm(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 2) {
    raise(Errc::truncation, "pgm: file ends before the magic");
  }
  if (bytes[0] != 'P' || bytes[1] != '5') {
    raise(Errc::format, "pgm: expected magic \"P5\", got \"" +
                            printable(bytes.subspan(0, 2)) + "\"");
  }
  std::size_t pos = 2;
  const std::uint32_t w = pgm_int(bytes, pos, "width");
  const std::uint32_t h = pgm_int(bytes, pos, "height");
  const std::uint32_t maxval = pgm_int(bytes, pos, "maxval");
  if (w == 0 || h == 0 || w > kMaxSide || h > kMaxSide) {
    raise(Errc::format, "pgm: image dimensions out of range");
  }
  if (maxval != 255) {
    raise(Errc::format, "pgm: only maxval 255 is supported, got " + std::to_string(maxval));
  }
  if (pos >= bytes.size() || !std::isspace(bytes[pos])) {
    raise(Errc::format, "pgm: a single whitespace byte must follow the maxval");
  }
  ++pos;
  const std::uint64_t pixels = static_cast<std::uint64_t>(w) * h;
  if (bytes.size() - pos < pixels) {
    raise(Errc::truncation, "pgm: expected " + std::to_string(pixels) +
                                " pixel bytes, got " + std::to_string(bytes.size() - pos));
  }
  if (bytes.size() - pos > pixels) {
    raise(Errc::format, "pgm: trailing bytes after the pixel data");
  }
  Image img(Dims{h, w});
  for (double& v : img.values()) {
    v = static_cast<double>(bytes[pos++]) / 255.0;
  }
  return img;
}

void save_pgm(const Image& img, const std::filesystem::path& path) {
  write_file(path, encode_pgm(img));
}

Image load_pgm(const std::filesystem::path& path) {
  return decode_pgm(read_file(path));
}

std::string format_number(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v,
                                 std::chars_format::general, 6);
  return std::string(buf, res.ptr);
}

namespace {

std::string opt_number(const std::optional<double>& v) {
  return v ? format_number(*v) : std::string();
}

}  // namespace

std::string metrics_csv(std::string_view case_label,
                        std::span<const experiments::EvalItem> items) {
  std::string out = "case,family,index,pcc,ssim,cosine,dice\n";
  for (const experiments::EvalItem& item : items) {
    out += case_label;
    out += ',';
    out += item.label;
    out += ',';
    out += std::to_string(item.index);
    out += ',';
    out += opt_number(item.report.pcc);
    out += ',';
    out += opt_number(item.report.ssim);
    out += ',';
    out += opt_number(item.report.cosine);
    out += ',';
    out += opt_number(item.report.dice);
    out += '\n';
  }
  return out;
}

std::string trend_csv(std::span<const experiments::TrendRow> rows) {
  std::string out = "check,detail,lhs,rhs,margin,required,pass\n";
  for (const experiments::TrendRow& r : rows) {
    out += r.check;
    out += ',';
    out += r.detail;
    out += ',';
    out += format_number(r.lhs);
    out += ',';
    out += format_number(r.rhs);
    out += ',';
    out += format_number(r.margin);
    out += ',';
    out += r.required ? "true" : "false";
    out += ',';
    out += r.pass ? "true" : "false";
    out += '\n';
  }
  return out;
}

std::string histogram_csv(std::span<const std::size_t> counts,
                          std::span<const double> frequencies) {
  if (counts.size() != frequencies.size() || counts.empty()) {
    raise(Errc::shape, "histogram_csv: counts and frequencies must align and be nonempty");
  }
  const double bins = static_cast<double>(counts.size());
  std::string out = "bin_lo,bin_hi,count,frequency\n";
  for (std::size_t b = 0; b < counts.size(); ++b) {
    out += format_number(static_cast<double>(b) / bins);
    out += ',';
    out += format_number(static_cast<double>(b + 1) / bins);
    out += ',';
    out += std::to_string(counts[b]);
    out += ',';
    out += format_number(frequencies[b]);
    out += '\n';
  }
  return out;
}

namespace {

json ridge_json(const learners::RidgeConfig& c) {
  return {
      {"lambda_rel", c.lambda_rel},
      {"solver", c.solver == learners::RidgeSolver::cholesky ? "cholesky" : "cg"},
      {"cg_tol", c.cg_tol},
      {"cg_max_iter", c.cg_max_iter},
  };
}

json net_json(const learners::NetConfig& c) {
  return {
      {"hidden_width", c.hidden_width},
      {"learning_rate", c.learning_rate},
      {"beta1", c.beta1},
      {"beta2", c.beta2},
      {"epsilon", c.epsilon},
      {"batch_size", c.batch_size},
      {"max_epochs", c.max_epochs},
      {"early_stop_patience", c.early_stop_patience},
      {"dice_weight", c.dice_weight},
      {"validation_fraction", c.validation_fraction},
      {"init_seed", c.init_seed},
  };
}

json config_json_object(const experiments::ExperimentConfig& cfg) {
  return {
      {"medium_kind", media::medium_kind_name(cfg.medium_kind)},
      {"target_dims", dims_json(cfg.target_dims)},
      {"speckle_dims", dims_json(cfg.speckle_dims)},
      {"canvas_dims", dims_json(cfg.canvas_dims)},
      {"train_count", cfg.train_count},
      {"test_count", cfg.test_count},
      {"learner",
       cfg.learner == learners::MappingKind::ridge_affine ? "ridge" : "net"},
      {"ridge", ridge_json(cfg.ridge)},
      {"net", net_json(cfg.net)},
      {"master_seed", cfg.master_seed},
  };
}

void apply_ridge(const json& j, learners::RidgeConfig& c) {
  for (const auto& [key, val] : j.items()) {
    if (key == "lambda_rel") {
      c.lambda_rel = val.get<double>();
      if (!(c.lambda_rel >= 0.0)) raise(Errc::format, "config: ridge.lambda_rel must be >= 0");
    } else if (key == "solver") {
      const auto s = val.get<std::string>();
      if (s == "cholesky") c.solver = learners::RidgeSolver::cholesky;
      else if (s == "cg") c.solver = learners::RidgeSolver::conjugate_gradient;
      else raise(Errc::format, "config: unknown ridge solver \"" + s + "\"");
    } else if (key == "cg_tol") {
      c.cg_tol = val.get<double>();
      if (!(c.cg_tol > 0.0)) raise(Errc::format, "config: ridge.cg_tol must be > 0");
    } else if (key == "cg_max_iter") {
      c.cg_max_iter = val.get<std::size_t>();
    } else {
      raise(Errc::format, "config: unknown ridge key \"" + key + "\"");
    }
  }
}

void apply_net(const json& j, learners::NetConfig& c) {
  for (const auto& [key, val] : j.items()) {
    if (key == "hidden_width") c.hidden_width = val.get<std::size_t>();
    else if (key == "learning_rate") c.learning_rate = val.get<double>();
    else if (key == "beta1") c.beta1 = val.get<double>();
    else if (key == "beta2") c.beta2 = val.get<double>();
    else if (key == "epsilon") c.epsilon = val.get<double>();
    else if (key == "batch_size") c.batch_size = val.get<std::size_t>();
    else if (key == "max_epochs") c.max_epochs = val.get<std::size_t>();
    else if (key == "early_stop_patience") c.early_stop_patience = val.get<std::size_t>();
    else if (key == "dice_weight") c.dice_weight = val.get<double>();
    else if (key == "validation_fraction") c.validation_fraction = val.get<double>();
    else if (key == "init_seed") c.init_seed = val.get<std::uint64_t>();
    else raise(Errc::format, "config: unknown net key \"" + key + "\"");
  }
}

}  // namespace

experiments::ExperimentConfig parse_experiment_config(std::string_view json_text) {
  experiments::ExperimentConfig cfg;
  try {
    const json j = json::parse(json_text);
    if (!j.is_object()) {
      raise(Errc::format, "config: the top level must be a JSON object");
    }
    for (const auto& [key, val] : j.items()) {
      if (key == "medium_kind") {
        const auto s = val.get<std::string>();
        if (s == "linear") cfg.medium_kind = media::MediumKind::linear;
        else if (s == "coherent") cfg.medium_kind = media::MediumKind::coherent;
        else raise(Errc::format, "config: unknown medium kind \"" + s + "\"");
      } else if (key == "target_dims") {
        cfg.target_dims = dims_from_json(val, "config");
      } else if (key == "speckle_dims") {
        cfg.speckle_dims = dims_from_json(val, "config");
      } else if (key == "canvas_dims") {
        cfg.canvas_dims = dims_from_json(val, "config");
      } else if (key == "train_count") {
        cfg.train_count = val.get<std::size_t>();
      } else if (key == "test_count") {
        cfg.test_count = val.get<std::size_t>();
      } else if (key == "learner") {
        const auto s = val.get<std::string>();
        if (s == "ridge") cfg.learner = learners::MappingKind::ridge_affine;
        else if (s == "net") cfg.learner = learners::MappingKind::small_net;
        else raise(Errc::format, "config: unknown learner \"" + s + "\"");
      } else if (key == "ridge") {
        apply_ridge(val, cfg.ridge);
      } else if (key == "net") {
        apply_net(val, cfg.net);
      } else if (key == "master_seed") {
        cfg.master_seed = val.get<std::uint64_t>();
      } else {
        raise(Errc::format, "config: unknown key \"" + key + "\"");
      }
    }
  } catch (const json::exception& e) {
    raise(Errc::format, std::string("config: ") + e.what());
  }
  return cfg;
}

std::string experiment_config_json(const experiments::ExperimentConfig& cfg) {
  return config_json_object(cfg).dump(2) + "\n";
}

std::uint64_t config_hash(const experiments::ExperimentConfig& cfg) {
  return hash_string(config_json_object(cfg).dump());
}

RunManifest emit_report(const experiments::CaseReport& report,
                        const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) {
    raise(Errc::io, "cannot create directory " + dir.string() + ": " + ec.message());
  }

  RunManifest man;
  man.tool = kToolName;
  man.version = kToolVersion;
  man.case_label = experiments::case_name(report.id);
  man.config_hash = config_hash(report.config);
  man.stages = report.stages;

  const auto put_bytes = [&](const std::string& name,
                             const std::vector<std::uint8_t>& bytes) {
    write_file(dir / name, bytes);
    man.files.emplace_back(name, hash_bytes(bytes));
  };
  const auto put_text = [&](const std::string& name, const std::string& text) {
    write_text(dir / name, text);
    man.files.emplace_back(name, hash_string(text));
  };

  put_text("report.csv", metrics_csv(man.case_label, report.items));
  put_text("trend.csv", trend_csv({}));
  put_bytes("coverage_saturated.pgm", encode_pgm(report.coverage_saturated.values));
  put_bytes("coverage_normalized.pgm", encode_pgm(report.coverage_normalized.values));
  for (const experiments::EvalItem& item : report.items) {
    const std::string base = item.label + "_" + std::to_string(item.index);
    put_bytes("recon_" + base + ".pgm", encode_pgm(item.recon));
    put_bytes("truth_" + base + ".pgm", encode_pgm(item.truth));
  }

  json cj;
  cj["case"] = man.case_label;
  cj["config"] = config_json_object(report.config);
  cj["config_hash"] = hex64(man.config_hash);
  cj["medium_fingerprint"] = hex64(report.medium_fingerprint);
  cj["mean_pcc"] = experiments::summarize(report).mean_pcc;
  cj["test_overlap"] = report.test_overlap_by_label;
  if (report.untrained_region_max_abs) {
    cj["untrained_region_max_abs"] = *report.untrained_region_max_abs;
  }
  put_text("config.json", cj.dump(2) + "\n");

  json mj;
  mj["tool"] = man.tool;
  mj["version"] = man.version;
  mj["case"] = man.case_label;
  mj["config_hash"] = hex64(man.config_hash);
  mj["stages"] = {
      {"dataset_seconds", man.stages.dataset},
      {"train_seconds", man.stages.train},
      {"evaluate_seconds", man.stages.evaluate},
  };
  json files = json::array();
  for (const auto& [name, h] : man.files) {
    files.push_back({{"name", name}, {"fnv64", hex64(h)}});
  }
  mj["files"] = files;
  write_text(dir / "manifest.json", mj.dump(2) + "\n");
  return man;
}

experiments::CaseSummary load_case_summary(const std::filesystem::path& dir) {
  const std::vector<std::uint8_t> raw = read_file(dir / "config.json");
  experiments::CaseSummary s;
  try {
    const json j = json::parse(raw.begin(), raw.end());
    const auto case_label = j.at("case").get<std::string>();
    const auto id = experiments::parse_case(case_label);
    if (!id) {
      raise(Errc::format, "config.json: unknown case \"" + case_label + "\"");
    }
    s.id = *id;
    s.medium_fingerprint =
        parse_hex64(j.at("medium_fingerprint").get<std::string>(), "config.json");
    s.master_seed = j.at("config").at("master_seed").get<std::uint64_t>();
    for (const auto& [label, v] : j.at("mean_pcc").items()) {
      s.mean_pcc[label] = v.get<double>();
    }
  } catch (const json::exception& e) {
    raise(Errc::format, std::string("config.json: ") + e.what());
  }
  return s;
}

}  // namespace spk::io
