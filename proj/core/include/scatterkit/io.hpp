#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "scatterkit/datasets.hpp"
#include "scatterkit/experiments.hpp"
#include "scatterkit/learners.hpp"
#include "scatterkit/media.hpp"

namespace spk::io {

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path,
                std::span<const std::uint8_t> bytes);
void write_text(const std::filesystem::path& path, std::string_view text);

// Medium container ".stm": magic "STM1", kind byte (0 linear, 1 coherent),
// rows and cols as u32 LE, then the matrix as f64 LE row-major, coherent
// entries interleaved (re, im). The file carries no plane shapes, so loading
// recovers each plane as the most-square factorisation of its pixel count
// unless explicit dims are passed.
std::vector<std::uint8_t> encode_medium(const media::TransmissionMedium& medium);
media::TransmissionMedium decode_medium(std::span<const std::uint8_t> bytes,
                                        std::optional<Dims> in_dims = {},
                                        std::optional<Dims> out_dims = {});
void save_medium(const media::TransmissionMedium& medium,
                 const std::filesystem::path& path);
media::TransmissionMedium load_medium(const std::filesystem::path& path,
                                      std::optional<Dims> in_dims = {},
                                      std::optional<Dims> out_dims = {});

// Dataset container ".sds": magic "SDS1", count u32 LE, stored target h/w
// u32 LE, speckle h/w u32 LE, then per pair the target followed by the
// speckle, each as f32 LE row-major. A JSON sidecar (same stem, ".json")
// carries the generation spec and the medium fingerprint; per-target
// generator seeds are not persisted.
std::vector<std::uint8_t> encode_dataset(const datasets::Dataset& ds);
std::string dataset_sidecar_json(const datasets::Dataset& ds);
datasets::Dataset decode_dataset(std::span<const std::uint8_t> bytes,
                                 std::string_view sidecar_json);
void save_dataset(const datasets::Dataset& ds,
                  const std::filesystem::path& path);
datasets::Dataset load_dataset(const std::filesystem::path& path);

// Mapping container ".slm": magic "SLM1", kind byte (0 ridge, 1 net),
// u32 LE in_h, in_w, out_h, out_w, hidden (0 for ridge), u64 LE training
// fingerprint, then f64 LE blocks: ridge W row-major, target mean, speckle
// mean; net W1, b1, W2, b2.
std::vector<std::uint8_t> encode_mapping(const learners::LearnedMapping& m);
learners::LearnedMapping decode_mapping(std::span<const std::uint8_t> bytes);
void save_mapping(const learners::LearnedMapping& m,
                  const std::filesystem::path& path);
learners::LearnedMapping load_mapping(const std::filesystem::path& path);

// 8-bit binary PGM (P5, maxval 255). Values map as round(v * 255) on write
// and byte / 255 on read.
std::vector<std::uint8_t> encode_pgm(const Image& img);
Image decode_pgm(std::span<const std::uint8_t> bytes);
void save_pgm(const Image& img, const std::filesystem::path& path);
Image load_pgm(const std::filesystem::path& path);

// Six significant digits, '.' decimal separator, locale independent.
std::string format_number(double v);

std::string metrics_csv(std::string_view case_label,
                        std::span<const experiments::EvalItem> items);
std::string trend_csv(std::span<const experiments::TrendRow> rows);
std::string histogram_csv(std::span<const std::size_t> counts,
                          std::span<const double> frequencies);

// Experiment config as JSON. Parsing starts from the defaults and overrides
// the keys present; unknown keys are rejected. Serialisation is canonical
// (sorted keys), and the config hash is FNV-1a over the compact dump.
experiments::ExperimentConfig parse_experiment_config(std::string_view json_text);
std::string experiment_config_json(const experiments::ExperimentConfig& cfg);
std::uint64_t config_hash(const experiments::ExperimentConfig& cfg);

struct RunManifest {
  std::string tool;
  std::string version;
  std::string case_label;
  std::uint64_t config_hash = 0;
  std::vector<std::pair<std::string, std::uint64_t>> files;  // name, content hash
  experiments::StageSeconds stages;
};

// Writes the case directory: report.csv, trend.csv, the two coverage maps,
// one reconstruction and one truth PGM per test image, config.json, and
// manifest.json last. Returns the manifest that was written.
RunManifest emit_report(const experiments::CaseReport& report,
                        const std::filesystem::path& dir);

// Reads back what compare needs from an emitted case directory.
experiments::CaseSummary load_case_summary(const std::filesystem::path& dir);

}  // namespace spk::io
