#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "scatterkit/datasets.hpp"
#include "scatterkit/diagnostics.hpp"
#include "scatterkit/learners.hpp"
#include "scatterkit/media.hpp"
#include "scatterkit/metrics.hpp"

namespace spk::experiments {

// The study grid. C1/C2 train on textures/plain digits, C3 on enlarged
// digits, C4A-C on modulated digits, C5 on textures embedded at one fixed
// canvas position, SIC on digits embedded at random positions.
enum class CaseId { c1, c2, c3, c4a, c4b, c4c, c5, sic };

std::string_view case_name(CaseId id);
std::optional<CaseId> parse_case(std::string_view token);

struct ExperimentConfig {
  media::MediumKind medium_kind = media::MediumKind::linear;
  Dims target_dims{16, 16};
  Dims speckle_dims{24, 24};
  Dims canvas_dims{32, 32};  // object plane of the embedded cases
  std::size_t train_count = 4096;
  std::size_t test_count = 32;  // per evaluated label
  learners::MappingKind learner = learners::MappingKind::ridge_affine;
  learners::RidgeConfig ridge;
  learners::NetConfig net;
  std::uint64_t master_seed = 7;
};

struct StageSeconds {
  double dataset = 0.0;
  double train = 0.0;
  double evaluate = 0.0;
};

struct EvalItem {
  std::string label;  // test family, with a position suffix for C5/SIC
  std::size_t index = 0;
  Image truth;
  Image recon;
  metrics::MetricReport report;
};

struct CaseReport {
  CaseId id = CaseId::c1;
  ExperimentConfig config;  // resolved (net init seed filled in)
  std::uint64_t medium_fingerprint = 0;
  diagnostics::CoverageMap coverage_saturated;   // over training targets
  diagnostics::CoverageMap coverage_normalized;
  std::vector<EvalItem> items;
  // Test targets whose exact pixel content also occurs in training. Zero for
  // the continuous texture family; the discrete digit space at these dims is
  // small enough that overlap is expected, so it is reported, not an error.
  std::map<std::string, std::size_t> test_overlap_by_label;
  // Largest |raw reconstruction| outside the trained canvas region, filled
  // for the fixed-position case. The training targets are constant zero
  // there, so an affine map trained on them must reproduce zero exactly.
  std::optional<double> untrained_region_max_abs;
  StageSeconds stages;
};

// Builds the case's medium and training set, trains the configured learner,
// and evaluates per case: C1-C4C on held-out plain texture and digit sets;
// C5 on tests embedded at the trained offset and two shifted offsets (right
// by half the target side, and diagonally); SIC on one fixed glyph at the
// four corner offsets of the valid range. Seeds derive from the master seed,
// so training and test streams never collide.
CaseReport run_case(CaseId id, const ExperimentConfig& cfg);

struct CaseSummary {
  CaseId id = CaseId::c1;
  std::uint64_t medium_fingerprint = 0;
  std::uint64_t master_seed = 0;
  std::map<std::string, double> mean_pcc;  // by eval label
};

CaseSummary summarize(const CaseReport& report);

struct TrendRow {
  std::string check;
  std::string detail;
  double lhs = 0.0;
  double rhs = 0.0;
  double margin = 0.0;
  bool required = false;
  bool pass = false;
};

// Ordinal claims across case summaries, each row passing when
// lhs >= rhs + margin. Fewer than two inputs give an empty table; mixed
// provenance (different medium or master seed) is a consistency error.
std::vector<TrendRow> compare_cases(std::span<const CaseSummary> summaries);

}  // namespace spk::experiments
