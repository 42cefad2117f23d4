#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <unistd.h>

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "scatterkit/datasets.hpp"
#include "scatterkit/error.hpp"
#include "scatterkit/experiments.hpp"
#include "scatterkit/hash.hpp"
#include "scatterkit/io.hpp"
#include "scatterkit/learners.hpp"
#include "scatterkit/media.hpp"
#include "scatterkit/rng.hpp"

using namespace spk;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir() {
  static const fs::path dir = [] {
    fs::path p = fs::temp_directory_path() /
                 ("scatterkit-io-test-" + std::to_string(::getpid()));
    fs::create_directories(p);
    return p;
  }();
  return dir;
}

media::TransmissionMedium make_medium(media::MediumKind kind) {
  media::MediumSpec s;
  s.kind = kind;
  s.in_dims = {4, 4};
  s.out_dims = {5, 5};
  s.seed = 12;
  return media::generate_medium(s);
}

datasets::Dataset make_dataset(std::size_t count = 5) {
  const auto medium = make_medium(media::MediumKind::linear);
  datasets::DatasetSpec spec;
  spec.family = datasets::Family::texture;
  spec.case_recipe = datasets::CaseRecipe::plain;
  spec.count = count;
  spec.target_dims = {4, 4};
  spec.canvas_dims = {4, 4};
  spec.seed = 9;
  return datasets::build_dataset(spec, medium);
}

}  // namespace

TEST_CASE("medium containers survive the round trip bit for bit") {
  for (auto kind : {media::MediumKind::linear, media::MediumKind::coherent}) {
    const auto medium = make_medium(kind);
    const auto bytes = io::encode_medium(medium);
    const auto back = io::decode_medium(bytes, medium.spec.in_dims,
                                        medium.spec.out_dims);
    CHECK(back.spec.kind == kind);
    CHECK(back.real_matrix == medium.real_matrix);
    CHECK(back.complex_matrix == medium.complex_matrix);
    CHECK(media::medium_fingerprint(back) == media::medium_fingerprint(medium));
    CHECK(io::encode_medium(back) == bytes);
  }
}

TEST_CASE("decoding a medium without dims recovers the most-square planes") {
  const auto medium = make_medium(media::MediumKind::linear);  // 16 -> 25 px
  const auto back = io::decode_medium(io::encode_medium(medium));
  CHECK(back.spec.in_dims == Dims{4, 4});
  CHECK(back.spec.out_dims == Dims{5, 5});
}

TEST_CASE("medium decode errors name the problem") {
  const auto bytes = io::encode_medium(make_medium(media::MediumKind::linear));

  auto bad = bytes;
  bad[0] = 'X';
  try {
    io::decode_medium(bad);
    FAIL("wrong magic must throw");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::format);
    CHECK(std::string(e.what()).find("STM1") != std::string::npos);
  }

  auto cut = bytes;
  cut.resize(bytes.size() - 7);
  try {
    io::decode_medium(cut);
    FAIL("short payload must throw");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::truncation);
  }
}

TEST_CASE("dataset containers round-trip through bytes and sidecar") {
  const auto ds = make_dataset();
  const auto bytes = io::encode_dataset(ds);
  const auto sidecar = io::dataset_sidecar_json(ds);
  const auto back = io::decode_dataset(bytes, sidecar);

  REQUIRE(back.pairs.size() == ds.pairs.size());
  CHECK(back.spec.family == ds.spec.family);
  CHECK(back.spec.case_recipe == ds.spec.case_recipe);
  CHECK(back.spec.seed == ds.spec.seed);
  CHECK(back.medium_fingerprint == ds.medium_fingerprint);
  // Pixels are stored as f32, so the round trip is exact only after one
  // pass through encode; a second pass must be bit-identical.
  CHECK(io::encode_dataset(back) == bytes);
  for (std::size_t i = 0; i < ds.pairs.size(); ++i) {
    for (std::size_t k = 0; k < 16; ++k) {
      CHECK(back.pairs[i].first.values.values()[k] ==
            doctest::Approx(ds.pairs[i].first.values.values()[k]).epsilon(1e-6));
    }
    CHECK(!back.pairs[i].first.gen_seed.has_value());  // seeds are not stored
  }
}

TEST_CASE("dataset save and load work through real files") {
  const auto ds = make_dataset(3);
  const fs::path p = temp_dir() / "ds.sds";
  io::save_dataset(ds, p);
  CHECK(fs::exists(p));
  CHECK(fs::exists(temp_dir() / "ds.json"));
  const auto back = io::load_dataset(p);
  CHECK(back.pairs.size() == 3);
  CHECK(back.medium_fingerprint == ds.medium_fingerprint);
}

TEST_CASE("dataset decode rejects byte streams that disagree with the header") {
  const auto ds = make_dataset(2);
  const auto bytes = io::encode_dataset(ds);
  const auto sidecar = io::dataset_sidecar_json(ds);

  auto cut = bytes;
  cut.resize(bytes.size() - 3);
  try {
    io::decode_dataset(cut, sidecar);
    FAIL("short payload must throw");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::truncation);
  }

  try {
    io::decode_dataset(bytes, "{ not json");
    FAIL("broken sidecar must throw");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::format);
  }
}

TEST_CASE("mapping containers round-trip for both learner kinds") {
  const auto ds = make_dataset(40);

  const learners::LearnedMapping ridge = learners::train_ridge(ds, {});
  const auto rbytes = io::encode_mapping(ridge);
  const auto rback = io::decode_mapping(rbytes);
  CHECK(rback.kind() == learners::MappingKind::ridge_affine);
  CHECK(rback.in_dims == ridge.in_dims);
  CHECK(rback.out_dims == ridge.out_dims);
  CHECK(rback.training_fingerprint == ridge.training_fingerprint);
  CHECK(std::get<learners::RidgeParams>(rback.params).weights ==
        std::get<learners::RidgeParams>(ridge.params).weights);
  CHECK(io::encode_mapping(rback) == rbytes);

  learners::NetConfig nc;
  nc.hidden_width = 8;
  nc.max_epochs = 2;
  nc.init_seed = 3;
  const learners::LearnedMapping net = learners::train_net(ds, nc);
  const auto nbytes = io::encode_mapping(net);
  const auto nback = io::decode_mapping(nbytes);
  CHECK(nback.kind() == learners::MappingKind::small_net);
  CHECK(std::get<learners::NetParams>(nback.params).w2 ==
        std::get<learners::NetParams>(net.params).w2);
  CHECK(io::encode_mapping(nback) == nbytes);

  const fs::path p = temp_dir() / "map.slm";
  io::save_mapping(ridge, p);
  const auto loaded = io::load_mapping(p);
  CHECK(std::get<learners::RidgeParams>(loaded.params).target_mean ==
        std::get<learners::RidgeParams>(ridge.params).target_mean);
}

TEST_CASE("mapping decode rejects a ridge header with a hidden width") {
  const auto ds = make_dataset(20);
  auto bytes = io::encode_mapping(learners::train_ridge(ds, {}));
  // Header: magic 4, kind 1, then five u32 fields; hidden is the fifth.
  const std::size_t hidden_off = 4 + 1 + 4 * 4;
  bytes[hidden_off] = 3;
  try {
    io::decode_mapping(bytes);
    FAIL("ridge mappings must store hidden width 0");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::format);
  }
}

TEST_CASE("pgm encoding quantises to bytes and reads back") {
  Rng rng(71);
  Image img({6, 9});
  for (double& v : img.values()) v = rng.next_double();

  const auto bytes = io::encode_pgm(img);
  const Image back = io::decode_pgm(bytes);
  REQUIRE(back.dims() == img.dims());
  for (std::size_t i = 0; i < img.size(); ++i) {
    CHECK(std::abs(back.values()[i] - img.values()[i]) <= 0.5 / 255.0 + 1e-12);
  }
  CHECK(io::encode_pgm(back) == bytes);

  const fs::path p = temp_dir() / "img.pgm";
  io::save_pgm(img, p);
  CHECK(io::load_pgm(p) == back);
}

TEST_CASE("pgm decode errors") {
  const auto good = io::encode_pgm(Image({2, 2}, 0.5));
  auto bad = good;
  bad[1] = '6';  // P6 is a different format
  CHECK_THROWS_AS(io::decode_pgm(bad), Error);
  auto cut = good;
  cut.resize(cut.size() - 1);
  try {
    io::decode_pgm(cut);
    FAIL("missing pixel byte must throw");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::truncation);
  }
}

TEST_CASE("number formatting is compact, locale-free and 6-significant") {
  CHECK(io::format_number(0.5) == "0.5");
  CHECK(io::format_number(1.0) == "1");
  CHECK(io::format_number(1.0 / 3.0) == "0.333333");
  CHECK(io::format_number(-2.5e-7) == "-2.5e-07");
  CHECK(io::format_number(123456789.0) == "1.23457e+08");
  CHECK(io::format_number(0.0) == "0");
}

TEST_CASE("csv writers emit one row per record") {
  std::vector<experiments::EvalItem> items(2);
  items[0].label = "texture";
  items[0].index = 2;
  items[0].report.id = "texture:2";
  items[0].report.pcc = 0.25;
  items[0].report.dice = 1.0;
  // ssim and cosine stay unset: the row keeps their cells empty.
  items[1] = items[0];
  items[1].index = 3;
  items[1].report.id = "texture:3";
  items[1].report.ssim = 0.5;

  const std::string csv = io::metrics_csv("C1", items);
  const auto lines = [](const std::string& s) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start < s.size()) {
      const auto end = s.find('\n', start);
      out.push_back(s.substr(start, end - start));
      if (end == std::string::npos) break;
      start = end + 1;
    }
    return out;
  }(csv);
  REQUIRE(lines.size() == 3);
  CHECK(lines[0] == "case,family,index,pcc,ssim,cosine,dice");
  CHECK(lines[1] == "C1,texture,2,0.25,,,1");
  CHECK(lines[2] == "C1,texture,3,0.25,0.5,,1");

  experiments::TrendRow row;
  row.check = "diversity_ladder";
  row.detail = "texture mean pcc C3 vs C2";
  row.lhs = 0.75;
  row.rhs = 0.5;
  row.margin = 0.05;
  row.required = true;
  row.pass = true;
  const std::string tcsv = io::trend_csv({&row, 1});
  CHECK(tcsv.find("check,detail,lhs,rhs,margin,required,pass") == 0);
  CHECK(tcsv.find("diversity_ladder,texture mean pcc C3 vs C2,0.75,0.5,0.05,true,true") !=
        std::string::npos);

  const std::vector<std::size_t> counts = {3, 0, 1};
  const std::vector<double> freqs = {0.75, 0.0, 0.25};
  const std::string hcsv = io::histogram_csv(counts, freqs);
  CHECK(hcsv ==
        "bin_lo,bin_hi,count,frequency\n"
        "0,0.333333,3,0.75\n"
        "0.333333,0.666667,0,0\n"
        "0.666667,1,1,0.25\n");
  CHECK_THROWS_AS(io::histogram_csv(counts, std::vector<double>{0.5}), Error);
}

TEST_CASE("experiment config json round-trips and hashes canonically") {
  const experiments::ExperimentConfig defaults;
  const auto parsed = io::parse_experiment_config("{}");
  CHECK(io::config_hash(parsed) == io::config_hash(defaults));

  const std::string text = R"({
    "medium_kind": "coherent",
    "target_dims": [8, 8],
    "train_count": 64,
    "ridge": {"lambda_rel": 0.05, "solver": "cg"},
    "master_seed": 3
  })";
  const auto cfg = io::parse_experiment_config(text);
  CHECK(cfg.medium_kind == media::MediumKind::coherent);
  CHECK(cfg.target_dims == Dims{8, 8});
  CHECK(cfg.train_count == 64);
  CHECK(cfg.ridge.lambda_rel == 0.05);
  CHECK(cfg.ridge.solver == learners::RidgeSolver::conjugate_gradient);
  CHECK(cfg.master_seed == 3);
  // Untouched keys keep their defaults.
  CHECK(cfg.speckle_dims == defaults.speckle_dims);

  const auto again = io::parse_experiment_config(io::experiment_config_json(cfg));
  CHECK(io::config_hash(again) == io::config_hash(cfg));
  CHECK(io::experiment_config_json(again) == io::experiment_config_json(cfg));

  CHECK_THROWS_AS(io::parse_experiment_config("{\"typo_key\": 1}"), Error);
  CHECK_THROWS_AS(io::parse_experiment_config("not json"), Error);
}

TEST_CASE("emit_report writes the full case directory and a faithful manifest") {
  experiments::ExperimentConfig cfg;
  cfg.target_dims = {8, 8};
  cfg.speckle_dims = {10, 10};
  cfg.canvas_dims = {12, 12};
  cfg.train_count = 32;
  cfg.test_count = 2;
  cfg.master_seed = 21;
  const auto report = experiments::run_case(experiments::CaseId::c1, cfg);

  const fs::path dir = temp_dir() / "case_c1";
  const io::RunManifest manifest = io::emit_report(report, dir);

  CHECK(manifest.case_label == "C1");
  CHECK(manifest.config_hash == io::config_hash(cfg));
  for (const char* name : {"report.csv", "trend.csv", "config.json",
                           "coverage_saturated.pgm", "coverage_normalized.pgm",
                           "manifest.json"}) {
    CHECK(fs::exists(dir / name));
  }
  // 2 labels x 2 tests, one recon and one truth each.
  std::size_t pgms = 0;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.path().extension() == ".pgm") ++pgms;
  }
  CHECK(pgms == 2 + 2 * 2 * 2);

  // Every manifest entry hashes the bytes actually on disk.
  for (const auto& [name, hash] : manifest.files) {
    const auto bytes = io::read_file(dir / name);
    CHECK(hash_bytes({bytes.data(), bytes.size()}) == hash);
  }

  const auto summary = io::load_case_summary(dir);
  const auto direct = experiments::summarize(report);
  CHECK(summary.id == direct.id);
  CHECK(summary.medium_fingerprint == direct.medium_fingerprint);
  CHECK(summary.master_seed == direct.master_seed);
  REQUIRE(summary.mean_pcc.size() == direct.mean_pcc.size());
  for (const auto& [label, value] : direct.mean_pcc) {
    CHECK(summary.mean_pcc.at(label) == doctest::Approx(value).epsilon(1e-9));
  }
}

TEST_CASE("read_file reports a missing path as an io error") {
  try {
    io::read_file(temp_dir() / "absent.bin");
    FAIL("missing file must throw");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::io);
  }
}

TEST_CASE("random truncation and corruption never escape the typed error space") {
  const auto medium_bytes = io::encode_medium(make_medium(media::MediumKind::linear));
  const auto ds = make_dataset(3);
  const auto dataset_bytes = io::encode_dataset(ds);
  const auto sidecar = io::dataset_sidecar_json(ds);
  const auto mapping_bytes = io::encode_mapping(learners::train_ridge(ds, {}));

  Rng rng(2024);
  std::size_t decoded_fine = 0, typed_errors = 0;
  for (int i = 0; i < 200; ++i) {
    const int which = static_cast<int>(rng.below(3));
    const auto& src = which == 0 ? medium_bytes
                     : which == 1 ? dataset_bytes
                                  : mapping_bytes;
    auto fuzzed = src;
    if (rng.below(2) == 0) {
      fuzzed.resize(rng.below(fuzzed.size()));
    } else {
      const std::size_t flips = 1 + rng.below(8);
      for (std::size_t f = 0; f < flips; ++f) {
        fuzzed[rng.below(fuzzed.size())] ^=
            static_cast<std::uint8_t>(1 + rng.below(255));
      }
    }
    try {
      switch (which) {
        case 0: io::decode_medium(fuzzed); break;
        case 1: io::decode_dataset(fuzzed, sidecar); break;
        default: io::decode_mapping(fuzzed); break;
      }
      ++decoded_fine;  // payload-only corruption can still parse
    } catch (const Error&) {
      ++typed_errors;
    }
    // Anything else (bad_alloc, logic_error, segfault) fails the test by
    // escaping this frame.
  }
  CHECK(decoded_fine + typed_errors == 200);
  CHECK(typed_errors > 50);
}
