#include "cli.hpp"

#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "scatterkit/datasets.hpp"
#include "scatterkit/diagnostics.hpp"
#include "scatterkit/error.hpp"
#include "scatterkit/experiments.hpp"
#include "scatterkit/hash.hpp"
#include "scatterkit/io.hpp"
#include "scatterkit/learners.hpp"
#include "scatterkit/media.hpp"
#include "scatterkit/metrics.hpp"
#include "scatterkit/version.hpp"

namespace spk::cli {
namespace {

std::uint64_t parse_u64(const std::string& s, const std::string& what) {
  std::uint64_t v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
    raise(Errc::usage, what + " must be an unsigned integer, got \"" + s + "\"");
  }
  return v;
}

std::size_t parse_size(const std::string& s, const std::string& what) {
  return static_cast<std::size_t>(parse_u64(s, what));
}

Dims parse_dims_flag(const std::string& s, const std::string& flag) {
  const auto xpos = s.find('x');
  if (xpos == std::string::npos || xpos == 0 || xpos + 1 >= s.size()) {
    raise(Errc::usage, flag + " expects HxW, got \"" + s + "\"");
  }
  const Dims d{parse_size(s.substr(0, xpos), flag),
               parse_size(s.substr(xpos + 1), flag)};
  if (d.h == 0 || d.w == 0) {
    raise(Errc::usage, flag + " dimensions must be positive");
  }
  return d;
}

// Flag wins over the SCATTER_SEED environment variable, which wins over the
// per-command fallback.
std::uint64_t resolve_seed(const CLI::App* sub, std::uint64_t flag_value,
                           std::uint64_t fallback) {
  if (sub->count("--seed") > 0) return flag_value;
  if (const char* env = std::getenv("SCATTER_SEED")) {
    return parse_u64(env, "SCATTER_SEED");
  }
  return fallback;
}

std::vector<diagnostics::PixelPoint> parse_points(const std::string& s) {
  std::vector<diagnostics::PixelPoint> points;
  std::size_t start = 0;
  while (start <= s.size()) {
    const std::size_t end = std::min(s.find(';', start), s.size());
    const std::string token = s.substr(start, end - start);
    const auto comma = token.find(',');
    if (comma == std::string::npos) {
      raise(Errc::usage, "--points expects y,x pairs separated by ';', got \"" + token + "\"");
    }
    points.push_back({parse_size(token.substr(0, comma), "--points"),
                      parse_size(token.substr(comma + 1), "--points")});
    if (end == s.size()) break;
    start = end + 1;
  }
  return points;
}

std::vector<diagnostics::PixelPoint> interior_grid(Dims dims) {
  std::vector<diagnostics::PixelPoint> points;
  for (std::size_t ky = 1; ky <= 3; ++ky) {
    for (std::size_t kx = 1; kx <= 3; ++kx) {
      points.push_back({dims.h * ky / 4, dims.w * kx / 4});
    }
  }
  return points;
}

struct GenMediumOpts {
  std::string kind = "linear";
  std::string in_dims;
  std::string out_dims;
  std::uint64_t seed = 1;
  std::string out_file;
};

struct GenDatasetOpts {
  std::string family;
  std::string recipe = "plain";
  std::size_t count = 0;
  std::string medium_file;
  std::uint64_t seed = 1;
  std::string target_dims;
  std::string canvas_dims;
  std::string idx_images;
  std::string idx_labels;
  std::string out_file;
};

struct TrainOpts {
  std::string learner = "ridge";
  std::string dataset_file;
  std::string out_file;
  double lambda_rel = 1e-4;
  std::string solver = "cholesky";
  double cg_tol = 1e-10;
  std::size_t cg_max_iter = 0;
  std::size_t hidden = 256;
  double lr = 1e-4;
  std::size_t batch = 32;
  std::size_t epochs = 50;
  std::size_t patience = 5;
  double dice_weight = 0.3;
  double val_frac = 0.1;
  std::uint64_t init_seed = 0;
};

struct EvalOpts {
  std::string map_file;
  std::string dataset_file;
  std::string out_csv;
};

struct DiagnoseOpts {
  std::string dataset_file;
  std::string mode;
  std::string points;
  std::size_t bins = 256;
  std::string out_dir;
};

struct RunCaseOpts {
  std::string case_token;
  std::string config_file;
  std::uint64_t seed = 0;
  std::string out_dir;
};

struct CompareOpts {
  std::vector<std::string> report_dirs;
  std::string out_csv;
};

void do_gen_medium(const CLI::App* sub, const GenMediumOpts& o) {
  media::MediumSpec spec;
  spec.kind = o.kind == "linear" ? media::MediumKind::linear
                                 : media::MediumKind::coherent;
  spec.in_dims = parse_dims_flag(o.in_dims, "--in");
  spec.out_dims = parse_dims_flag(o.out_dims, "--out");
  spec.seed = resolve_seed(sub, o.seed, 1);
  const media::TransmissionMedium medium = media::generate_medium(spec);
  io::save_medium(medium, o.out_file);
  std::cout << "wrote " << o.out_file << ": " << media::medium_kind_name(spec.kind)
            << " medium " << spec.in_dims.h << "x" << spec.in_dims.w << " -> "
            << spec.out_dims.h << "x" << spec.out_dims.w << ", fingerprint "
            << hex64(media::medium_fingerprint(medium)) << "\n";
}

void do_gen_dataset(const CLI::App* sub, const GenDatasetOpts& o) {
  const media::TransmissionMedium medium = io::load_medium(o.medium_file);
  datasets::DatasetSpec spec;
  spec.family = *datasets::parse_family(o.family);
  spec.case_recipe = *datasets::parse_recipe(o.recipe);
  spec.count = o.count;
  const bool embedded = spec.case_recipe == datasets::CaseRecipe::embedded_fixed ||
                        spec.case_recipe == datasets::CaseRecipe::embedded_random;
  spec.canvas_dims = o.canvas_dims.empty() ? medium.spec.in_dims
                                           : parse_dims_flag(o.canvas_dims, "--canvas");
  if (!o.target_dims.empty()) {
    spec.target_dims = parse_dims_flag(o.target_dims, "--target");
  } else if (embedded) {
    raise(Errc::usage, "--target is required for the embedded recipes (the medium input plane is the canvas)");
  } else {
    spec.target_dims = medium.spec.in_dims;
  }
  spec.seed = resolve_seed(sub, o.seed, 1);

  std::vector<datasets::TargetImage> pool;
  if (!o.idx_images.empty()) {
    const auto image_bytes = io::read_file(o.idx_images);
    datasets::IdxData data;
    if (!o.idx_labels.empty()) {
      const auto label_bytes = io::read_file(o.idx_labels);
      data = datasets::load_idx(image_bytes, label_bytes);
    } else {
      data = datasets::load_idx(image_bytes);
    }
    pool.reserve(data.images.size());
    for (datasets::TargetImage& img : data.images) {
      if (spec.family == datasets::Family::digit) {
        pool.push_back(datasets::to_digit_target(img, spec.target_dims));
      } else if (!(img.values.dims() == spec.target_dims)) {
        datasets::TargetImage t;
        t.values = clamp01(bilinear_resize(img.values, spec.target_dims));
        t.family = img.family;
        pool.push_back(std::move(t));
      } else {
        pool.push_back(std::move(img));
      }
    }
  }

  const datasets::Dataset ds = datasets::build_dataset(spec, medium, pool);
  io::save_dataset(ds, o.out_file);
  std::filesystem::path sidecar(o.out_file);
  sidecar.replace_extension(".json");
  std::cout << "wrote " << ds.pairs.size() << " pairs to " << o.out_file
            << " (sidecar " << sidecar.string() << ")\n";
}

void do_train(const TrainOpts& o) {
  const datasets::Dataset ds = io::load_dataset(o.dataset_file);
  learners::LearnedMapping mapping;
  if (o.learner == "ridge") {
    learners::RidgeConfig cfg;
    cfg.lambda_rel = o.lambda_rel;
    cfg.solver = o.solver == "cg" ? learners::RidgeSolver::conjugate_gradient
                                  : learners::RidgeSolver::cholesky;
    cfg.cg_tol = o.cg_tol;
    cfg.cg_max_iter = o.cg_max_iter;
    mapping = learners::train_ridge(ds, cfg);
  } else {
    learners::NetConfig cfg;
    cfg.hidden_width = o.hidden;
    cfg.learning_rate = o.lr;
    cfg.batch_size = o.batch;
    cfg.max_epochs = o.epochs;
    cfg.early_stop_patience = o.patience;
    cfg.dice_weight = o.dice_weight;
    cfg.validation_fraction = o.val_frac;
    cfg.init_seed = o.init_seed;
    mapping = learners::train_net(ds, cfg);
  }
  io::save_mapping(mapping, o.out_file);
  std::cout << "trained " << o.learner << " mapping on " << ds.pairs.size()
            << " pairs, " << mapping.in_dims.h << "x" << mapping.in_dims.w
            << " -> " << mapping.out_dims.h << "x" << mapping.out_dims.w
            << ", wrote " << o.out_file << "\n";
}

void do_eval(const EvalOpts& o) {
  const learners::LearnedMapping mapping = io::load_mapping(o.map_file);
  const datasets::Dataset ds = io::load_dataset(o.dataset_file);
  const std::string fam = datasets::family_name(ds.spec.family);
  std::vector<experiments::EvalItem> items;
  items.reserve(ds.pairs.size());
  double pcc_sum = 0.0;
  std::size_t pcc_n = 0;
  for (std::size_t i = 0; i < ds.pairs.size(); ++i) {
    const auto& [truth, speckle] = ds.pairs[i];
    const learners::Reconstruction rec = learners::predict(mapping, speckle);
    experiments::EvalItem item;
    item.label = fam;
    item.index = i;
    item.truth = truth.values;
    item.recon = rec.values;
    item.report = metrics::evaluate_pair(fam + ":" + std::to_string(i),
                                         rec.values, truth.values);
    if (item.report.pcc) {
      pcc_sum += *item.report.pcc;
      ++pcc_n;
    }
    items.push_back(std::move(item));
  }
  io::write_text(o.out_csv, io::metrics_csv("-", items));
  std::cout << "evaluated " << items.size() << " pairs, wrote " << o.out_csv << "\n";
  if (pcc_n > 0) {
    std::cout << "mean pcc " << io::format_number(pcc_sum / static_cast<double>(pcc_n))
              << " over " << pcc_n << " pairs\n";
  }
}

void do_diagnose(const DiagnoseOpts& o) {
  const datasets::Dataset ds = io::load_dataset(o.dataset_file);
  std::vector<Image> targets;
  targets.reserve(ds.pairs.size());
  for (const auto& [t, y] : ds.pairs) targets.push_back(t.values);

  std::error_code ec;
  std::filesystem::create_directories(o.out_dir, ec);
  if (ec) {
    raise(Errc::io, "cannot create directory " + o.out_dir + ": " + ec.message());
  }
  const std::filesystem::path dir(o.out_dir);

  if (o.mode == "saturate") {
    const diagnostics::CoverageMap map = diagnostics::superpose_saturated(targets);
    io::save_pgm(map.values, dir / "coverage_saturated.pgm");
    std::cout << "wrote " << (dir / "coverage_saturated.pgm").string() << " over "
              << map.sample_count << " targets\n";
  } else if (o.mode == "normalize") {
    const diagnostics::CoverageMap map = diagnostics::superpose_normalized(targets);
    io::save_pgm(map.values, dir / "coverage_normalized.pgm");
    std::cout << "wrote " << (dir / "coverage_normalized.pgm").string() << " over "
              << map.sample_count << " targets\n";
  } else {
    if (targets.empty()) {
      raise(Errc::empty_input, "diagnose: the dataset holds no pairs");
    }
    const std::vector<diagnostics::PixelPoint> points =
        o.points.empty() ? interior_grid(targets[0].dims()) : parse_points(o.points);
    const diagnostics::HistogramSet set =
        diagnostics::pixel_histograms(targets, points, o.bins);
    for (const diagnostics::PixelHistogram& h : set.per_point) {
      const std::string name = "hist_" + std::to_string(h.point.y) + "_" +
                               std::to_string(h.point.x) + ".csv";
      io::write_text(dir / name, io::histogram_csv(h.counts, h.frequencies));
    }
    io::write_text(dir / "hist_pooled.csv",
                   io::histogram_csv(set.pooled_counts, set.pooled));
    std::cout << "wrote " << set.per_point.size() << " point histograms and the pooled"
              << " histogram to " << dir.string() << "\n";
  }
}

void do_run_case(const CLI::App* sub, const RunCaseOpts& o) {
  const auto id = experiments::parse_case(o.case_token);
  if (!id) {
    raise(Errc::usage, "unknown case \"" + o.case_token +
                           "\"; expected one of 1, 2, 3, 4a, 4b, 4c, 5, sic");
  }
  experiments::ExperimentConfig cfg;
  if (!o.config_file.empty()) {
    const auto bytes = io::read_file(o.config_file);
    cfg = io::parse_experiment_config(
        std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
  }
  cfg.master_seed = resolve_seed(sub, o.seed, cfg.master_seed);

  const experiments::CaseReport report = experiments::run_case(*id, cfg);
  const io::RunManifest man = io::emit_report(report, o.out_dir);

  std::cout << "case " << man.case_label << " (config " << hex64(man.config_hash)
            << ", medium " << hex64(report.medium_fingerprint) << ")\n";
  const experiments::CaseSummary summary = experiments::summarize(report);
  for (const auto& [label, mean] : summary.mean_pcc) {
    std::cout << "  mean pcc " << label << ": " << io::format_number(mean) << "\n";
  }
  if (report.untrained_region_max_abs) {
    std::cout << "  untrained region max |recon|: "
              << io::format_number(*report.untrained_region_max_abs) << "\n";
  }
  std::cout << "  stages: dataset " << io::format_number(report.stages.dataset)
            << " s, train " << io::format_number(report.stages.train)
            << " s, evaluate " << io::format_number(report.stages.evaluate) << " s\n";
  std::cout << "report written to " << o.out_dir << "\n";
}

void do_compare(const CompareOpts& o) {
  std::vector<experiments::CaseSummary> summaries;
  summaries.reserve(o.report_dirs.size());
  for (const std::string& dir : o.report_dirs) {
    summaries.push_back(io::load_case_summary(dir));
  }
  const std::vector<experiments::TrendRow> rows =
      experiments::compare_cases(summaries);
  io::write_text(o.out_csv, io::trend_csv(rows));
  std::size_t required = 0, passing = 0;
  for (const experiments::TrendRow& r : rows) {
    if (r.required) {
      ++required;
      if (r.pass) ++passing;
    }
  }
  std::cout << "wrote " << rows.size() << " trend rows to " << o.out_csv << " ("
            << passing << "/" << required << " required checks pass)\n";
}

}  // namespace

int cli_dispatch(int argc, const char* const* argv) {
  CLI::App app{"deterministic scattering-imaging simulator and analysis toolkit"};
  app.name("scatterkit");
  app.set_version_flag("--version", std::string(kToolVersion));
  app.require_subcommand(1);

  GenMediumOpts gm;
  CLI::App* gen_medium = app.add_subcommand("gen-medium", "generate a frozen random medium");
  gen_medium->add_option("--kind", gm.kind, "medium kind")
      ->check(CLI::IsMember({"linear", "coherent"}))
      ->capture_default_str();
  gen_medium->add_option("--in", gm.in_dims, "input plane HxW")->required();
  gen_medium->add_option("--out", gm.out_dims, "output plane HxW")->required();
  gen_medium->add_option("--seed", gm.seed, "generator seed");
  gen_medium->add_option("-o,--output", gm.out_file, "output .stm file")->required();

  GenDatasetOpts gd;
  CLI::App* gen_dataset = app.add_subcommand("gen-dataset", "generate target/speckle pairs through a medium");
  gen_dataset->add_option("--family", gd.family, "target family")
      ->check(CLI::IsMember({"digit", "texture", "external"}))
      ->required();
  gen_dataset->add_option("--recipe", gd.recipe, "target recipe")
      ->check(CLI::IsMember({"plain", "enlarged", "mod-a", "mod-b", "mod-c",
                             "embed-fixed", "embed-random"}))
      ->capture_default_str();
  gen_dataset->add_option("--n", gd.count, "number of pairs")->required();
  gen_dataset->add_option("--medium", gd.medium_file, "medium .stm file")->required();
  gen_dataset->add_option("--seed", gd.seed, "dataset seed");
  gen_dataset->add_option("--target", gd.target_dims, "target dims HxW (defaults to the medium input plane)");
  gen_dataset->add_option("--canvas", gd.canvas_dims, "canvas dims HxW for embedded recipes (defaults to the medium input plane)");
  gen_dataset->add_option("--idx", gd.idx_images, "IDX image file providing the target pool");
  gen_dataset->add_option("--idx-labels", gd.idx_labels, "IDX label file paired with --idx");
  gen_dataset->add_option("-o,--output", gd.out_file, "output .sds file")->required();

  TrainOpts tr;
  CLI::App* train = app.add_subcommand("train", "fit an inverse mapping on a dataset");
  train->add_option("--learner", tr.learner, "mapping family")
      ->check(CLI::IsMember({"ridge", "net"}))
      ->capture_default_str();
  train->add_option("--dataset", tr.dataset_file, "training .sds file")->required();
  train->add_option("-o,--output", tr.out_file, "output .slm file")->required();
  train->add_option("--lambda", tr.lambda_rel, "ridge: relative regularisation strength")
      ->capture_default_str();
  train->add_option("--solver", tr.solver, "ridge: normal-equation solver")
      ->check(CLI::IsMember({"cholesky", "cg"}))
      ->capture_default_str();
  train->add_option("--cg-tol", tr.cg_tol, "ridge: conjugate-gradient relative tolerance")
      ->capture_default_str();
  train->add_option("--cg-max-iter", tr.cg_max_iter, "ridge: conjugate-gradient iteration cap (0 = auto)")
      ->capture_default_str();
  train->add_option("--hidden", tr.hidden, "net: hidden layer width")->capture_default_str();
  train->add_option("--lr", tr.lr, "net: Adam learning rate")->capture_default_str();
  train->add_option("--batch", tr.batch, "net: minibatch size")->capture_default_str();
  train->add_option("--epochs", tr.epochs, "net: maximum epochs")->capture_default_str();
  train->add_option("--patience", tr.patience, "net: early-stopping patience in epochs")
      ->capture_default_str();
  train->add_option("--dice-weight", tr.dice_weight, "net: dice share of the loss")
      ->capture_default_str();
  train->add_option("--val-frac", tr.val_frac, "net: held-out validation fraction")
      ->capture_default_str();
  train->add_option("--init-seed", tr.init_seed, "net: weight/shuffle seed")
      ->capture_default_str();

  EvalOpts ev;
  CLI::App* eval_cmd = app.add_subcommand("eval", "score a mapping against a dataset");
  eval_cmd->add_option("--map", ev.map_file, "mapping .slm file")->required();
  eval_cmd->add_option("--dataset", ev.dataset_file, "evaluation .sds file")->required();
  eval_cmd->add_option("-o,--output", ev.out_csv, "output CSV file")->required();

  DiagnoseOpts dg;
  CLI::App* diagnose = app.add_subcommand("diagnose", "coverage and value-distribution diagnostics");
  diagnose->add_option("--dataset", dg.dataset_file, "dataset .sds file")->required();
  diagnose->add_option("--mode", dg.mode, "diagnostic to run")
      ->check(CLI::IsMember({"saturate", "normalize", "hist"}))
      ->required();
  diagnose->add_option("--points", dg.points, "hist: probe points \"y,x;y,x;...\" (default: an interior 3x3 grid)");
  diagnose->add_option("--bins", dg.bins, "hist: number of bins")->capture_default_str();
  diagnose->add_option("-o,--output", dg.out_dir, "output directory")->required();

  RunCaseOpts rc;
  CLI::App* run_case = app.add_subcommand("run-case", "run one study case end to end");
  run_case->add_option("--case", rc.case_token, "case id: 1, 2, 3, 4a, 4b, 4c, 5 or sic")
      ->required();
  run_case->add_option("--config", rc.config_file, "experiment config JSON file");
  run_case->add_option("--seed", rc.seed, "master seed override");
  run_case->add_option("-o,--output", rc.out_dir, "report directory")->required();

  CompareOpts cp;
  CLI::App* compare = app.add_subcommand("compare", "evaluate ordinal trends across case reports");
  compare->add_option("--reports", cp.report_dirs, "case report directories")
      ->required()
      ->expected(-1);
  compare->add_option("-o,--output", cp.out_csv, "output trend CSV")->required();

  try {
    app.parse(argc, argv);
    if (app.got_subcommand(gen_medium)) do_gen_medium(gen_medium, gm);
    else if (app.got_subcommand(gen_dataset)) do_gen_dataset(gen_dataset, gd);
    else if (app.got_subcommand(train)) do_train(tr);
    else if (app.got_subcommand(eval_cmd)) do_eval(ev);
    else if (app.got_subcommand(diagnose)) do_diagnose(dg);
    else if (app.got_subcommand(run_case)) do_run_case(run_case, rc);
    else if (app.got_subcommand(compare)) do_compare(cp);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      return app.exit(e);  // --help / --version end up here
    }
    std::cerr << "error:usage: " << e.what() << "\n";
    return 1;
  } catch (const Error& e) {
    std::cerr << "error:" << e.category() << ": " << e.what() << "\n";
    return errc_exit_code(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error:internal: " << e.what() << "\n";
    return 3;
  }
  return 0;
}

}  // namespace spk::cli
