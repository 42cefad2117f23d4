#include "scatterkit/learners.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "scatterkit/error.hpp"
#include "scatterkit/hash.hpp"
#include "scatterkit/metrics.hpp"
#include "scatterkit/rng.hpp"

namespace spk::learners {

namespace {

std::uint64_t training_fingerprint(const datasets::Dataset& ds,
                                   MappingKind kind) {
  Fnv1a64 h;
  h.update_u8(kind == MappingKind::ridge_affine ? 0 : 1);
  h.update_u8(static_cast<std::uint8_t>(ds.spec.family));
  h.update_u8(static_cast<std::uint8_t>(ds.spec.case_recipe));
  h.update_u64(ds.spec.count);
  h.update_u32(static_cast<std::uint32_t>(ds.spec.target_dims.h));
  h.update_u32(static_cast<std::uint32_t>(ds.spec.target_dims.w));
  h.update_u32(static_cast<std::uint32_t>(ds.spec.canvas_dims.h));
  h.update_u32(static_cast<std::uint32_t>(ds.spec.canvas_dims.w));
  h.update_u64(ds.spec.seed);
  h.update_u64(ds.medium_fingerprint);
  return h.digest();
}

struct DatasetShape {
  Dims in_dims;
  Dims out_dims;
};

DatasetShape check_dataset(const datasets::Dataset& ds, const char* who) {
  if (ds.pairs.empty()) {
    raise(Errc::empty_input, std::string(who) + ": dataset holds no pairs");
  }
  DatasetShape s;
  s.out_dims = ds.pairs[0].first.values.dims();
  s.in_dims = ds.pairs[0].second.values.dims();
  for (const auto& [t, y] : ds.pairs) {
    if (!(t.values.dims() == s.out_dims) || !(y.values.dims() == s.in_dims)) {
      raise(Errc::consistency, std::string(who) + ": pair dims differ across the dataset");
    }
  }
  return s;
}

}  // namespace

LearnedMapping train_ridge(const datasets::Dataset& dataset,
                           const RidgeConfig& cfg) {
  const DatasetShape shape = check_dataset(dataset, "train_ridge");
  if (cfg.lambda_rel < 0.0) {
    raise(Errc::invalid_argument, "train_ridge: lambda_rel must be >= 0");
  }
  const std::size_t n = dataset.pairs.size();
  const std::size_t p_in = shape.in_dims.pixels();
  const std::size_t p_out = shape.out_dims.pixels();

  RidgeParams rp;
  rp.speckle_mean.assign(p_in, 0.0);
  rp.target_mean.assign(p_out, 0.0);
  for (const auto& [t, y] : dataset.pairs) {
    for (std::size_t j = 0; j < p_in; ++j) rp.speckle_mean[j] += y.values.values()[j];
    for (std::size_t i = 0; i < p_out; ++i) rp.target_mean[i] += t.values.values()[i];
  }
  const double inv_n = 1.0 / static_cast<double>(n);
  for (double& v : rp.speckle_mean) v *= inv_n;
  for (double& v : rp.target_mean) v *= inv_n;

  // Centred data copies keep the moment accumulation cache-friendly.
  Matrix yc(n, p_in), xc(n, p_out);
  for (std::size_t s = 0; s < n; ++s) {
    const auto& [t, y] = dataset.pairs[s];
    double* yr = yc.row(s);
    for (std::size_t j = 0; j < p_in; ++j) yr[j] = y.values.values()[j] - rp.speckle_mean[j];
    double* xr = xc.row(s);
    for (std::size_t i = 0; i < p_out; ++i) xr[i] = t.values.values()[i] - rp.target_mean[i];
  }

  Matrix syy(p_in, p_in, 0.0);  // upper triangle first
  for (std::size_t s = 0; s < n; ++s) {
    const double* yr = yc.row(s);
    for (std::size_t i = 0; i < p_in; ++i) {
      const double a = yr[i];
      if (a == 0.0) continue;
      double* row = syy.row(i);
      for (std::size_t j = i; j < p_in; ++j) row[j] += a * yr[j];
    }
  }
  double tr = 0.0;
  for (std::size_t i = 0; i < p_in; ++i) tr += syy.at(i, i);
  const double lambda_eff = cfg.lambda_rel * tr / static_cast<double>(p_in);
  for (std::size_t i = 0; i < p_in; ++i) {
    for (std::size_t j = 0; j < i; ++j) syy.at(i, j) = syy.at(j, i);
    syy.at(i, i) += lambda_eff;
  }

  Matrix sxy(p_out, p_in, 0.0);
  for (std::size_t s = 0; s < n; ++s) {
    const double* xr = xc.row(s);
    const double* yr = yc.row(s);
    for (std::size_t i = 0; i < p_out; ++i) {
      const double a = xr[i];
      if (a == 0.0) continue;
      double* row = sxy.row(i);
      for (std::size_t j = 0; j < p_in; ++j) row[j] += a * yr[j];
    }
  }

  rp.weights = Matrix(p_out, p_in);
  if (cfg.solver == RidgeSolver::cholesky) {
    const CholeskyFactor chol(std::move(syy));
    std::vector<double> rhs(p_in);
    for (std::size_t i = 0; i < p_out; ++i) {
      for (std::size_t j = 0; j < p_in; ++j) rhs[j] = sxy.at(i, j);
      const std::vector<double> wrow = chol.solve(rhs);
      for (std::size_t j = 0; j < p_in; ++j) rp.weights.at(i, j) = wrow[j];
    }
  } else {
    const std::size_t max_iter =
        cfg.cg_max_iter == 0 ? 10 * p_in : cfg.cg_max_iter;
    std::vector<double> rhs(p_in);
    for (std::size_t i = 0; i < p_out; ++i) {
      for (std::size_t j = 0; j < p_in; ++j) rhs[j] = sxy.at(i, j);
      const CgResult r = conjugate_gradient(syy, rhs, cfg.cg_tol, max_iter);
      for (std::size_t j = 0; j < p_in; ++j) rp.weights.at(i, j) = r.x[j];
    }
  }

  LearnedMapping m;
  m.in_dims = shape.in_dims;
  m.out_dims = shape.out_dims;
  m.params = std::move(rp);
  m.training_fingerprint = training_fingerprint(dataset, MappingKind::ridge_affine);
  return m;
}

namespace {

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

struct Adam {
  std::vector<double> m, v;
  explicit Adam(std::size_t n) : m(n, 0.0), v(n, 0.0) {}

  void step(double* p, const double* g, std::size_t n, const NetConfig& cfg,
            double bc1, double bc2) {
    for (std::size_t i = 0; i < n; ++i) {
      m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g[i];
      v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g[i] * g[i];
      const double mhat = m[i] / bc1;
      const double vhat = v[i] / bc2;
      p[i] -= cfg.learning_rate * mhat / (std::sqrt(vhat) + cfg.epsilon);
    }
  }
};

}  // namespace

std::vector<double> net_forward(const NetParams& params,
                                std::span<const double> input) {
  const std::size_t hidden = params.w1.rows();
  const std::size_t out = params.w2.rows();
  if (input.size() != params.w1.cols()) {
    raise(Errc::shape, "net_forward: input size mismatch");
  }
  std::vector<double> a1(hidden);
  for (std::size_t h = 0; h < hidden; ++h) {
    const double* wr = params.w1.row(h);
    double z = params.b1[h];
    for (std::size_t j = 0; j < input.size(); ++j) z += wr[j] * input[j];
    a1[h] = z > 0.0 ? z : 0.0;
  }
  std::vector<double> y(out);
  for (std::size_t o = 0; o < out; ++o) {
    const double* wr = params.w2.row(o);
    double z = params.b2[o];
    for (std::size_t h = 0; h < hidden; ++h) z += wr[h] * a1[h];
    y[o] = sigmoid(z);
  }
  return y;
}

std::pair<double, NetGrads> loss_and_grads(const NetParams& params,
                                           const TrainBatch& batch,
                                           double dice_weight) {
  const std::size_t bsz = batch.inputs.rows();
  const std::size_t in = batch.inputs.cols();
  const std::size_t out = batch.targets.cols();
  const std::size_t hidden = params.w1.rows();
  if (bsz == 0) raise(Errc::empty_input, "loss_and_grads: empty batch");
  if (batch.targets.rows() != bsz || params.w1.cols() != in ||
      params.w2.rows() != out || params.w2.cols() != hidden ||
      params.b1.size() != hidden || params.b2.size() != out) {
    raise(Errc::shape, "loss_and_grads: parameter/batch shape mismatch");
  }
  if (!(dice_weight >= 0.0 && dice_weight <= 1.0)) {
    raise(Errc::invalid_argument, "loss_and_grads: dice_weight must be in [0, 1]");
  }

  Matrix z1(bsz, hidden), a1(bsz, hidden), xhat(bsz, out);
  for (std::size_t b = 0; b < bsz; ++b) {
    const double* ir = batch.inputs.row(b);
    double* z1r = z1.row(b);
    double* a1r = a1.row(b);
    for (std::size_t h = 0; h < hidden; ++h) {
      const double* wr = params.w1.row(h);
      double z = params.b1[h];
      for (std::size_t j = 0; j < in; ++j) z += wr[j] * ir[j];
      z1r[h] = z;
      a1r[h] = z > 0.0 ? z : 0.0;
    }
    double* xr = xhat.row(b);
    for (std::size_t o = 0; o < out; ++o) {
      const double* wr = params.w2.row(o);
      double z = params.b2[o];
      for (std::size_t h = 0; h < hidden; ++h) z += wr[h] * a1r[h];
      xr[o] = sigmoid(z);
    }
  }

  const double denom = static_cast<double>(bsz * out);
  double mse = 0.0, snum = 0.0, sden = 0.0;
  for (std::size_t b = 0; b < bsz; ++b) {
    const double* xr = xhat.row(b);
    const double* tr = batch.targets.row(b);
    for (std::size_t o = 0; o < out; ++o) {
      const double d = xr[o] - tr[o];
      mse += d * d;
      snum += xr[o] * tr[o];
      sden += xr[o] * xr[o] + tr[o] * tr[o];
    }
  }
  mse /= denom;
  const double soft_dice = (2.0 * snum + 1.0) / (sden + 1.0);
  const double loss =
      (1.0 - dice_weight) * mse + dice_weight * (1.0 - soft_dice);

  NetGrads g;
  g.w1 = Matrix(hidden, in, 0.0);
  g.b1.assign(hidden, 0.0);
  g.w2 = Matrix(out, hidden, 0.0);
  g.b2.assign(out, 0.0);

  const double dice_den = sden + 1.0;
  std::vector<double> delta2(out), delta1(hidden);
  for (std::size_t b = 0; b < bsz; ++b) {
    const double* xr = xhat.row(b);
    const double* tr = batch.targets.row(b);
    const double* a1r = a1.row(b);
    const double* z1r = z1.row(b);
    const double* ir = batch.inputs.row(b);
    for (std::size_t o = 0; o < out; ++o) {
      const double dmse = 2.0 * (xr[o] - tr[o]) / denom;
      const double ddice = (2.0 * tr[o] * dice_den - (2.0 * snum + 1.0) * 2.0 * xr[o]) /
                           (dice_den * dice_den);
      const double dloss = (1.0 - dice_weight) * dmse - dice_weight * ddice;
      delta2[o] = dloss * xr[o] * (1.0 - xr[o]);
    }
    std::fill(delta1.begin(), delta1.end(), 0.0);
    for (std::size_t o = 0; o < out; ++o) {
      const double d2 = delta2[o];
      g.b2[o] += d2;
      if (d2 == 0.0) continue;
      double* gw2r = g.w2.row(o);
      const double* w2r = params.w2.row(o);
      for (std::size_t h = 0; h < hidden; ++h) {
        gw2r[h] += d2 * a1r[h];
        delta1[h] += d2 * w2r[h];
      }
    }
    for (std::size_t h = 0; h < hidden; ++h) {
      // relu'(0) = 0, so parameters feeding an inactive unit get no update.
      const double d1 = z1r[h] > 0.0 ? delta1[h] : 0.0;
      if (d1 == 0.0) continue;
      g.b1[h] += d1;
      double* gw1r = g.w1.row(h);
      for (std::size_t j = 0; j < in; ++j) gw1r[j] += d1 * ir[j];
    }
  }
  return {loss, std::move(g)};
}

LearnedMapping train_net(const datasets::Dataset& dataset,
                         const NetConfig& cfg) {
  const DatasetShape shape = check_dataset(dataset, "train_net");
  const std::size_t n = dataset.pairs.size();
  if (n < 2) {
    raise(Errc::invalid_spec, "train_net: need at least 2 pairs to hold out validation");
  }
  if (cfg.hidden_width == 0 || cfg.batch_size == 0 || cfg.max_epochs == 0) {
    raise(Errc::invalid_spec, "train_net: hidden_width, batch_size and max_epochs must be positive");
  }
  if (!(cfg.validation_fraction >= 0.0 && cfg.validation_fraction < 1.0)) {
    raise(Errc::invalid_spec, "train_net: validation_fraction must lie in [0, 1)");
  }
  const std::size_t p_in = shape.in_dims.pixels();
  const std::size_t p_out = shape.out_dims.pixels();

  // He-normal hidden layer, Xavier-normal output layer, zero biases.
  NetParams params;
  params.w1 = Matrix(cfg.hidden_width, p_in);
  params.b1.assign(cfg.hidden_width, 0.0);
  params.w2 = Matrix(p_out, cfg.hidden_width);
  params.b2.assign(p_out, 0.0);
  {
    Rng wrng(derive_seed(cfg.init_seed, 0));
    const double sd1 = std::sqrt(2.0 / static_cast<double>(p_in));
    for (double& v : params.w1.values()) v = wrng.normal() * sd1;
    const double sd2 =
        std::sqrt(2.0 / static_cast<double>(cfg.hidden_width + p_out));
    for (double& v : params.w2.values()) v = wrng.normal() * sd2;
  }

  // Seed-partitioned holdout, reshuffled training order every epoch.
  Rng drng(derive_seed(cfg.init_seed, 1));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  for (std::size_t i = n; i-- > 1;) {
    std::swap(order[i], order[drng.below(i + 1)]);
  }
  std::size_t n_val = static_cast<std::size_t>(
      std::lround(cfg.validation_fraction * static_cast<double>(n)));
  n_val = std::clamp<std::size_t>(n_val, 1, n - 1);
  const std::size_t n_train = n - n_val;
  std::vector<std::size_t> train_idx(order.begin(), order.begin() + n_train);
  const std::vector<std::size_t> val_idx(order.begin() + n_train, order.end());

  Adam adam_w1(params.w1.size()), adam_b1(cfg.hidden_width);
  Adam adam_w2(params.w2.size()), adam_b2(p_out);

  NetParams best = params;
  double best_dice = -std::numeric_limits<double>::infinity();
  std::size_t stall = 0;
  std::size_t step = 0;

  for (std::size_t epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    for (std::size_t i = train_idx.size(); i-- > 1;) {
      std::swap(train_idx[i], train_idx[drng.below(i + 1)]);
    }
    for (std::size_t start = 0; start < n_train; start += cfg.batch_size) {
      const std::size_t bsz = std::min(cfg.batch_size, n_train - start);
      TrainBatch batch;
      batch.inputs = Matrix(bsz, p_in);
      batch.targets = Matrix(bsz, p_out);
      for (std::size_t b = 0; b < bsz; ++b) {
        const auto& [t, y] = dataset.pairs[train_idx[start + b]];
        std::copy(y.values.values().begin(), y.values.values().end(),
                  batch.inputs.row(b));
        std::copy(t.values.values().begin(), t.values.values().end(),
                  batch.targets.row(b));
      }
      const auto [loss, grads] = loss_and_grads(params, batch, cfg.dice_weight);
      if (!std::isfinite(loss)) {
        raise(Errc::divergence,
              "train_net: non-finite loss at epoch " + std::to_string(epoch) +
                  ", batch " + std::to_string(start / cfg.batch_size));
      }
      ++step;
      const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(step));
      const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(step));
      adam_w1.step(params.w1.data(), grads.w1.data(), params.w1.size(), cfg, bc1, bc2);
      adam_b1.step(params.b1.data(), grads.b1.data(), params.b1.size(), cfg, bc1, bc2);
      adam_w2.step(params.w2.data(), grads.w2.data(), params.w2.size(), cfg, bc1, bc2);
      adam_b2.step(params.b2.data(), grads.b2.data(), params.b2.size(), cfg, bc1, bc2);
    }

    double val_dice = 0.0;
    for (const std::size_t idx : val_idx) {
      const auto& [t, y] = dataset.pairs[idx];
      const std::vector<double> pred = net_forward(params, y.values.values());
      val_dice += metrics::dice_coeff(Image(shape.out_dims, pred), t.values);
    }
    val_dice /= static_cast<double>(val_idx.size());
    if (val_dice > best_dice) {
      best_dice = val_dice;
      best = params;
      stall = 0;
    } else if (++stall >= cfg.early_stop_patience) {
      break;
    }
  }

  LearnedMapping m;
  m.in_dims = shape.in_dims;
  m.out_dims = shape.out_dims;
  m.params = std::move(best);
  m.training_fingerprint = training_fingerprint(dataset, MappingKind::small_net);
  return m;
}

Reconstruction predict(const LearnedMapping& mapping, const Image& speckle) {
  if (!(speckle.dims() == mapping.in_dims)) {
    raise(Errc::shape, "predict: speckle dims do not match the mapping input plane");
  }
  Reconstruction rec;
  rec.raw_values = Image(mapping.out_dims);
  if (const auto* rp = std::get_if<RidgeParams>(&mapping.params)) {
    const std::size_t p_in = mapping.in_dims.pixels();
    const std::size_t p_out = mapping.out_dims.pixels();
    std::vector<double> centred(p_in);
    for (std::size_t j = 0; j < p_in; ++j) {
      centred[j] = speckle.values()[j] - rp->speckle_mean[j];
    }
    for (std::size_t i = 0; i < p_out; ++i) {
      const double* wr = rp->weights.row(i);
      double s = rp->target_mean[i];
      for (std::size_t j = 0; j < p_in; ++j) s += wr[j] * centred[j];
      rec.raw_values.values()[i] = s;
    }
  } else {
    const auto& np = std::get<NetParams>(mapping.params);
    rec.raw_values.values() = net_forward(np, speckle.values());
  }
  rec.values = clamp01(rec.raw_values);
  return rec;
}

Reconstruction predict(const LearnedMapping& mapping,
                       const media::SpecklePattern& speckle) {
  return predict(mapping, speckle.values);
}

}  // namespace spk::learners
