#include "udr/dre.hpp"

#include <cmath>
#include <stdexcept>

namespace udr {

void DreConfig::validate() const {
  if (!(kappa > 0.0 && kappa <= 1.0)) throw std::invalid_argument("DreConfig: kappa must be in (0, 1]");
  if (iterations == 0) throw std::invalid_argument("DreConfig: iterations must be >= 1");
  if (width == 0 || batch_size == 0) {
    throw std::invalid_argument("DreConfig: width and batch_size must be >= 1");
  }
  if (!(learning_rate > 0.0)) throw std::invalid_argument("DreConfig: learning_rate must be > 0");
}

std::size_t default_dre_iterations(std::size_t d) {
  if (d <= 1) return 1000;
  if (d == 2) return 2000;
  return 5000;
}

std::size_t schedule_depth(std::size_t n) {
  if (n < 2) throw std::invalid_argument("schedule_depth: n must be >= 2");
  const auto layers = static_cast<std::size_t>(std::floor(std::log(static_cast<double>(n)) / 2.0));
  return layers < 1 ? 1 : layers;
}

double schedule_upper_bound(std::size_t n, double kappa) {
  return std::pow(std::log(static_cast<double>(n)), 1.0 + kappa);
}

double schedule_lower_bound(std::size_t n, double kappa) {
  return std::pow(std::log(static_cast<double>(n)), -1.0 - kappa);
}

MlpSpec build_ratio_net(const DreConfig& cfg, std::size_t d) {
  cfg.validate();
  if (cfg.n < 3) {
    throw std::invalid_argument("build_ratio_net: n must be >= 3 for the log schedules, got " +
                                std::to_string(cfg.n));
  }
  if (d == 0) throw std::invalid_argument("build_ratio_net: d must be >= 1");
  MlpSpec spec;
  spec.input_dim = d;
  spec.hidden_widths.assign(schedule_depth(cfg.n), cfg.width);
  spec.output_dim = 1;
  spec.out_hi = schedule_upper_bound(cfg.n, cfg.kappa);
  spec.out_lo = cfg.kind == BregmanKind::LeastSquares ? 0.0 : schedule_lower_bound(cfg.n, cfg.kappa);
  return spec;
}

namespace {

constexpr std::size_t kMaxInitDraws = 100;

// Number of rows of X whose output lands strictly inside the bounds.
std::size_t unclamped_rows(const MlpModel& model, const Matrix& X) {
  const Matrix out = model.predict(X);
  std::size_t live = 0;
  for (double v : out.data()) {
    const bool at_lo = model.spec.out_lo && v <= *model.spec.out_lo;
    const bool at_hi = model.spec.out_hi && v >= *model.spec.out_hi;
    if (!at_lo && !at_hi) ++live;
  }
  return live;
}

}  // namespace

MlpModel fit_ratio(const DomainSample& sample, const DreConfig& cfg_in) {
  const Matrix& xs = sample.source_X;
  const Matrix& xt = sample.target_X;
  if (xs.rows() == 0 || xt.rows() == 0) {
    throw std::invalid_argument("fit_ratio: both domains need at least one row");
  }
  if (xs.cols() != xt.cols()) {
    throw std::invalid_argument("fit_ratio: source and target dimensions differ");
  }
  DreConfig cfg = cfg_in;
  if (cfg.n == 0) cfg.n = std::min(xs.rows(), xt.rows());

  const RngStream base(cfg.seed);
  RngStream init_rng = base.child(1);
  MlpModel model{build_ratio_net(cfg, xs.cols()), {}};
  model.params = init_params(model.spec, init_rng);
  // Clamped rows pass no gradient, and only target rows pull the output up.
  // A draw that is unclamped on a handful of rows loses them to the source
  // term within a few steps and then never moves again. Redraw from the same
  // stream until each domain has about one unclamped row per mini-batch.
  auto enough = [&](const Matrix& X) {
    const std::size_t need = std::max<std::size_t>(1, (X.rows() + cfg.batch_size - 1) / cfg.batch_size);
    return unclamped_rows(model, X) >= need;
  };
  for (std::size_t attempt = 1; !(enough(xs) && enough(xt)); ++attempt) {
    if (attempt >= kMaxInitDraws) {
      throw NumericalError("fit_ratio: no initial draw is unclamped on enough rows of both domains", 0);
    }
    model.params = init_params(model.spec, init_rng);
  }

  const AdamConfig adam{cfg.learning_rate};
  AdamState state = AdamState::for_params(model.params);
  BatchSampler source_batches(xs.rows(), cfg.batch_size, base.child(2));
  BatchSampler target_batches(xt.rows(), cfg.batch_size, base.child(3));

  for (std::size_t step = 0; step < cfg.iterations; ++step) {
    const auto& is = source_batches.next();
    const std::size_t ns = is.size();
    const Matrix batch = vstack(take_rows(xs, is), take_rows(xt, target_batches.next()));
    const OutputLoss loss = [&](const Matrix& out, Matrix& grad) {
      const auto f = out.data();
      const auto g = ratio_objective_grad(cfg.kind, f.first(ns), f.subspan(ns));
      auto gd = grad.data();
      std::copy(g.d_source.begin(), g.d_source.end(), gd.begin());
      std::copy(g.d_target.begin(), g.d_target.end(), gd.begin() + static_cast<std::ptrdiff_t>(ns));
      return g.value;
    };
    LossAndGrad lg;
    try {
      lg = loss_and_grad(model.spec, model.params, batch, loss);
    } catch (const NumericalError&) {
      throw NumericalError("fit_ratio: objective became non-finite", step);
    }
    adam_step(model.params, lg.grads, state, adam);
    if (!model.params.all_finite()) {
      throw NumericalError("fit_ratio: parameters became non-finite", step);
    }
  }
  return model;
}

double training_objective(const MlpModel& model, const DomainSample& sample, BregmanKind kind) {
  const auto fs = model.predict_scalar(sample.source_X);
  const auto ft = model.predict_scalar(sample.target_X);
  return kind == BregmanKind::LeastSquares ? ls_objective(fs, ft) : lr_objective(fs, ft);
}

RatioErrors eval_ratio(const RatioPredictor& predict, const GammaShiftSpec& spec,
                       std::size_t n_test, RngStream& rng) {
  if (n_test == 0) throw std::invalid_argument("eval_ratio: n_test must be >= 1");
  auto mse = [&](const Matrix& X) {
    const auto pred = predict(X);
    if (pred.size() != X.rows()) throw std::invalid_argument("eval_ratio: predictor size mismatch");
    const auto truth = true_ratio_rows(spec, X);
    double s = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) s += (pred[i] - truth[i]) * (pred[i] - truth[i]);
    return s / static_cast<double>(pred.size());
  };
  const Matrix xs = gen_gamma_covariates(spec, n_test, Domain::Source, rng);
  const Matrix xt = gen_gamma_covariates(spec, n_test, Domain::Target, rng);
  return {mse(xs), mse(xt)};
}

RatioErrors eval_ratio(const MlpModel& model, const GammaShiftSpec& spec, std::size_t n_test,
                       RngStream& rng) {
  return eval_ratio([&model](const Matrix& X) { return model.predict_scalar(X); }, spec, n_test,
                    rng);
}

}  // namespace udr
