#include "udr/shift.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "udr/adam.hpp"
#include "udr/bregman.hpp"
#include "udr/dre.hpp"

namespace udr {

void ShiftConfig::validate() const {
  if (!(nu >= 0.0)) throw std::invalid_argument("ShiftConfig: nu must be >= 0");
  if (n11 == 0 || n12 == 0) throw std::invalid_argument("ShiftConfig: n11 and n12 must be >= 1");
  if (iteration_grid.empty()) throw std::invalid_argument("ShiftConfig: iteration grid is empty");
  for (std::size_t it : iteration_grid)
    if (it == 0) throw std::invalid_argument("ShiftConfig: grid entries must be >= 1");
  if (!(learning_rate > 0.0)) throw std::invalid_argument("ShiftConfig: learning_rate must be > 0");
  if (!(adam_epsilon >= 0.0)) throw std::invalid_argument("ShiftConfig: adam_epsilon must be >= 0");
  if (!(kappa > 0.0 && kappa <= 1.0)) throw std::invalid_argument("ShiftConfig: kappa must be in (0, 1]");
  if (width == 0 || batch_size == 0 || n_test == 0) {
    throw std::invalid_argument("ShiftConfig: width, batch_size and n_test must be >= 1");
  }
  if (!(validation_fraction > 0.0 && validation_fraction < 1.0)) {
    throw std::invalid_argument("ShiftConfig: validation_fraction must be in (0, 1)");
  }
}

MlpSpec build_regression_net(const ShiftConfig& cfg, std::size_t input_dim,
                             std::size_t output_dim) {
  const std::size_t n = std::max<std::size_t>(cfg.n11, 2);
  const double bound = schedule_upper_bound(n, cfg.kappa);
  MlpSpec spec;
  spec.input_dim = input_dim;
  spec.hidden_widths.assign(schedule_depth(n), cfg.width);
  spec.output_dim = output_dim;
  spec.out_lo = -bound;
  spec.out_hi = bound;
  return spec;
}

namespace {

std::vector<double> resolve_weights(std::span<const double> weights, std::size_t n) {
  if (weights.empty()) return std::vector<double>(n, 1.0);
  if (weights.size() != n) {
    throw std::invalid_argument("shift: " + std::to_string(weights.size()) + " weights for " +
                                std::to_string(n) + " rows");
  }
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) {
      throw std::invalid_argument("shift: weights must be finite and non-negative");
    }
  }
  return {weights.begin(), weights.end()};
}

void check_train(const LabeledData& train) {
  if (train.X.rows() == 0 || train.X.rows() != train.Y.rows()) {
    throw std::invalid_argument("shift: training X " + train.X.shape_string() + " and Y " +
                                train.Y.shape_string() + " are inconsistent");
  }
}

}  // namespace

MlpModel fit_regression_checkpoints(
    const LabeledData& train, std::span<const double> weights_in,
    std::span<const std::size_t> checkpoints, const ShiftConfig& cfg,
    const std::function<void(std::size_t, const MlpModel&)>& on_checkpoint) {
  check_train(train);
  if (checkpoints.empty()) throw std::invalid_argument("fit_regression: no iteration count given");
  if (!std::is_sorted(checkpoints.begin(), checkpoints.end())) {
    throw std::invalid_argument("fit_regression: checkpoints must be ascending");
  }
  const auto weights = resolve_weights(weights_in, train.X.rows());

  const RngStream base(cfg.seed);
  RngStream init_rng = base.child(1);
  MlpModel model{build_regression_net(cfg, train.X.cols(), train.Y.cols()), {}};
  model.params = init_params(model.spec, init_rng);
  AdamState state = AdamState::for_params(model.params);
  const AdamConfig adam{cfg.learning_rate, 0.9, 0.999, cfg.adam_epsilon};
  BatchSampler batches(train.X.rows(), cfg.batch_size, base.child(2));

  std::size_t next_cp = 0;
  const std::size_t total = checkpoints.back();
  std::vector<double> wb;
  for (std::size_t step = 1; step <= total; ++step) {
    const auto& idx = batches.next();
    const Matrix xb = take_rows(train.X, idx);
    const Matrix yb = take_rows(train.Y, idx);
    wb.resize(idx.size());
    for (std::size_t i = 0; i < idx.size(); ++i) wb[i] = weights[idx[i]];
    const OutputLoss loss = [&](const Matrix& out, Matrix& grad) {
      return weighted_sq_loss_grad(out, yb, wb, grad);
    };
    LossAndGrad lg;
    try {
      lg = loss_and_grad(model.spec, model.params, xb, loss);
    } catch (const NumericalError&) {
      throw NumericalError("fit_regression: loss became non-finite", step);
    }
    adam_step(model.params, lg.grads, state, adam);
    if (!model.params.all_finite()) {
      throw NumericalError("fit_regression: parameters became non-finite", step);
    }
    while (next_cp < checkpoints.size() && checkpoints[next_cp] == step) {
      if (on_checkpoint) on_checkpoint(step, model);
      ++next_cp;
    }
  }
  return model;
}

MlpModel fit_regression(const LabeledData& train, std::span<const double> weights,
                        std::size_t iterations, const ShiftConfig& cfg) {
  const std::size_t cp[] = {iterations};
  if (iterations == 0) throw std::invalid_argument("fit_regression: iterations must be >= 1");
  return fit_regression_checkpoints(train, weights, cp, cfg, {});
}

std::size_t select_by_validation(std::span<const std::size_t> grid,
                                 std::span<const double> validation_error) {
  if (grid.empty()) throw std::invalid_argument("select_by_validation: empty grid");
  if (grid.size() != validation_error.size()) {
    throw std::invalid_argument("select_by_validation: one error per grid value required");
  }
  std::size_t best = 0;
  for (std::size_t i = 1; i < grid.size(); ++i)
    if (validation_error[i] < validation_error[best]) best = i;
  return grid[best];
}

std::size_t cross_validate_iters(const LabeledData& train, std::span<const double> weights_in,
                                 const ShiftConfig& cfg) {
  check_train(train);
  if (cfg.iteration_grid.empty()) throw std::invalid_argument("cross_validate_iters: empty grid");
  if (cfg.iteration_grid.size() == 1) return cfg.iteration_grid.front();
  const std::size_t n = train.X.rows();
  if (n < 10) throw std::invalid_argument("cross_validate_iters: need at least 10 rows");
  const auto weights = resolve_weights(weights_in, n);

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  RngStream split_rng = RngStream(cfg.seed).child(10);
  shuffle(split_rng, order);
  const auto n_val = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::floor(cfg.validation_fraction * static_cast<double>(n))));
  const std::span<const std::size_t> fit_idx(order.data(), n - n_val);
  const std::span<const std::size_t> val_idx(order.data() + (n - n_val), n_val);

  const LabeledData fit_part{take_rows(train.X, fit_idx), take_rows(train.Y, fit_idx)};
  const Matrix val_X = take_rows(train.X, val_idx);
  const Matrix val_Y = take_rows(train.Y, val_idx);
  std::vector<double> fit_w, val_w;
  for (std::size_t i : fit_idx) fit_w.push_back(weights[i]);
  for (std::size_t i : val_idx) val_w.push_back(weights[i]);

  std::vector<std::size_t> sorted = cfg.iteration_grid;
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  std::vector<double> errors;
  errors.reserve(sorted.size());
  fit_regression_checkpoints(fit_part, fit_w, sorted, cfg,
                             [&](std::size_t, const MlpModel& m) {
                               errors.push_back(weighted_sq_loss(m.predict(val_X), val_Y, val_w));
                             });
  return select_by_validation(sorted, errors);
}

MlpModel fit_corrected(const LabeledData& train, std::span<const double> weights,
                       const ShiftConfig& cfg) {
  check_train(train);
  const auto w = resolve_weights(weights, train.X.rows());
  if (std::all_of(w.begin(), w.end(), [](double v) { return v == 0.0; })) {
    throw std::invalid_argument("fit_corrected: all weights are zero");
  }
  const std::size_t iterations = cross_validate_iters(train, w, cfg);
  return fit_regression(train, w, iterations, cfg);
}

MlpModel fit_source(const LabeledData& train, const ShiftConfig& cfg) {
  return fit_corrected(train, {}, cfg);
}

double regression_mse(const RegressionPredictor& predict, const Matrix& X_test) {
  const Matrix truth = f0_rows(X_test);
  const Matrix pred = predict(X_test);
  const std::vector<double> ones(X_test.rows(), 1.0);
  return weighted_sq_loss(pred, truth, ones);
}

RiskReport eval_risks(const RegressionPredictor& source_model,
                      const RegressionPredictor& edrc_model,
                      const RegressionPredictor& odrc_model, const Matrix& source_test_X,
                      const Matrix& target_test_X) {
  return {regression_mse(source_model, source_test_X),
          regression_mse(source_model, target_test_X), regression_mse(edrc_model, target_test_X),
          regression_mse(odrc_model, target_test_X)};
}

RiskReport run_shift_replication(const ShiftConfig& cfg) {
  cfg.validate();
  const RngStream base(cfg.seed);
  RngStream data_rng = base.child(100);
  const RegressionSpec reg{cfg.nu};
  const GammaShiftSpec covariates{RegressionSpec::kDim};
  const LabeledData train = gen_regression(reg, cfg.n11, Domain::Source, data_rng);
  const Matrix target_unlabeled = gen_gamma_covariates(covariates, cfg.n12, Domain::Target, data_rng);
  const Matrix test_source = gen_gamma_covariates(covariates, cfg.n_test, Domain::Source, data_rng);
  const Matrix test_target = gen_gamma_covariates(covariates, cfg.n_test, Domain::Target, data_rng);

  const MlpModel source_model = fit_source(train, cfg);

  DreConfig dre;
  dre.kind = BregmanKind::LeastSquares;
  dre.kappa = cfg.kappa;
  dre.width = cfg.width;
  dre.iterations = cfg.ratio_iterations;
  dre.learning_rate = cfg.ratio_learning_rate;
  dre.seed = base.child(200).seed();
  const MlpModel ratio = fit_ratio({train.X, target_unlabeled, std::nullopt}, dre);
  const std::vector<double> edrc_weights = ratio.predict_scalar(train.X);
  const MlpModel edrc_model = fit_corrected(train, edrc_weights, cfg);

  const std::vector<double> odrc_weights = true_ratio_rows(covariates, train.X);
  const MlpModel odrc_model = fit_corrected(train, odrc_weights, cfg);

  auto as_predictor = [](const MlpModel& m) {
    return RegressionPredictor([&m](const Matrix& X) { return m.predict(X); });
  };
  return eval_risks(as_predictor(source_model), as_predictor(edrc_model),
                    as_predictor(odrc_model), test_source, test_target);
}

}  // namespace udr
