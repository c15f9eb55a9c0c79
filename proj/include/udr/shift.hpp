#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "udr/nn.hpp"
#include "udr/scenarios.hpp"

namespace udr {

/// Covariate-shift regression settings (d = 5 Gamma covariates, bivariate
/// response). The ratio model for EDRC uses the least-squares objective with
/// the density-ratio defaults for d = 5.
struct ShiftConfig {
  double nu = 0.1;
  std::size_t n11 = 500;  // labelled source rows
  std::size_t n12 = 500;  // unlabelled target rows
  std::vector<std::size_t> iteration_grid{1000, 2000, 3000, 4000, 5000};
  double learning_rate = 1e-3;
  double adam_epsilon = 1e-8;
  std::size_t width = 64;
  double kappa = 0.5;
  std::size_t batch_size = 100;
  std::size_t n_test = 1000;
  std::size_t ratio_iterations = 5000;
  double ratio_learning_rate = 1e-4;
  double validation_fraction = 0.2;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Regression network for `input_dim` covariates and `output_dim` responses:
/// depth from the ln(n11) schedule, output clamped to +-(ln n11)^(1 + kappa).
MlpSpec build_regression_net(const ShiftConfig& cfg, std::size_t input_dim,
                             std::size_t output_dim);

/// Adam on the importance-weighted squared loss for exactly `iterations`
/// steps. Initialisation and batching depend only on cfg.seed, so runs with
/// the same seed share their random numbers.
MlpModel fit_regression(const LabeledData& train, std::span<const double> weights,
                        std::size_t iterations, const ShiftConfig& cfg);

/// Same training run, calling `on_checkpoint(step, model)` after each step
/// listed in `checkpoints` (ascending). Returns the model after the last
/// checkpoint.
MlpModel fit_regression_checkpoints(
    const LabeledData& train, std::span<const double> weights,
    std::span<const std::size_t> checkpoints, const ShiftConfig& cfg,
    const std::function<void(std::size_t, const MlpModel&)>& on_checkpoint);

/// Grid value with the smallest validation error; ties go to the earlier entry.
std::size_t select_by_validation(std::span<const std::size_t> grid,
                                 std::span<const double> validation_error);

/// Single 80/20 split of the source rows. A model is trained on the 80% part
/// for each grid value and scored by the (weighted) squared error on the
/// held-out 20%. Because runs share the seed, the model for k iterations is
/// the k-step prefix of one run, so one run with checkpoints gives every
/// grid value. Empty `weights` means unit weights.
std::size_t cross_validate_iters(const LabeledData& train, std::span<const double> weights,
                                 const ShiftConfig& cfg);

/// Source-only least-squares estimator with cross-validated iterations.
MlpModel fit_source(const LabeledData& train, const ShiftConfig& cfg);

/// Loss-corrected estimator: squared loss weighted by `weights` (one per
/// source row), iterations chosen by weighted cross-validation.
MlpModel fit_corrected(const LabeledData& train, std::span<const double> weights,
                       const ShiftConfig& cfg);

struct RiskReport {
  double sers = 0.0;  // source estimator, source test set
  double sert = 0.0;  // source estimator, target test set
  double edrc = 0.0;  // estimated-ratio corrected, target test set
  double odrc = 0.0;  // oracle-ratio corrected, target test set
};

using RegressionPredictor = std::function<Matrix(const Matrix&)>;

/// Mean over test rows of ||f0(x) - prediction(x)||^2.
double regression_mse(const RegressionPredictor& predict, const Matrix& X_test);

RiskReport eval_risks(const RegressionPredictor& source_model,
                      const RegressionPredictor& edrc_model,
                      const RegressionPredictor& odrc_model, const Matrix& source_test_X,
                      const Matrix& target_test_X);

/// One full replication: draws data, fits the source, EDRC and ODRC
/// estimators and evaluates all four risks on fresh noiseless test sets.
RiskReport run_shift_replication(const ShiftConfig& cfg);

}  // namespace udr
