#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

#include "udr/adam.hpp"
#include "udr/bregman.hpp"
#include "udr/nn.hpp"
#include "udr/scenarios.hpp"

namespace udr {

/// Density-ratio estimator settings. Defaults follow the Gamma-shift study:
/// 64-wide hidden layers, kappa = 0.5, batch 100 per domain, Adam at 1e-4.
struct DreConfig {
  BregmanKind kind = BregmanKind::LeastSquares;
  /// Sample size driving the depth and bound schedules; 0 means
  /// min(n_source, n_target) of the training sample.
  std::size_t n = 0;
  double kappa = 0.5;
  std::size_t width = 64;
  std::size_t iterations = 1000;
  std::size_t batch_size = 100;
  double learning_rate = 1e-4;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Default iteration budget for dimension d (1000 / 2000 / 5000 for d = 1 / 2 / 5).
std::size_t default_dre_iterations(std::size_t d);

/// Hidden layers used for sample size n: max(1, floor(ln(n) / 2)).
std::size_t schedule_depth(std::size_t n);

/// Upper output bound (ln n)^(1 + kappa).
double schedule_upper_bound(std::size_t n, double kappa);

/// Lower output bound for the logistic loss, (ln n)^(-1 - kappa).
double schedule_lower_bound(std::size_t n, double kappa);

/// Ratio network for d covariates. The least-squares net is clamped to
/// [0, upper]; the logistic net to [lower, upper]. Rejects n < 3.
MlpSpec build_ratio_net(const DreConfig& cfg, std::size_t d);

/// Minimises the chosen empirical objective with Adam. Each step draws one
/// source batch and one target batch of `batch_size` rows. Throws
/// NumericalError with the step index if the objective becomes non-finite.
MlpModel fit_ratio(const DomainSample& sample, const DreConfig& cfg);

/// Full-sample value of the empirical objective for `model`.
double training_objective(const MlpModel& model, const DomainSample& sample, BregmanKind kind);

struct RatioErrors {
  double source_mse = 0.0;
  double target_mse = 0.0;
};

using RatioPredictor = std::function<std::vector<double>(const Matrix&)>;

/// MSE against the exact ratio on n_test fresh draws per domain
/// (source draws first).
RatioErrors eval_ratio(const RatioPredictor& predict, const GammaShiftSpec& spec,
                       std::size_t n_test, RngStream& rng);
RatioErrors eval_ratio(const MlpModel& model, const GammaShiftSpec& spec, std::size_t n_test,
                       RngStream& rng);

}  // namespace udr
