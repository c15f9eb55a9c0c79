#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "udr/matrix.hpp"

namespace udr {

/// Generator of a Bregman divergence used for density-ratio fitting.
///   LeastSquares:       phi(x) = (x - 1)^2
///   LogisticRegression: phi(x) = x log x - (x + 1) log(x + 1), phi(0) = 0
enum class BregmanKind { LeastSquares, LogisticRegression };

std::string_view to_string(BregmanKind kind);
/// Accepts "ls"/"least_squares" and "lr"/"logistic". Throws otherwise.
BregmanKind parse_bregman_kind(std::string_view name);

double phi(BregmanKind kind, double x);
double phi_prime(BregmanKind kind, double y);

/// D(x || y) = phi(x) - phi(y) - phi'(y) (x - y).
///
/// The logistic form is evaluated as
///   (x - y)^2 / (y (y + 1)) + x h((x - y) / y) - (x + 1) h((x - y) / (y + 1)),
/// h(t) = log(1 + t) - t, which keeps full relative accuracy as x -> y.
double bregman_div(BregmanKind kind, double x, double y);

/// Empirical least-squares ratio objective:
///   mean_i f(xs_i)^2 - 2 mean_j f(xt_j)
double ls_objective(std::span<const double> f_source, std::span<const double> f_target);

/// Empirical logistic ratio objective:
///   mean_i log(f(xs_i) + 1) + mean_j [log(f(xt_j) + 1) - log f(xt_j)]
/// Every f must be strictly positive.
double lr_objective(std::span<const double> f_source, std::span<const double> f_target);

/// Objective value and its gradient with respect to each network output.
struct ObjectiveGrad {
  double value = 0.0;
  std::vector<double> d_source;
  std::vector<double> d_target;
};

ObjectiveGrad ratio_objective_grad(BregmanKind kind, std::span<const double> f_source,
                                   std::span<const double> f_target);

/// (1/n) sum_i w_i ||y_i - yhat_i||^2. Weights must be non-negative.
double weighted_sq_loss(const Matrix& preds, const Matrix& targets,
                        std::span<const double> weights);

/// Same loss; also writes dLoss/dPreds into `grad`.
double weighted_sq_loss_grad(const Matrix& preds, const Matrix& targets,
                             std::span<const double> weights, Matrix& grad);

}  // namespace udr
