#include "udr/bregman.hpp"

#include <cmath>
#include <stdexcept>

namespace udr {

std::string_view to_string(BregmanKind kind) {
  return kind == BregmanKind::LeastSquares ? "ls" : "lr";
}

BregmanKind parse_bregman_kind(std::string_view name) {
  if (name == "ls" || name == "least_squares" || name == "LS") return BregmanKind::LeastSquares;
  if (name == "lr" || name == "logistic" || name == "LR") return BregmanKind::LogisticRegression;
  throw std::invalid_argument("unknown Bregman kind '" + std::string(name) + "' (use ls or lr)");
}

namespace {

void require_lr_domain(double x, const char* who) {
  if (!(x >= 0.0)) {
    throw std::invalid_argument(std::string(who) +
                                ": logistic generator is defined on x >= 0, got " +
                                std::to_string(x));
  }
}

// log(1 + t) - t, accurate for small |t|.
double log1p_minus(double t) {
  if (std::abs(t) < 1e-2) {
    // -t^2/2 + t^3/3 - ...; ten terms reach double precision for |t| < 1e-2.
    double term = t;
    double sum = 0.0;
    for (int k = 2; k <= 11; ++k) {
      term *= -t;
      sum += term / k;
    }
    return sum;
  }
  return std::log1p(t) - t;
}

}  // namespace

double phi(BregmanKind kind, double x) {
  if (kind == BregmanKind::LeastSquares) return (x - 1.0) * (x - 1.0);
  require_lr_domain(x, "phi");
  if (x == 0.0) return 0.0;
  return x * std::log(x) - (x + 1.0) * std::log1p(x);
}

double phi_prime(BregmanKind kind, double y) {
  if (kind == BregmanKind::LeastSquares) return 2.0 * (y - 1.0);
  if (!(y > 0.0)) {
    throw std::invalid_argument("phi_prime: logistic generator needs y > 0, got " +
                                std::to_string(y));
  }
  return -std::log1p(1.0 / y);
}

double bregman_div(BregmanKind kind, double x, double y) {
  if (kind == BregmanKind::LeastSquares) return (x - y) * (x - y);
  require_lr_domain(x, "bregman_div");
  if (!(y > 0.0)) {
    throw std::invalid_argument("bregman_div: logistic divergence needs y > 0 (interior), got " +
                                std::to_string(y));
  }
  if (x == y) return 0.0;
  if (x == 0.0) return std::log1p(y);  // 0 log 0 = 0
  const double diff = x - y;
  const double value = diff * diff / (y * (y + 1.0)) + x * log1p_minus(diff / y) -
                       (x + 1.0) * log1p_minus(diff / (y + 1.0));
  return value > 0.0 ? value : 0.0;
}

double ls_objective(std::span<const double> f_source, std::span<const double> f_target) {
  if (f_source.empty() || f_target.empty()) {
    throw std::invalid_argument("ls_objective: both domains need at least one value");
  }
  double sq = 0.0;
  for (double f : f_source) sq += f * f;
  double lin = 0.0;
  for (double f : f_target) lin += f;
  return sq / static_cast<double>(f_source.size()) -
         2.0 * lin / static_cast<double>(f_target.size());
}

double lr_objective(std::span<const double> f_source, std::span<const double> f_target) {
  return ratio_objective_grad(BregmanKind::LogisticRegression, f_source, f_target).value;
}

ObjectiveGrad ratio_objective_grad(BregmanKind kind, std::span<const double> f_source,
                                   std::span<const double> f_target) {
  if (f_source.empty() || f_target.empty()) {
    throw std::invalid_argument("ratio objective: both domains need at least one value");
  }
  const double ns = static_cast<double>(f_source.size());
  const double nt = static_cast<double>(f_target.size());
  ObjectiveGrad out;
  out.d_source.resize(f_source.size());
  out.d_target.resize(f_target.size());
  double s_term = 0.0;
  double t_term = 0.0;
  if (kind == BregmanKind::LeastSquares) {
    for (std::size_t i = 0; i < f_source.size(); ++i) {
      s_term += f_source[i] * f_source[i];
      out.d_source[i] = 2.0 * f_source[i] / ns;
    }
    for (std::size_t j = 0; j < f_target.size(); ++j) {
      t_term += f_target[j];
      out.d_target[j] = -2.0 / nt;
    }
    out.value = s_term / ns - 2.0 * t_term / nt;
    return out;
  }
  auto check = [](double f) {
    if (!(f > 0.0)) {
      throw std::invalid_argument(
          "lr_objective: network output " + std::to_string(f) +
          " is not positive; the ratio model needs a positive lower bound");
    }
  };
  for (std::size_t i = 0; i < f_source.size(); ++i) {
    const double f = f_source[i];
    check(f);
    s_term += std::log1p(f);
    out.d_source[i] = 1.0 / ((f + 1.0) * ns);
  }
  for (std::size_t j = 0; j < f_target.size(); ++j) {
    const double f = f_target[j];
    check(f);
    t_term += std::log1p(1.0 / f);  // log(f + 1) - log f
    out.d_target[j] = -1.0 / (f * (f + 1.0) * nt);
  }
  out.value = s_term / ns + t_term / nt;
  return out;
}

namespace {

void check_weighted_inputs(const Matrix& preds, const Matrix& targets,
                           std::span<const double> weights) {
  if (preds.rows() != targets.rows() || preds.cols() != targets.cols()) {
    throw std::invalid_argument("weighted_sq_loss: predictions " + preds.shape_string() +
                                " and targets " + targets.shape_string() + " differ");
  }
  if (weights.size() != preds.rows()) {
    throw std::invalid_argument("weighted_sq_loss: " + std::to_string(weights.size()) +
                                " weights for " + std::to_string(preds.rows()) + " rows");
  }
  if (preds.rows() == 0) throw std::invalid_argument("weighted_sq_loss: empty input");
  for (double w : weights) {
    if (!(w >= 0.0)) {
      throw std::invalid_argument("weighted_sq_loss: negative weight " + std::to_string(w));
    }
  }
}

}  // namespace

double weighted_sq_loss(const Matrix& preds, const Matrix& targets,
                        std::span<const double> weights) {
  check_weighted_inputs(preds, targets, weights);
  double total = 0.0;
  for (std::size_t i = 0; i < preds.rows(); ++i) {
    double sq = 0.0;
    for (std::size_t c = 0; c < preds.cols(); ++c) {
      const double r = targets(i, c) - preds(i, c);
      sq += r * r;
    }
    total += weights[i] * sq;
  }
  return total / static_cast<double>(preds.rows());
}

double weighted_sq_loss_grad(const Matrix& preds, const Matrix& targets,
                             std::span<const double> weights, Matrix& grad) {
  const double loss = weighted_sq_loss(preds, targets, weights);
  grad = Matrix(preds.rows(), preds.cols());
  const double scale = 2.0 / static_cast<double>(preds.rows());
  for (std::size_t i = 0; i < preds.rows(); ++i)
    for (std::size_t c = 0; c < preds.cols(); ++c)
      grad(i, c) = scale * weights[i] * (preds(i, c) - targets(i, c));
  return loss;
}

}  // namespace udr
