#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "udr/matrix.hpp"
#include "udr/rng.hpp"

namespace udr {

enum class Domain { Source, Target };

std::string_view to_string(Domain domain);

/// Gamma covariate shift in d dimensions with independent coordinates:
/// source coordinate j ~ Ga(j, 2) and target coordinate j ~ Ga(j + 1, 2),
/// j = 1..d, rate parameterisation (mean shape / rate).
struct GammaShiftSpec {
  std::size_t d = 1;

  void validate() const;
  double shape(Domain domain, std::size_t column) const;
  static constexpr double kRate = 2.0;
};

/// Bivariate regression on the d = 5 Gamma covariates:
///   Y = f0(X) + nu * (W, -W),  W ~ N(0, 1).
/// nu = 0 is accepted to produce noiseless responses.
struct RegressionSpec {
  double nu = 0.1;
  static constexpr std::size_t kDim = 5;

  void validate() const;
};

struct DomainSample {
  Matrix source_X;
  Matrix target_X;
  std::optional<Matrix> source_Y;
};

struct LabeledData {
  Matrix X;
  Matrix Y;
};

/// Exact q(x) / p(x) = 2^d / d! * prod_j x_j for the Gamma scenario.
/// Every coordinate must be positive.
double true_ratio(const GammaShiftSpec& spec, std::span<const double> x);

/// true_ratio applied to each row.
std::vector<double> true_ratio_rows(const GammaShiftSpec& spec, const Matrix& X);

/// n x d covariates from one domain; rows drawn in order, columns within a row
/// in order.
Matrix gen_gamma_covariates(const GammaShiftSpec& spec, std::size_t n, Domain domain,
                            RngStream& rng);

/// Independent source and target covariate samples (source drawn first).
DomainSample gen_gamma_shift(const GammaShiftSpec& spec, std::size_t n_source,
                             std::size_t n_target, RngStream& rng);

/// f01 = sin(pi (x1 - x2)) log(1 + x3^2);  f02 = exp(-x2) 1(x4 > 2).
std::array<double, 2> f0(std::span<const double> x);

/// f0 applied to each row; n x 2.
Matrix f0_rows(const Matrix& X);

/// Covariates for `domain` followed by one W per row.
LabeledData gen_regression(const RegressionSpec& spec, std::size_t n, Domain domain,
                           RngStream& rng);

/// CSV dump with header `domain,x1..xd[,y1..yk]`.
void write_dataset_csv(const std::string& path, Domain domain, const Matrix& X,
                       const Matrix* Y = nullptr);

}  // namespace udr
