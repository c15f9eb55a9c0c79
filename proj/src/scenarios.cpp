#include "udr/scenarios.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <stdexcept>

namespace udr {

std::string_view to_string(Domain domain) {
  return domain == Domain::Source ? "source" : "target";
}

void GammaShiftSpec::validate() const {
  if (d == 0) throw std::invalid_argument("GammaShiftSpec: d must be >= 1");
}

double GammaShiftSpec::shape(Domain domain, std::size_t column) const {
  const double j = static_cast<double>(column + 1);
  return domain == Domain::Source ? j : j + 1.0;
}

void RegressionSpec::validate() const {
  if (!(nu >= 0.0) || !std::isfinite(nu)) {
    throw std::invalid_argument("RegressionSpec: noise level must be finite and >= 0");
  }
}

double true_ratio(const GammaShiftSpec& spec, std::span<const double> x) {
  spec.validate();
  if (x.size() != spec.d) {
    throw std::invalid_argument("true_ratio: point has " + std::to_string(x.size()) +
                                " coordinates, scenario has d=" + std::to_string(spec.d));
  }
  // prod_j (2 x_j / j) = 2^d / d! * prod_j x_j
  double r = 1.0;
  for (std::size_t j = 0; j < x.size(); ++j) {
    if (!(x[j] > 0.0)) {
      throw std::invalid_argument("true_ratio: coordinate " + std::to_string(j + 1) +
                                  " is not positive");
    }
    r *= GammaShiftSpec::kRate * x[j] / static_cast<double>(j + 1);
  }
  return r;
}

std::vector<double> true_ratio_rows(const GammaShiftSpec& spec, const Matrix& X) {
  std::vector<double> out(X.rows());
  for (std::size_t i = 0; i < X.rows(); ++i) out[i] = true_ratio(spec, X.row(i));
  return out;
}

Matrix gen_gamma_covariates(const GammaShiftSpec& spec, std::size_t n, Domain domain,
                            RngStream& rng) {
  spec.validate();
  if (n == 0) throw std::invalid_argument("gen_gamma_covariates: n must be >= 1");
  Matrix X(n, spec.d);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < spec.d; ++j)
      X(i, j) = gamma_draw(rng, spec.shape(domain, j), GammaShiftSpec::kRate);
  return X;
}

DomainSample gen_gamma_shift(const GammaShiftSpec& spec, std::size_t n_source,
                             std::size_t n_target, RngStream& rng) {
  DomainSample s;
  s.source_X = gen_gamma_covariates(spec, n_source, Domain::Source, rng);
  s.target_X = gen_gamma_covariates(spec, n_target, Domain::Target, rng);
  return s;
}

std::array<double, 2> f0(std::span<const double> x) {
  if (x.size() != RegressionSpec::kDim) {
    throw std::invalid_argument("f0: expects a 5-dimensional point");
  }
  const double f1 = std::sin(std::numbers::pi * (x[0] - x[1])) * std::log1p(x[2] * x[2]);
  const double f2 = x[3] > 2.0 ? std::exp(-x[1]) : 0.0;
  return {f1, f2};
}

Matrix f0_rows(const Matrix& X) {
  Matrix out(X.rows(), 2);
  for (std::size_t i = 0; i < X.rows(); ++i) {
    const auto v = f0(X.row(i));
    out(i, 0) = v[0];
    out(i, 1) = v[1];
  }
  return out;
}

LabeledData gen_regression(const RegressionSpec& spec, std::size_t n, Domain domain,
                           RngStream& rng) {
  spec.validate();
  LabeledData data;
  data.X = gen_gamma_covariates(GammaShiftSpec{RegressionSpec::kDim}, n, domain, rng);
  data.Y = f0_rows(data.X);
  for (std::size_t i = 0; i < n; ++i) {
    const double w = rng.normal();
    data.Y(i, 0) += spec.nu * w;
    data.Y(i, 1) -= spec.nu * w;
  }
  return data;
}

void write_dataset_csv(const std::string& path, Domain domain, const Matrix& X, const Matrix* Y) {
  if (Y && Y->rows() != X.rows()) {
    throw std::invalid_argument("write_dataset_csv: X and Y row counts differ");
  }
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("write_dataset_csv: cannot open " + path);
  os << "domain";
  for (std::size_t j = 0; j < X.cols(); ++j) os << ",x" << j + 1;
  if (Y)
    for (std::size_t j = 0; j < Y->cols(); ++j) os << ",y" << j + 1;
  os << '\n';
  char buf[32];
  for (std::size_t i = 0; i < X.rows(); ++i) {
    os << to_string(domain);
    for (double v : X.row(i)) {
      std::snprintf(buf, sizeof buf, "%.17g", v);
      os << ',' << buf;
    }
    if (Y) {
      for (double v : Y->row(i)) {
        std::snprintf(buf, sizeof buf, "%.17g", v);
        os << ',' << buf;
      }
    }
    os << '\n';
  }
  if (!os) throw std::runtime_error("write_dataset_csv: write failed for " + path);
}

}  // namespace udr
