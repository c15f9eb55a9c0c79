#include "udr/flow.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "udr/adam.hpp"
#include "udr/bregman.hpp"
#include "udr/dre.hpp"

namespace udr {

InterpolantSpec InterpolantSpec::linear() {
  return {"linear", [](double t) { return 1.0 - t; }, [](double) { return -1.0; },
          [](double t) { return t; }, [](double) { return 1.0; }};
}

InterpolantSpec InterpolantSpec::trigonometric() {
  constexpr double h = std::numbers::pi / 2.0;
  return {"trigonometric", [](double t) { return std::cos(h * t); },
          [](double t) { return -h * std::sin(h * t); }, [](double t) { return std::sin(h * t); },
          [](double t) { return h * std::cos(h * t); }};
}

namespace {

void check_pair(std::span<const double> eta, std::span<const double> y, double tau) {
  if (eta.size() != y.size()) throw std::invalid_argument("interpolant: eta and y dimensions differ");
  if (!(tau >= 0.0 && tau <= 1.0)) {
    throw std::invalid_argument("interpolant: tau must lie in [0, 1], got " + std::to_string(tau));
  }
}

}  // namespace

std::vector<double> interpolate(std::span<const double> eta, std::span<const double> y, double tau,
                                const InterpolantSpec& spec) {
  check_pair(eta, y, tau);
  const double a = spec.a(tau), b = spec.b(tau);
  std::vector<double> out(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) out[i] = a * eta[i] + b * y[i];
  return out;
}

std::vector<double> velocity_target(std::span<const double> eta, std::span<const double> y,
                                    double tau, const InterpolantSpec& spec) {
  check_pair(eta, y, tau);
  const double ad = spec.a_dot(tau), bd = spec.b_dot(tau);
  std::vector<double> out(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) out[i] = ad * eta[i] + bd * y[i];
  return out;
}

double gaussian_velocity_oracle(double mu, double sigma, const InterpolantSpec& spec, double y,
                                double tau) {
  if (!(sigma >= 0.0)) throw std::invalid_argument("gaussian_velocity_oracle: sigma must be >= 0");
  const double a = spec.a(tau), ad = spec.a_dot(tau);
  const double b = spec.b(tau), bd = spec.b_dot(tau);
  const double s2 = sigma * sigma;
  const double denom = a * a + b * b * s2;
  if (!(denom > 0.0)) {
    throw std::invalid_argument("gaussian_velocity_oracle: a^2 + b^2 sigma^2 vanishes at tau=" +
                                std::to_string(tau));
  }
  return bd * mu + (ad * a + bd * b * s2) / denom * (y - b * mu);
}

FlowModel make_flow_model(std::size_t dx, std::size_t dy, std::size_t n_train,
                          const InterpolantSpec& spec, const FlowTrainConfig& cfg,
                          RngStream& rng) {
  if (dy == 0) throw std::invalid_argument("flow: response dimension must be >= 1");
  if (cfg.width == 0 || cfg.batch_size == 0) {
    throw std::invalid_argument("flow: width and batch_size must be >= 1");
  }
  if (!(cfg.kappa > 0.0 && cfg.kappa < 1.0)) {
    throw std::invalid_argument("flow: kappa must be in (0, 1)");
  }
  const std::size_t n = std::max<std::size_t>(n_train, 3);
  const double bound = std::pow(std::log(static_cast<double>(n)), (1.0 + cfg.kappa) / 2.0);
  FlowModel model;
  model.net.spec.input_dim = dx + dy + 1;
  model.net.spec.hidden_widths.assign(schedule_depth(n), cfg.width);
  model.net.spec.output_dim = dy;
  model.net.spec.out_lo = -bound;
  model.net.spec.out_hi = bound;
  model.net.params = init_params(model.net.spec, rng);
  model.interpolant = spec;
  model.dx = dx;
  model.dy = dy;
  return model;
}

FlowModel fit_velocity(const Matrix& X, const Matrix& Y, const InterpolantSpec& spec,
                       const FlowTrainConfig& cfg) {
  if (X.rows() == 0 || X.rows() != Y.rows()) {
    throw std::invalid_argument("fit_velocity: X " + X.shape_string() + " and Y " +
                                Y.shape_string() + " must be non-empty with equal rows");
  }
  const std::size_t n = X.rows(), dx = X.cols(), dy = Y.cols();
  const RngStream base(cfg.seed);
  RngStream init_rng = base.child(1);
  FlowModel model = make_flow_model(dx, dy, n, spec, cfg, init_rng);
  if (cfg.iterations == 0) return model;

  RngStream noise_rng = base.child(3);
  std::vector<double> tau(n);
  Matrix eta(n, dy);
  auto draw_interpolation = [&] {
    for (std::size_t i = 0; i < n; ++i) {
      tau[i] = noise_rng.uniform();
      for (std::size_t k = 0; k < dy; ++k) eta(i, k) = noise_rng.normal();
    }
  };

  AdamState state = AdamState::for_params(model.net.params);
  const AdamConfig adam{cfg.learning_rate};
  BatchSampler batches(n, cfg.batch_size, base.child(2));
  std::size_t drawn_epoch = std::numeric_limits<std::size_t>::max();
  Matrix inputs, targets;
  std::vector<double> unit;

  for (std::size_t step = 1; step <= cfg.iterations; ++step) {
    const auto& idx = batches.next();
    if (drawn_epoch == std::numeric_limits<std::size_t>::max() ||
        (cfg.resample_interpolation && batches.epoch() != drawn_epoch)) {
      draw_interpolation();
      drawn_epoch = batches.epoch();
    }
    const std::size_t m = idx.size();
    inputs = Matrix(m, dx + dy + 1);
    targets = Matrix(m, dy);
    for (std::size_t r = 0; r < m; ++r) {
      const std::size_t i = idx[r];
      const double t = tau[i];
      const double a = spec.a(t), ad = spec.a_dot(t), b = spec.b(t), bd = spec.b_dot(t);
      auto in = inputs.row(r);
      std::copy_n(X.row(i).begin(), dx, in.begin());
      for (std::size_t k = 0; k < dy; ++k) {
        in[dx + k] = a * eta(i, k) + b * Y(i, k);
        targets(r, k) = ad * eta(i, k) + bd * Y(i, k);
      }
      in[dx + dy] = t;
    }
    unit.assign(m, 1.0);
    const OutputLoss loss = [&](const Matrix& out, Matrix& grad) {
      return weighted_sq_loss_grad(out, targets, unit, grad);
    };
    LossAndGrad lg;
    try {
      lg = loss_and_grad(model.net.spec, model.net.params, inputs, loss);
    } catch (const NumericalError&) {
      throw NumericalError("fit_velocity: loss became non-finite", step);
    }
    adam_step(model.net.params, lg.grads, state, adam);
    if (!model.net.params.all_finite()) {
      throw NumericalError("fit_velocity: parameters became non-finite", step);
    }
  }
  return model;
}

Matrix integrate_flow(const VelocityField& v, Matrix z, const OdeConfig& ode) {
  if (ode.steps == 0) throw std::invalid_argument("integrate_flow: steps must be >= 1");
  const double h = 1.0 / static_cast<double>(ode.steps);
  Matrix k1, k2, k3, k4, tmp;
  auto axpy = [](const Matrix& base, double s, const Matrix& d, Matrix& out) {
    out = base;
    auto o = out.data();
    auto dd = d.data();
    for (std::size_t i = 0; i < o.size(); ++i) o[i] += s * dd[i];
  };
  for (std::size_t step = 0; step < ode.steps; ++step) {
    const double t = static_cast<double>(step) * h;
    if (ode.integrator == Integrator::Euler) {
      v(z, t, k1);
      auto zd = z.data();
      auto kd = k1.data();
      for (std::size_t i = 0; i < zd.size(); ++i) zd[i] += h * kd[i];
    } else {
      v(z, t, k1);
      axpy(z, h / 2.0, k1, tmp);
      v(tmp, t + h / 2.0, k2);
      axpy(z, h / 2.0, k2, tmp);
      v(tmp, t + h / 2.0, k3);
      axpy(z, h, k3, tmp);
      v(tmp, t + h, k4);
      auto zd = z.data();
      auto a = k1.data(), b = k2.data(), c = k3.data(), d = k4.data();
      for (std::size_t i = 0; i < zd.size(); ++i)
        zd[i] += h / 6.0 * (a[i] + 2.0 * b[i] + 2.0 * c[i] + d[i]);
    }
    if (!z.all_finite()) throw NumericalError("integrate_flow: non-finite state", step);
  }
  return z;
}

VelocityField conditional_velocity(const FlowModel& model, std::span<const double> x) {
  if (x.size() != model.dx) {
    throw std::invalid_argument("conditional_velocity: covariate has " + std::to_string(x.size()) +
                                " entries, model expects " + std::to_string(model.dx));
  }
  std::vector<double> xc(x.begin(), x.end());
  return [&model, xc](const Matrix& z, double tau, Matrix& out) {
    Matrix in(z.rows(), model.dx + model.dy + 1);
    for (std::size_t r = 0; r < z.rows(); ++r) {
      auto row = in.row(r);
      std::copy(xc.begin(), xc.end(), row.begin());
      std::copy_n(z.row(r).begin(), model.dy, row.begin() + static_cast<std::ptrdiff_t>(model.dx));
      row[model.dx + model.dy] = tau;
    }
    out = model.net.predict(in);
  };
}

Matrix sample_ode(const VelocityField& v, std::size_t dy, std::size_t n, const OdeConfig& ode,
                  RngStream& rng) {
  return integrate_flow(v, sample_gaussian(rng, n, dy), ode);
}

Matrix sample_ode(const FlowModel& model, std::span<const double> x, std::size_t n,
                  const OdeConfig& ode, RngStream& rng) {
  return sample_ode(conditional_velocity(model, x), model.dy, n, ode, rng);
}

double w2_empirical_1d(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw std::invalid_argument("w2_empirical_1d: sample sizes differ (" +
                                std::to_string(a.size()) + " vs " + std::to_string(b.size()) + ")");
  }
  if (a.empty()) throw std::invalid_argument("w2_empirical_1d: empty samples");
  std::vector<double> sa(a.begin(), a.end()), sb(b.begin(), b.end());
  std::sort(sa.begin(), sa.end());
  std::sort(sb.begin(), sb.end());
  double s = 0.0;
  for (std::size_t i = 0; i < sa.size(); ++i) s += (sa[i] - sb[i]) * (sa[i] - sb[i]);
  return std::sqrt(s / static_cast<double>(sa.size()));
}

SlicedW2 w2_axis_sliced(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.cols()) throw std::invalid_argument("w2_axis_sliced: dimensions differ");
  SlicedW2 out;
  for (std::size_t c = 0; c < a.cols(); ++c) {
    out.per_axis.push_back(w2_empirical_1d(a.col(c), b.col(c)));
    out.sum += out.per_axis.back();
  }
  return out;
}

void write_samples_csv(const std::string& path, const Matrix& x_rows, const Matrix& z) {
  if (x_rows.rows() != z.rows()) {
    throw std::invalid_argument("write_samples_csv: covariate and sample row counts differ");
  }
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("write_samples_csv: cannot open " + path);
  bool first = true;
  auto sep = [&] {
    if (!first) os << ',';
    first = false;
  };
  for (std::size_t j = 0; j < x_rows.cols(); ++j) sep(), os << 'x' << j + 1;
  for (std::size_t j = 0; j < z.cols(); ++j) sep(), os << 'z' << j + 1;
  os << '\n';
  char buf[32];
  for (std::size_t i = 0; i < z.rows(); ++i) {
    first = true;
    for (double v : x_rows.row(i)) sep(), std::snprintf(buf, sizeof buf, "%.17g", v), os << buf;
    for (double v : z.row(i)) sep(), std::snprintf(buf, sizeof buf, "%.17g", v), os << buf;
    os << '\n';
  }
  if (!os) throw std::runtime_error("write_samples_csv: write failed for " + path);
}

}  // namespace udr
