#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "udr/nn.hpp"
#include "udr/rng.hpp"

namespace udr {

/// Interpolant Y_tau = a(tau) eta + b(tau) y between Gaussian noise at
/// tau = 0 and data at tau = 1.
struct InterpolantSpec {
  std::string name;
  std::function<double(double)> a, a_dot, b, b_dot;

  /// a = 1 - tau, b = tau.
  static InterpolantSpec linear();
  /// a = cos(pi tau / 2), b = sin(pi tau / 2).
  static InterpolantSpec trigonometric();
};

std::vector<double> interpolate(std::span<const double> eta, std::span<const double> y, double tau,
                                const InterpolantSpec& spec);

/// a'(tau) eta + b'(tau) y: the regression target for the velocity field.
std::vector<double> velocity_target(std::span<const double> eta, std::span<const double> y,
                                    double tau, const InterpolantSpec& spec);

/// E[a' eta + b' Y | a eta + b Y = y] for Y ~ N(mu, sigma^2), eta ~ N(0, 1):
///   b' mu + (a' a + b' b sigma^2) / (a^2 + b^2 sigma^2) (y - b mu).
double gaussian_velocity_oracle(double mu, double sigma, const InterpolantSpec& spec, double y,
                                double tau);

struct FlowTrainConfig {
  std::size_t iterations = 5000;
  std::size_t batch_size = 256;
  double learning_rate = 1e-3;
  std::size_t width = 64;
  double kappa = 0.5;
  /// Fresh (eta, tau) for every datum at each epoch; false keeps one draw per
  /// datum for the whole run.
  bool resample_interpolation = true;
  std::uint64_t seed = 0;
};

/// Velocity network over inputs laid out as (x, y, tau).
struct FlowModel {
  MlpModel net;
  InterpolantSpec interpolant;
  std::size_t dx = 0;
  std::size_t dy = 0;
};

/// Untrained flow network: depth from ln(N), output clamped to
/// +-(ln N)^((1 + kappa) / 2).
FlowModel make_flow_model(std::size_t dx, std::size_t dy, std::size_t n_train,
                          const InterpolantSpec& spec, const FlowTrainConfig& cfg,
                          RngStream& rng);

/// Least-squares regression of velocity_target on (x, Y_tau, tau) with
/// tau ~ U(0, 1), eta ~ N(0, I). iterations = 0 returns the initial network.
FlowModel fit_velocity(const Matrix& X, const Matrix& Y, const InterpolantSpec& spec,
                       const FlowTrainConfig& cfg);

/// v(z, tau) for a batch of states z (n x dy); writes n x dy into `out`.
using VelocityField = std::function<void(const Matrix& z, double tau, Matrix& out)>;

enum class Integrator { Euler, Rk4 };

struct OdeConfig {
  std::size_t steps = 100;
  Integrator integrator = Integrator::Rk4;
};

/// Integrates dz = v(z, tau) dtau over [0, 1] from `z0`. Throws
/// NumericalError with the step index on a non-finite state.
Matrix integrate_flow(const VelocityField& v, Matrix z0, const OdeConfig& ode);

/// Velocity of a trained model with the covariate fixed at x.
VelocityField conditional_velocity(const FlowModel& model, std::span<const double> x);

/// n terminal points of the flow started from N(0, I) draws.
Matrix sample_ode(const VelocityField& v, std::size_t dy, std::size_t n, const OdeConfig& ode,
                  RngStream& rng);
Matrix sample_ode(const FlowModel& model, std::span<const double> x, std::size_t n,
                  const OdeConfig& ode, RngStream& rng);

/// Exact empirical 2-Wasserstein distance between equal-size 1-D samples:
/// root mean squared difference of the order statistics.
double w2_empirical_1d(std::span<const double> a, std::span<const double> b);

struct SlicedW2 {
  std::vector<double> per_axis;
  double sum = 0.0;
};

/// w2_empirical_1d along every coordinate axis, plus their sum.
SlicedW2 w2_axis_sliced(const Matrix& a, const Matrix& b);

/// CSV dump of generated samples: header `x1..xdx,z1..zdy`; row i pairs the
/// conditioning covariate x_rows[i] with the generated point z[i].
void write_samples_csv(const std::string& path, const Matrix& x_rows, const Matrix& z);

}  // namespace udr
