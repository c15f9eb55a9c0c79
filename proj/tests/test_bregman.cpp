#include <doctest.h>

#include <cmath>
#include <limits>

#include "oracles.hpp"
#include "udr/bregman.hpp"
#include "udr/rng.hpp"

using udr::BregmanKind;
using udr::Matrix;
constexpr auto LS = BregmanKind::LeastSquares;
constexpr auto LR = BregmanKind::LogisticRegression;

namespace {

// The logistic generator and its derivative written out directly.
double phi_lr_direct(double x) { return x == 0.0 ? 0.0 : x * std::log(x) - (x + 1) * std::log(x + 1); }
double dphi_lr_direct(double y) { return std::log(y) - std::log(y + 1); }
double div_lr_direct(double x, double y) {
  return phi_lr_direct(x) - phi_lr_direct(y) - dphi_lr_direct(y) * (x - y);
}

// Expands a discrete law with masses k/denominator into a sample with
// exactly those proportions.
std::vector<double> replicate(const oracle::Discrete& law, int denominator) {
  std::vector<double> out;
  for (std::size_t i = 0; i < law.points.size(); ++i) {
    const int copies = static_cast<int>(std::lround(law.mass[i] * denominator));
    for (int c = 0; c < copies; ++c) out.push_back(law.points[i]);
  }
  return out;
}

const oracle::Discrete kP{{0.5, 1.0, 2.0, 3.0}, {0.4, 0.3, 0.2, 0.1}};
const oracle::Discrete kQ{{0.5, 1.0, 2.0, 3.0}, {0.1, 0.2, 0.3, 0.4}};

double r0(double x) {
  for (std::size_t i = 0; i < kP.points.size(); ++i)
    if (kP.points[i] == x) return kQ.mass[i] / kP.mass[i];
  return 0.0;
}

}  // namespace

TEST_CASE("phi values") {
  CHECK(udr::phi(LS, 1.0) == 0.0);
  CHECK(udr::phi(LR, 1.0) == doctest::Approx(-2.0 * std::log(2.0)).epsilon(1e-14));
  CHECK(udr::phi(LR, 1.0) == doctest::Approx(-1.386294).epsilon(1e-6));
  CHECK(udr::phi(LR, 0.0) == 0.0);
  CHECK_THROWS_AS(udr::phi(LR, -0.1), std::invalid_argument);
  CHECK_THROWS_AS(udr::phi_prime(LR, 0.0), std::invalid_argument);
  for (double y : {0.01, 0.5, 2.0, 40.0})
    CHECK(udr::phi_prime(LR, y) == doctest::Approx(dphi_lr_direct(y)).epsilon(1e-12));
}

TEST_CASE("divergence examples") {
  CHECK(udr::bregman_div(LS, 3.0, 1.0) == 4.0);
  CHECK(udr::bregman_div(LS, 2.5, 2.5) == 0.0);
  CHECK(udr::bregman_div(LR, 2.5, 2.5) == 0.0);
  CHECK(udr::bregman_div(LR, 1.0, 2.0) == doctest::Approx(0.11778).epsilon(1e-4));
  CHECK(udr::bregman_div(LR, 1.0, 2.0) == doctest::Approx(2 * std::log(3.0) - 3 * std::log(2.0)).epsilon(1e-12));
  CHECK(udr::bregman_div(LR, 0.0, 3.0) == doctest::Approx(std::log(4.0)).epsilon(1e-14));
  CHECK(udr::to_string(LR) == "lr");
  CHECK(udr::parse_bregman_kind("ls") == LS);
  CHECK_THROWS_AS(udr::parse_bregman_kind("kl"), std::invalid_argument);
}

TEST_CASE("divergence properties on random pairs") {
  udr::RngStream rng(1);
  for (int i = 0; i < 100000; ++i) {
    const double x = 10.0 * rng.uniform(), y = 10.0 * rng.uniform();
    for (auto kind : {LS, LR}) {
      REQUIRE(udr::bregman_div(kind, x, y) >= 0.0);
      REQUIRE(std::abs(udr::bregman_div(kind, x, x)) <= 1e-12);
    }
    REQUIRE(udr::bregman_div(LS, x, y) == (x - y) * (x - y));
    if (std::abs(x - y) > 1e-3) REQUIRE(udr::bregman_div(LR, x, y) > 0.0);
  }
}

TEST_CASE("stable logistic divergence agrees with the direct formula") {
  udr::RngStream rng(2);
  for (int i = 0; i < 10000; ++i) {
    const double x = 0.05 + 20.0 * rng.uniform(), y = 0.05 + 20.0 * rng.uniform();
    const double want = div_lr_direct(x, y);
    // The direct form cancels catastrophically when x is close to y, so the
    // comparison is absolute at the scale of the terms involved.
    CHECK(std::abs(udr::bregman_div(LR, x, y) - want) < 1e-10 * (1.0 + x + y) * std::log(2.0 + x + y));
  }
  // Close pairs: the quadratic approximation is the oracle there.
  for (double y : {0.1, 1.0, 10.0}) {
    const double x = y * (1 + 1e-7);
    const double quad = (x - y) * (x - y) / (2.0 * y * (y + 1.0));
    CHECK(udr::bregman_div(LR, x, y) == doctest::Approx(quad).epsilon(1e-5));
  }
}

TEST_CASE("sandwich inequality for the logistic divergence") {
  udr::RngStream rng(3);
  for (int i = 0; i < 100000; ++i) {
    const double a = 0.01 + 2.0 * rng.uniform();
    const double b = a + 0.01 + 20.0 * rng.uniform();
    const double x = a + (b - a) * rng.uniform(), y = a + (b - a) * rng.uniform();
    const double d = udr::bregman_div(LR, x, y), sq = (x - y) * (x - y);
    const double slack = 1e-12 * (1.0 + sq);
    REQUIRE(sq / (2 * b * (b + 1)) <= d + slack);
    REQUIRE(d <= sq / (2 * a * (a + 1)) + slack);
  }
}

TEST_CASE("least-squares objective") {
  const std::vector<double> fs{1, 2}, ft{3};
  CHECK(udr::ls_objective(fs, ft) == -3.5);
  const std::vector<double> zs(4, 0.0), zt(3, 0.0);
  CHECK(udr::ls_objective(zs, zt) == 0.0);

  const auto src = replicate(kP, 10), tgt = replicate(kQ, 10);
  std::vector<double> fsrc, ftgt;
  for (double x : src) fsrc.push_back(r0(x));
  for (double x : tgt) ftgt.push_back(r0(x));
  const double e_r2 = kP.expect([](double x) { return r0(x) * r0(x); });
  CHECK(std::abs(udr::ls_objective(fsrc, ftgt) - (e_r2 - 2.0 * e_r2)) < 1e-12);
}

TEST_CASE("least-squares objective equals the MSE to r0 up to a constant") {
  const auto src = replicate(kP, 10), tgt = replicate(kQ, 10);
  const double e_r2 = kP.expect([](double x) { return r0(x) * r0(x); });
  udr::RngStream rng(4);
  for (int t = 0; t < 50; ++t) {
    const double c0 = rng.normal(), c1 = rng.normal(), c2 = rng.normal();
    auto f = [&](double x) { return c0 + c1 * x + c2 * x * x; };
    std::vector<double> fs, ft;
    for (double x : src) fs.push_back(f(x));
    for (double x : tgt) ft.push_back(f(x));
    const double mse = kP.expect([&](double x) { return (f(x) - r0(x)) * (f(x) - r0(x)); });
    CHECK(std::abs(udr::ls_objective(fs, ft) - (mse - e_r2)) < 1e-12);
  }
}

TEST_CASE("logistic objective") {
  const std::vector<double> one{1.0};
  CHECK(udr::lr_objective(one, one) == doctest::Approx(2.0 * std::log(2.0)).epsilon(1e-14));
  const std::vector<double> big{1e6};
  CHECK(udr::lr_objective(one, big) - std::log(2.0) < 1e-5);
  const std::vector<double> zero{0.0};
  CHECK_THROWS_AS(udr::lr_objective(one, zero), std::invalid_argument);

  // Same law on both sides: the best constant predictor is 1.
  const auto sample = replicate(kP, 10);
  double best_c = 0.0, best = std::numeric_limits<double>::infinity();
  for (int k = 1; k <= 400; ++k) {
    const double c = 0.01 * k;
    const std::vector<double> fs(sample.size(), c), ft(sample.size(), c);
    const double v = udr::lr_objective(fs, ft);
    if (v < best) {
      best = v;
      best_c = c;
    }
  }
  CHECK(best_c == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("objective gradients match finite differences") {
  udr::RngStream rng(5);
  for (auto kind : {LS, LR}) {
    std::vector<double> fs(7), ft(5);
    for (double& v : fs) v = 0.2 + 3.0 * rng.uniform();
    for (double& v : ft) v = 0.2 + 3.0 * rng.uniform();
    const auto g = udr::ratio_objective_grad(kind, fs, ft);
    auto value = [&] { return kind == LS ? udr::ls_objective(fs, ft) : udr::lr_objective(fs, ft); };
    CHECK(g.value == doctest::Approx(value()).epsilon(1e-14));
    const double h = 1e-6;
    for (auto* vec : {&fs, &ft}) {
      const auto& grad = vec == &fs ? g.d_source : g.d_target;
      for (std::size_t i = 0; i < vec->size(); ++i) {
        const double orig = (*vec)[i];
        (*vec)[i] = orig + h;
        const double up = value();
        (*vec)[i] = orig - h;
        const double down = value();
        (*vec)[i] = orig;
        CHECK(grad[i] == doctest::Approx((up - down) / (2 * h)).epsilon(1e-6));
      }
    }
  }
}

TEST_CASE("weighted squared loss") {
  const Matrix p{{1, 2}, {3, 4}, {0, 0}}, t{{0, 2}, {1, 1}, {2, 0}};
  const std::vector<double> ones(3, 1.0), zeros(3, 0.0);
  double mse = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) mse += (p.data()[k] - t.data()[k]) * (p.data()[k] - t.data()[k]);
  mse /= 3.0;
  CHECK(udr::weighted_sq_loss(p, t, ones) == doctest::Approx(mse).epsilon(1e-15));
  CHECK(udr::weighted_sq_loss(p, t, zeros) == 0.0);
  const std::vector<double> negative{1.0, -1.0, 1.0};
  CHECK_THROWS_AS(udr::weighted_sq_loss(p, t, negative), std::invalid_argument);
  CHECK_THROWS_AS(udr::weighted_sq_loss(p, Matrix(2, 2), ones), std::invalid_argument);

  Matrix grad;
  const std::vector<double> w{0.5, 2.0, 1.0};
  const double v = udr::weighted_sq_loss_grad(p, t, w, grad);
  CHECK(v == udr::weighted_sq_loss(p, t, w));
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 2; ++j)
      CHECK(grad(i, j) == doctest::Approx(2.0 * w[i] * (p(i, j) - t(i, j)) / 3.0).epsilon(1e-15));
}

TEST_CASE("importance weighting identity by enumeration") {
  // Ten support points, hand-set masses, a two-dimensional response that is
  // a fixed function of x, and random predictors.
  const std::vector<double> xs{0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
  const std::vector<double> p{.05, .15, .10, .20, .05, .10, .05, .10, .15, .05};
  const std::vector<double> q{.10, .05, .05, .10, .20, .05, .15, .10, .05, .15};
  udr::RngStream rng(6);
  for (int t = 0; t < 20; ++t) {
    Matrix preds(10, 2), targets(10, 2);
    for (std::size_t i = 0; i < 10; ++i) {
      targets(i, 0) = std::sin(xs[i]);
      targets(i, 1) = 0.1 * xs[i] * xs[i];
      preds(i, 0) = rng.normal();
      preds(i, 1) = rng.normal();
    }
    // weighted_sq_loss averages over rows, so scale weights by the row count.
    std::vector<double> wq(10), wp(10);
    for (std::size_t i = 0; i < 10; ++i) {
      wq[i] = 10.0 * q[i];
      wp[i] = 10.0 * p[i] * (q[i] / p[i]);
    }
    CHECK(std::abs(udr::weighted_sq_loss(preds, targets, wq) - udr::weighted_sq_loss(preds, targets, wp)) < 1e-12);
  }
}
