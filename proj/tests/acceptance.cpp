// Acceptance checks. `acceptance <k>` runs criterion k, `acceptance` runs all
// of them. Each criterion prints exactly one PASS/FAIL line; the exit status
// is non-zero if any selected criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "udr/bench.hpp"
#include "udr/bregman.hpp"
#include "udr/flow.hpp"
#include "udr/nn.hpp"
#include "udr/rng.hpp"
#include "udr/truncate.hpp"

using udr::Matrix;
using udr::RngStream;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string fmt(const char* pattern, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, pattern, args...);
  return buf;
}

double mean_of(const std::vector<udr::SummaryRow>& rows, std::size_t n, const std::string& metric) {
  for (const auto& r : rows)
    if (r.n == n && r.metric == metric) return r.mean;
  throw std::runtime_error("missing row " + metric + " at n=" + std::to_string(n));
}

// 1. Reverse-mode gradients against central differences.
Verdict gradient_check() {
  const Stopwatch clock;
  RngStream rng(101);
  // Mildly nonlinear in the outputs so the check is not just a linear map.
  auto loss_value = [](const std::vector<std::vector<double>>& outs, const Matrix& Y) {
    double s = 0.0;
    for (std::size_t i = 0; i < outs.size(); ++i)
      for (std::size_t j = 0; j < outs[i].size(); ++j) {
        const double e = outs[i][j] - Y(i, j);
        s += e * e + 0.3 * std::sin(outs[i][j]);
      }
    return s / static_cast<double>(outs.size());
  };

  int configs = 0, bounded = 0, attempts = 0;
  double worst = 0.0;
  while (configs < 12 && attempts < 500) {
    ++attempts;
    const std::size_t depth = 1 + rng.below(3);
    udr::MlpSpec spec;
    spec.input_dim = 1 + rng.below(4);
    spec.output_dim = 1 + rng.below(2);
    for (std::size_t l = 0; l < depth; ++l) spec.hidden_widths.push_back(1 + rng.below(32));
    udr::MlpParams p = udr::init_params(spec, rng);
    for (auto& layer : p.layers)
      for (double& b : layer.bias) b = 0.1 * rng.normal();

    const std::size_t rows = 5;
    Matrix X(rows, spec.input_dim);
    for (double& v : X.data()) v = rng.normal();
    const bool with_bounds = configs % 2 == 1;
    if (with_bounds) {
      // Bounds straddling the output range so that some rows are clamped.
      std::vector<double> raw;
      for (std::size_t r = 0; r < rows; ++r) {
        const auto o = oracle::scalar_forward(spec, p, {X.row(r).begin(), X.row(r).end()});
        raw.insert(raw.end(), o.begin(), o.end());
      }
      std::sort(raw.begin(), raw.end());
      spec.out_lo = raw[raw.size() / 4] - 0.05 - 0.1 * rng.uniform();
      spec.out_hi = raw[3 * raw.size() / 4] + 0.05 + 0.1 * rng.uniform();
    }
    if (oracle::kink_margin(spec, p, X) < 1e-3) continue;

    Matrix Y(rows, spec.output_dim);
    for (double& v : Y.data()) v = rng.normal();
    const udr::OutputLoss loss = [&](const Matrix& out, Matrix& grad) {
      grad = Matrix(out.rows(), out.cols());
      const double n = static_cast<double>(out.rows());
      for (std::size_t i = 0; i < out.rows(); ++i)
        for (std::size_t j = 0; j < out.cols(); ++j)
          grad(i, j) = (2.0 * (out(i, j) - Y(i, j)) + 0.3 * std::cos(out(i, j))) / n;
      std::vector<std::vector<double>> outs(out.rows());
      for (std::size_t i = 0; i < out.rows(); ++i) outs[i].assign(out.row(i).begin(), out.row(i).end());
      return loss_value(outs, Y);
    };
    const auto analytic = udr::loss_and_grad(spec, p, X, loss);
    const auto fd = oracle::fd_gradient(
        p,
        [&](const udr::MlpParams& q) {
          std::vector<std::vector<double>> outs;
          for (std::size_t r = 0; r < rows; ++r)
            outs.push_back(oracle::scalar_forward(spec, q, {X.row(r).begin(), X.row(r).end()}));
          return loss_value(outs, Y);
        },
        1e-5);
    worst = std::max(worst, oracle::max_relative_error(analytic.grads, fd));
    ++configs;
    bounded += with_bounds ? 1 : 0;
  }
  const double secs = clock.seconds();
  return {configs >= 10 && bounded >= 1 && configs - bounded >= 1 && worst < 1e-4 && secs < 10.0,
          fmt("%d configs (%d bounded), max rel err %.3g < 1e-4, %.2f s < 10 s", configs, bounded, worst,
              secs)};
}

// 2. Relu-composition truncation against the piecewise clamp.
Verdict truncation_identities() {
  RngStream rng(202);
  double worst_straddle = 0.0, worst_nonneg = 0.0;
  const int trials = 10000;
  for (int t = 0; t < trials; ++t) {
    const double a = -(0.01 + 10.0 * rng.uniform()), b = 0.01 + 10.0 * rng.uniform();
    const double x = 30.0 * (rng.uniform() - 0.5);
    worst_straddle = std::max(worst_straddle, std::abs(udr::truncate_relu_straddle(x, a, b) - oracle::clamp(x, a, b)));

    const double a2 = t % 10 == 0 ? 0.0 : 5.0 * rng.uniform();
    const double b2 = a2 + 0.01 + 10.0 * rng.uniform();
    const double x2 = 30.0 * (rng.uniform() - 0.5);
    worst_nonneg = std::max(worst_nonneg, std::abs(udr::truncate_relu_nonneg(x2, a2, b2) - oracle::clamp(x2, a2, b2)));
  }
  return {worst_straddle <= 1e-12 && worst_nonneg <= 1e-12,
          fmt("%d triples per form, max |diff| %.3g (a<0<b) and %.3g (0<=a<b) <= 1e-12", trials,
              worst_straddle, worst_nonneg)};
}

// 3. Divergence properties and the logistic sandwich bound.
Verdict bregman_properties() {
  using udr::BregmanKind;
  RngStream rng(303);
  const int pairs = 100000;
  long negatives = 0, self_nonzero = 0, ls_mismatch = 0;
  for (int i = 0; i < pairs; ++i) {
    const double x = 10.0 * rng.uniform(), y = 1e-6 + 10.0 * rng.uniform();
    for (auto kind : {BregmanKind::LeastSquares, BregmanKind::LogisticRegression}) {
      if (udr::bregman_div(kind, x, y) < 0.0) ++negatives;
      if (std::abs(udr::bregman_div(kind, y, y)) > 1e-12) ++self_nonzero;
    }
    if (udr::bregman_div(BregmanKind::LeastSquares, x, y) != (x - y) * (x - y)) ++ls_mismatch;
  }
  long sandwich_violations = 0;
  for (int i = 0; i < pairs; ++i) {
    const double a = 0.001 + 5.0 * rng.uniform();
    const double b = a + 0.001 + 20.0 * rng.uniform();
    const double x = a + (b - a) * rng.uniform(), y = a + (b - a) * rng.uniform();
    if (!(a < x && x < b && a < y && y < b)) continue;
    const double d = udr::bregman_div(BregmanKind::LogisticRegression, x, y), sq = (x - y) * (x - y);
    // Rounding allowance at the level of the divergence itself.
    const double slack = 1e-12 * (1.0 + sq);
    if (sq / (2.0 * b * (b + 1.0)) > d + slack || d > sq / (2.0 * a * (a + 1.0)) + slack) ++sandwich_violations;
  }
  return {negatives == 0 && self_nonzero == 0 && ls_mismatch == 0 && sandwich_violations == 0,
          fmt("%d pairs: %ld negative, %ld D(x||x)!=0, %ld LS mismatches; sandwich %ld violations", pairs,
              negatives, self_nonzero, ls_mismatch, sandwich_violations)};
}

// 4. E_Q[g] = E_P[r0 g] on a ten-point support, and the same identity
// through the library's weighted loss.
Verdict importance_weighting() {
  const oracle::Discrete P{{-2.0, -1.0, -0.5, 0.0, 0.3, 0.7, 1.0, 1.5, 2.5, 4.0},
                           {0.05, 0.15, 0.10, 0.20, 0.05, 0.10, 0.05, 0.10, 0.15, 0.05}};
  const oracle::Discrete Q{P.points, {0.10, 0.05, 0.05, 0.10, 0.20, 0.05, 0.15, 0.10, 0.05, 0.15}};
  auto r0 = [&](double x) {
    for (std::size_t i = 0; i < P.points.size(); ++i)
      if (P.points[i] == x) return Q.mass[i] / P.mass[i];
    throw std::logic_error("point outside the support");
  };

  RngStream rng(404);
  double worst_direct = 0.0, worst_loss = 0.0;
  for (int t = 0; t < 100; ++t) {
    const double c0 = rng.normal(), c1 = rng.normal(), c2 = rng.normal(), w = 3.0 * rng.uniform();
    const auto g = [&](double x) { return c0 + c1 * x + c2 * std::sin(w * x); };
    const double eq = Q.expect(g);
    const double ep = P.expect([&](double x) { return r0(x) * g(x); });
    worst_direct = std::max(worst_direct, std::abs(eq - ep));

    // Squared loss of a random predictor against a fixed response, where the
    // library applies the weights.
    Matrix preds(10, 1), targets(10, 1);
    std::vector<double> wts(10);
    for (std::size_t i = 0; i < 10; ++i) {
      const double x = P.points[i];
      targets(i, 0) = std::cos(x);
      preds(i, 0) = g(x);
      wts[i] = 10.0 * P.mass[i] * r0(x);
    }
    const double lib = udr::weighted_sq_loss(preds, targets, wts);
    const double truth = Q.expect([&](double x) { return (g(x) - std::cos(x)) * (g(x) - std::cos(x)); });
    worst_loss = std::max(worst_loss, std::abs(lib - truth));
  }
  return {worst_direct <= 1e-12 && worst_loss <= 1e-12,
          fmt("100 test functions: max |E_Q g - E_P r0 g| %.3g, weighted loss %.3g <= 1e-12", worst_direct,
              worst_loss)};
}

// 5. Ratio estimation trend, d = 1, LS loss.
Verdict dre_trend() {
  const Stopwatch clock;
  udr::ExperimentConfig cfg;
  cfg.experiment = udr::Experiment::Dre;
  cfg.dims = {1};
  cfg.sizes = {200, 3000};
  cfg.reps = 20;
  cfg.loss = udr::BregmanKind::LeastSquares;
  const auto run = udr::run_dre(cfg);
  const double s200 = mean_of(run.rows, 200, "source_mse"), s3000 = mean_of(run.rows, 3000, "source_mse");
  const double t3000 = mean_of(run.rows, 3000, "target_mse");
  return {run.failures == 0 && s3000 < s200 && s3000 <= 0.06 && t3000 >= s3000,
          fmt("src MSE 200=%.4g > 3000=%.4g, src(3000) <= 0.06, tgt(3000)=%.4g >= src(3000); %zu failures, "
              "%.0f s",
              s200, s3000, t3000, run.failures, clock.seconds())};
}

// 6. Covariate-shift risk orderings, nu = 0.1.
Verdict shift_orderings() {
  const Stopwatch clock;
  udr::ExperimentConfig cfg;
  cfg.experiment = udr::Experiment::Shift;
  cfg.nus = {0.1};
  cfg.sizes = {500, 3000};
  cfg.reps = 20;
  const auto run = udr::run_shift(cfg);
  auto m = [&](std::size_t n, const char* metric) { return mean_of(run.rows, n, metric); };
  bool ok = run.failures == 0;
  ok = ok && m(500, "sers") < m(500, "sert") && m(3000, "sers") < m(3000, "sert");
  ok = ok && m(3000, "sert") < m(3000, "edrc");
  // The weaker comparison carries a 20% relative slack band.
  ok = ok && m(3000, "sert") < 1.2 * m(3000, "odrc");
  for (const char* metric : {"sers", "sert", "edrc", "odrc"}) ok = ok && m(3000, metric) < m(500, metric);
  return {ok, fmt("n=500 sers/sert/edrc/odrc %.4g/%.4g/%.4g/%.4g; n=3000 %.4g/%.4g/%.4g/%.4g; "
                  "sert<1.2*odrc; %zu failures, %.0f s",
                  m(500, "sers"), m(500, "sert"), m(500, "edrc"), m(500, "odrc"), m(3000, "sers"),
                  m(3000, "sert"), m(3000, "edrc"), m(3000, "odrc"), run.failures, clock.seconds())};
}

// 7. Transport with the exact Gaussian velocity.
Verdict oracle_transport() {
  const double mu = 2.0, sigma = 0.5;
  const std::size_t n = 5000;
  const auto spec = udr::InterpolantSpec::linear();
  const udr::VelocityField v = [&](const Matrix& z, double tau, Matrix& out) {
    out = Matrix(z.rows(), z.cols());
    for (std::size_t i = 0; i < z.rows(); ++i)
      out(i, 0) = udr::gaussian_velocity_oracle(mu, sigma, spec, z(i, 0), tau);
  };
  RngStream rng(707);
  const Matrix z = udr::sample_ode(v, 1, n, udr::OdeConfig{100, udr::Integrator::Rk4}, rng);
  double mean = 0.0;
  for (double x : z.data()) mean += x / static_cast<double>(n);
  double var = 0.0;
  for (double x : z.data()) var += (x - mean) * (x - mean) / static_cast<double>(n - 1);
  const double sd = std::sqrt(var);

  Matrix truth(n, 1);
  for (double& x : truth.data()) x = mu + sigma * rng.normal();
  const double w2 = udr::w2_axis_sliced(z, truth).sum;
  return {std::abs(mean - mu) < 0.05 && std::abs(sd - sigma) < 0.05 && w2 < 0.05,
          fmt("mean %.4f (|.-2|<0.05), std %.4f (|.-0.5|<0.05), sliced W2 %.4f < 0.05", mean, sd, w2)};
}

// 8. Learned conditional transport on the Gaussian toy.
Verdict learned_transport() {
  const Stopwatch clock;
  udr::ExperimentConfig cfg;
  cfg.experiment = udr::Experiment::Flow;
  cfg.sizes = {5000};
  cfg.reps = 1;
  cfg.iterations = 5000;
  const auto run = udr::run_flow(cfg);
  const double w2 = mean_of(run.rows, 5000, "w2_learned");
  const double secs = clock.seconds();
  return {run.failures == 0 && w2 < 0.15 && secs < 300.0,
          fmt("grid-averaged W2 %.4f < 0.15 (oracle %.4f, zero-velocity %.4f), %.0f s < 300 s", w2,
              mean_of(run.rows, 5000, "w2_oracle"), mean_of(run.rows, 5000, "w2_prior"), secs)};
}

// 9. Byte-identical CSV output for repeated runs of each experiment.
Verdict determinism() {
  const auto dir = std::filesystem::temp_directory_path() / "udr_acceptance";
  std::filesystem::create_directories(dir);
  auto slurp = [](const std::filesystem::path& p) {
    std::ifstream is(p, std::ios::binary);
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
  };

  std::vector<udr::ExperimentConfig> configs(3);
  configs[0].experiment = udr::Experiment::Dre;
  configs[0].dims = {1, 2};
  configs[0].sizes = {100, 200};
  configs[0].reps = 3;
  configs[0].iterations = 200;
  configs[1].experiment = udr::Experiment::Shift;
  configs[1].sizes = {150};
  configs[1].reps = 2;
  configs[1].iteration_grid = {100, 200};
  configs[1].ratio_iterations = 200;
  configs[1].n12 = 150;
  configs[1].n_test = 300;
  configs[2].experiment = udr::Experiment::Flow;
  configs[2].sizes = {300};
  configs[2].reps = 2;
  configs[2].iterations = 300;
  configs[2].flow_eval_n = 300;

  int identical = 0;
  std::size_t bytes = 0;
  for (std::size_t k = 0; k < configs.size(); ++k) {
    std::string first;
    for (int pass = 0; pass < 2; ++pass) {
      const auto path = dir / ("run" + std::to_string(k) + "_" + std::to_string(pass) + ".csv");
      udr::write_csv(udr::run_experiment(configs[k]).rows, path.string());
      const std::string text = slurp(path);
      if (pass == 0) first = text;
      else if (text == first && text.size() > 60) {
        ++identical;
        bytes += text.size();
      }
    }
  }
  return {identical == 3, fmt("%d/3 experiments byte-identical across reruns (%zu bytes compared)", identical, bytes)};
}

struct Criterion {
  const char* name;
  Verdict (*run)();
};

const Criterion kCriteria[] = {
    {"gradient correctness", gradient_check},
    {"truncation identities", truncation_identities},
    {"Bregman properties", bregman_properties},
    {"importance-weighting identity", importance_weighting},
    {"ratio-estimation trend", dre_trend},
    {"covariate-shift orderings", shift_orderings},
    {"oracle flow transport", oracle_transport},
    {"learned flow transport", learned_transport},
    {"determinism", determinism},
};

}  // namespace

int main(int argc, char** argv) {
  constexpr int count = static_cast<int>(std::size(kCriteria));
  std::vector<int> selected;
  for (int i = 1; i < argc; ++i) {
    const int k = std::atoi(argv[i]);
    if (k < 1 || k > count) {
      std::fprintf(stderr, "usage: %s [criterion 1..%d]...\n", argv[0], count);
      return 2;
    }
    selected.push_back(k);
  }
  if (selected.empty())
    for (int k = 1; k <= count; ++k) selected.push_back(k);

  bool all = true;
  for (int k : selected) {
    Verdict v;
    try {
      v = kCriteria[k - 1].run();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    std::printf("criterion %d %s: %s (%s)\n", k, v.pass ? "PASS" : "FAIL", kCriteria[k - 1].name, v.detail.c_str());
    std::fflush(stdout);
    all = all && v.pass;
  }
  return all ? 0 : 1;
}
