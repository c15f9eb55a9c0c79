#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstring>

#include "udr/bench.hpp"
#include "udr/bregman.hpp"
#include "udr/dre.hpp"
#include "udr/flow.hpp"
#include "udr/scenarios.hpp"
#include "udr/shift.hpp"
#include "udr/truncate.hpp"

namespace py = pybind11;
using udr::Matrix;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

Matrix to_matrix(const Array& a) {
  if (a.ndim() == 1) {
    Matrix m(static_cast<std::size_t>(a.shape(0)), 1);
    std::memcpy(m.data().data(), a.data(), sizeof(double) * m.rows());
    return m;
  }
  if (a.ndim() != 2) throw std::invalid_argument("expected a 1-D or 2-D float array");
  Matrix m(static_cast<std::size_t>(a.shape(0)), static_cast<std::size_t>(a.shape(1)));
  std::memcpy(m.data().data(), a.data(), sizeof(double) * m.rows() * m.cols());
  return m;
}

Array to_array(const Matrix& m) {
  Array out({m.rows(), m.cols()});
  std::memcpy(out.mutable_data(), m.data().data(), sizeof(double) * m.rows() * m.cols());
  return out;
}

Array to_array(const std::vector<double>& v) {
  Array out(static_cast<py::ssize_t>(v.size()));
  std::memcpy(out.mutable_data(), v.data(), sizeof(double) * v.size());
  return out;
}

std::vector<double> to_vector(const Array& a) {
  return {a.data(), a.data() + a.size()};
}

udr::InterpolantSpec interpolant(const std::string& name) {
  if (name == "linear") return udr::InterpolantSpec::linear();
  if (name == "trigonometric") return udr::InterpolantSpec::trigonometric();
  throw std::invalid_argument("interpolant must be 'linear' or 'trigonometric'");
}

udr::OdeConfig ode_config(std::size_t steps, const std::string& integrator) {
  udr::OdeConfig ode;
  ode.steps = steps;
  if (integrator == "rk4") {
    ode.integrator = udr::Integrator::Rk4;
  } else if (integrator == "euler") {
    ode.integrator = udr::Integrator::Euler;
  } else {
    throw std::invalid_argument("integrator must be 'rk4' or 'euler'");
  }
  return ode;
}

py::list rows_to_py(const std::vector<udr::SummaryRow>& rows) {
  py::list out;
  for (const auto& r : rows) {
    py::dict d;
    d["experiment"] = r.experiment;
    d["scenario"] = r.scenario;
    d["n"] = r.n;
    d["metric"] = r.metric;
    d["mean"] = r.mean;
    d["std"] = r.std;
    d["reps"] = r.reps;
    out.append(d);
  }
  return out;
}

}  // namespace

PYBIND11_MODULE(_udr, m) {
  m.doc() = "Density-ratio estimation, covariate-shift correction and conditional flows";

  py::register_exception<udr::NumericalError>(m, "NumericalError", PyExc_ArithmeticError);
  py::register_exception<udr::IoError>(m, "IoError", PyExc_OSError);

  m.def("truncate", &udr::truncate, py::arg("x"), py::arg("a"), py::arg("b"));
  m.def(
      "bregman_div",
      [](const std::string& kind, double x, double y) {
        return udr::bregman_div(udr::parse_bregman_kind(kind), x, y);
      },
      py::arg("kind"), py::arg("x"), py::arg("y"));
  m.def(
      "ratio_objective",
      [](const std::string& kind, const Array& fs, const Array& ft) {
        const auto s = to_vector(fs), t = to_vector(ft);
        return udr::parse_bregman_kind(kind) == udr::BregmanKind::LeastSquares
                   ? udr::ls_objective(s, t)
                   : udr::lr_objective(s, t);
      },
      py::arg("kind"), py::arg("f_source"), py::arg("f_target"));

  m.def(
      "gamma_shift_sample",
      [](std::size_t d, std::size_t n_source, std::size_t n_target, std::uint64_t seed) {
        udr::RngStream rng(seed);
        const auto s = udr::gen_gamma_shift(udr::GammaShiftSpec{d}, n_source, n_target, rng);
        return py::make_tuple(to_array(s.source_X), to_array(s.target_X));
      },
      py::arg("d"), py::arg("n_source"), py::arg("n_target"), py::arg("seed"),
      "Draws (source, target) covariates of the product-gamma shift scenario.");
  m.def(
      "true_ratio",
      [](std::size_t d, const Array& X) {
        return to_array(udr::true_ratio_rows(udr::GammaShiftSpec{d}, to_matrix(X)));
      },
      py::arg("d"), py::arg("X"));
  m.def(
      "regression_sample",
      [](double nu, std::size_t n, const std::string& domain, std::uint64_t seed) {
        udr::RngStream rng(seed);
        const auto dom = domain == "target" ? udr::Domain::Target : udr::Domain::Source;
        const auto data = udr::gen_regression(udr::RegressionSpec{nu}, n, dom, rng);
        return py::make_tuple(to_array(data.X), to_array(data.Y));
      },
      py::arg("nu"), py::arg("n"), py::arg("domain") = "source", py::arg("seed") = 0);
  m.def("f0", [](const Array& X) { return to_array(udr::f0_rows(to_matrix(X))); }, py::arg("X"));

  py::class_<udr::MlpModel>(m, "Model")
      .def("predict", [](const udr::MlpModel& self, const Array& X) {
        return to_array(self.predict(to_matrix(X)));
      })
      .def_property_readonly("depth", [](const udr::MlpModel& self) { return self.spec.depth(); })
      .def_property_readonly("parameter_count",
                             [](const udr::MlpModel& self) { return self.params.parameter_count(); })
      .def("lipschitz_bound",
           [](const udr::MlpModel& self) { return udr::lipschitz_upper_bound(self.params); });

  m.def(
      "fit_ratio",
      [](const Array& source, const Array& target, const std::string& loss, std::size_t iterations,
         std::size_t width, double kappa, double learning_rate, std::size_t batch_size,
         std::uint64_t seed) {
        udr::DreConfig cfg;
        cfg.kind = udr::parse_bregman_kind(loss);
        cfg.iterations = iterations;
        cfg.width = width;
        cfg.kappa = kappa;
        cfg.learning_rate = learning_rate;
        cfg.batch_size = batch_size;
        cfg.seed = seed;
        udr::DomainSample sample{to_matrix(source), to_matrix(target), std::nullopt};
        py::gil_scoped_release release;
        return udr::fit_ratio(sample, cfg);
      },
      py::arg("source"), py::arg("target"), py::arg("loss") = "ls", py::arg("iterations") = 1000,
      py::arg("width") = 64, py::arg("kappa") = 0.5, py::arg("learning_rate") = 1e-4,
      py::arg("batch_size") = 100, py::arg("seed") = 0,
      "Trains a truncated ReLU network estimating target/source density ratio.");

  m.def(
      "shift_replication",
      [](double nu, std::size_t n11, std::size_t n12, std::vector<std::size_t> grid,
         std::size_t ratio_iterations, std::uint64_t seed) {
        udr::ShiftConfig cfg;
        cfg.nu = nu;
        cfg.n11 = n11;
        cfg.n12 = n12;
        cfg.iteration_grid = std::move(grid);
        cfg.ratio_iterations = ratio_iterations;
        cfg.seed = seed;
        udr::RiskReport r;
        {
          py::gil_scoped_release release;
          r = udr::run_shift_replication(cfg);
        }
        py::dict d;
        d["sers"] = r.sers;
        d["sert"] = r.sert;
        d["edrc"] = r.edrc;
        d["odrc"] = r.odrc;
        return d;
      },
      py::arg("nu") = 0.1, py::arg("n11") = 500, py::arg("n12") = 500,
      py::arg("grid") = std::vector<std::size_t>{1000, 2000, 3000, 4000, 5000},
      py::arg("ratio_iterations") = 5000, py::arg("seed") = 0,
      "One covariate-shift replication; returns the four test risks.");

  m.def(
      "gaussian_velocity",
      [](double mu, double sigma, double y, double tau, const std::string& interp) {
        return udr::gaussian_velocity_oracle(mu, sigma, interpolant(interp), y, tau);
      },
      py::arg("mu"), py::arg("sigma"), py::arg("y"), py::arg("tau"),
      py::arg("interpolant") = "linear");
  m.def(
      "sample_gaussian_oracle",
      [](double mu, double sigma, std::size_t n, std::size_t steps, const std::string& integrator,
         const std::string& interp, std::uint64_t seed) {
        const auto spec = interpolant(interp);
        const udr::VelocityField v = [&](const Matrix& z, double tau, Matrix& out) {
          out = Matrix(z.rows(), 1);
          for (std::size_t i = 0; i < z.rows(); ++i)
            out(i, 0) = udr::gaussian_velocity_oracle(mu, sigma, spec, z(i, 0), tau);
        };
        udr::RngStream rng(seed);
        return to_array(udr::sample_ode(v, 1, n, ode_config(steps, integrator), rng).col(0));
      },
      py::arg("mu"), py::arg("sigma"), py::arg("n"), py::arg("steps") = 100,
      py::arg("integrator") = "rk4", py::arg("interpolant") = "linear", py::arg("seed") = 0,
      "Transports N(0, 1) draws with the exact velocity of N(mu, sigma^2).");

  py::class_<udr::FlowModel>(m, "FlowModel")
      .def(
          "sample",
          [](const udr::FlowModel& self, const Array& x, std::size_t n, std::size_t steps,
             const std::string& integrator, std::uint64_t seed) {
            udr::RngStream rng(seed);
            const auto xv = to_vector(x);
            return to_array(udr::sample_ode(self, xv, n, ode_config(steps, integrator), rng));
          },
          py::arg("x"), py::arg("n"), py::arg("steps") = 100, py::arg("integrator") = "rk4",
          py::arg("seed") = 0)
      .def_property_readonly("lipschitz_bound", [](const udr::FlowModel& self) {
        return udr::lipschitz_upper_bound(self.net.params);
      });

  m.def(
      "fit_velocity",
      [](const Array& X, const Array& Y, std::size_t iterations, std::size_t batch_size,
         double learning_rate, std::size_t width, const std::string& interp, std::uint64_t seed) {
        udr::FlowTrainConfig cfg;
        cfg.iterations = iterations;
        cfg.batch_size = batch_size;
        cfg.learning_rate = learning_rate;
        cfg.width = width;
        cfg.seed = seed;
        const Matrix xm = to_matrix(X), ym = to_matrix(Y);
        const auto spec = interpolant(interp);
        py::gil_scoped_release release;
        return udr::fit_velocity(xm, ym, spec, cfg);
      },
      py::arg("X"), py::arg("Y"), py::arg("iterations") = 5000, py::arg("batch_size") = 256,
      py::arg("learning_rate") = 1e-3, py::arg("width") = 64, py::arg("interpolant") = "linear",
      py::arg("seed") = 0, "Fits a conditional velocity field by least squares.");

  m.def(
      "w2_1d",
      [](const Array& a, const Array& b) { return udr::w2_empirical_1d(to_vector(a), to_vector(b)); },
      py::arg("a"), py::arg("b"));

  m.def(
      "run_experiment",
      [](const std::string& experiment, const std::map<std::string, std::string>& overrides) {
        udr::ExperimentConfig cfg;
        cfg.experiment = udr::parse_experiment(experiment);
        for (const auto& [k, v] : overrides) udr::apply_config_entry(cfg, k, v);
        udr::RunResult result;
        {
          py::gil_scoped_release release;
          result = udr::run_experiment(cfg);
        }
        py::dict d;
        d["rows"] = rows_to_py(result.rows);
        d["csv"] = udr::format_csv(result.rows);
        d["failures"] = result.failures;
        d["tasks"] = result.tasks;
        return d;
      },
      py::arg("experiment"), py::arg("overrides") = std::map<std::string, std::string>{},
      "Runs a replication experiment; overrides use the config-file keys.");
}
