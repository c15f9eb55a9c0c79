#include "udr/bench.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <thread>

#include "udr/dre.hpp"
#include "udr/scenarios.hpp"
#include "udr/shift.hpp"
#include "udr/stats.hpp"

namespace udr {

std::string_view to_string(Experiment e) {
  switch (e) {
    case Experiment::Dre: return "dre";
    case Experiment::Shift: return "shift";
    case Experiment::Flow: return "flow";
  }
  return "?";
}

Experiment parse_experiment(std::string_view name) {
  if (name == "dre") return Experiment::Dre;
  if (name == "shift") return Experiment::Shift;
  if (name == "flow") return Experiment::Flow;
  throw std::invalid_argument("unknown experiment '" + std::string(name) +
                              "' (expected dre, shift or flow)");
}

std::vector<std::size_t> ExperimentConfig::resolved_sizes() const {
  if (!sizes.empty()) return sizes;
  switch (experiment) {
    case Experiment::Dre: return {200, 500, 1000, 1500, 2000, 3000};
    case Experiment::Shift: return {500, 1000, 1500, 2000, 2500, 3000};
    case Experiment::Flow: return {500, 1000, 2000, 5000};
  }
  return {};
}

void ExperimentConfig::validate() const {
  if (reps == 0) throw std::invalid_argument("config: reps must be >= 1");
  if (workers == 0) throw std::invalid_argument("config: parallel must be >= 1");
  for (std::size_t n : resolved_sizes())
    if (n == 0) throw std::invalid_argument("config: sample sizes must be positive");
  if (experiment == Experiment::Dre) {
    if (dims.empty()) throw std::invalid_argument("config: d list is empty");
    for (std::size_t d : dims)
      if (d == 0) throw std::invalid_argument("config: d must be >= 1");
    for (std::size_t n : resolved_sizes())
      if (n < 3) throw std::invalid_argument("config: dre sample sizes must be >= 3");
  }
  if (experiment == Experiment::Shift) {
    if (nus.empty()) throw std::invalid_argument("config: nu list is empty");
    for (double nu : nus)
      if (!(nu >= 0.0)) throw std::invalid_argument("config: nu must be >= 0");
    for (std::size_t n : resolved_sizes())
      if (n < 10) throw std::invalid_argument("config: shift needs n11 >= 10");
    if (iteration_grid.empty()) throw std::invalid_argument("config: iteration grid is empty");
  }
  if (experiment == Experiment::Flow) {
    if (!(flow_sigma > 0.0)) throw std::invalid_argument("config: sigma must be > 0");
    if (!(kappa > 0.0 && kappa < 1.0)) throw std::invalid_argument("config: flow needs kappa in (0, 1)");
  } else if (!(kappa > 0.0 && kappa <= 1.0)) {
    throw std::invalid_argument("config: kappa must be in (0, 1]");
  }
  if (width == 0 || n_test == 0 || n12 == 0 || flow_eval_n == 0 || ode.steps == 0) {
    throw std::invalid_argument("config: width, n_test, n12, eval_n and ode_steps must be >= 1");
  }
}

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::size_t parse_count(std::string_view key, std::string_view text) {
  const std::string s = trim(text);
  std::size_t pos = 0;
  unsigned long long v = 0;
  try {
    if (s.empty() || s[0] == '-') throw std::invalid_argument("negative");
    v = std::stoull(s, &pos);
  } catch (const std::exception&) {
    pos = std::string::npos;
  }
  if (pos != s.size()) {
    throw std::invalid_argument("config: '" + std::string(key) + "' expects a count, got '" + s + "'");
  }
  return static_cast<std::size_t>(v);
}

double parse_real(std::string_view key, std::string_view text) {
  const std::string s = trim(text);
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &pos);
  } catch (const std::exception&) {
    pos = std::string::npos;
  }
  if (pos != s.size()) {
    throw std::invalid_argument("config: '" + std::string(key) + "' expects a number, got '" + s + "'");
  }
  return v;
}

template <typename T, typename Parse>
std::vector<T> parse_list(std::string_view key, std::string_view text, Parse parse) {
  std::vector<T> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto comma = text.find(',', start);
    const auto piece = text.substr(start, comma == std::string_view::npos ? text.size() - start
                                                                          : comma - start);
    out.push_back(parse(key, piece));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

}  // namespace

void apply_config_entry(ExperimentConfig& cfg, std::string_view key_in, std::string_view value) {
  const std::string key = trim(key_in);
  if (key == "experiment") {
    cfg.experiment = parse_experiment(trim(value));
  } else if (key == "seed") {
    cfg.base_seed = parse_count(key, value);
  } else if (key == "reps") {
    cfg.reps = parse_count(key, value);
  } else if (key == "full") {
    // Full-length runs use 100 replications; "full=0" leaves reps alone.
    if (parse_count(key, value) != 0) cfg.reps = 100;
  } else if (key == "out") {
    cfg.output = trim(value);
  } else if (key == "sizes") {
    cfg.sizes = parse_list<std::size_t>(key, value, parse_count);
  } else if (key == "d") {
    cfg.dims = parse_list<std::size_t>(key, value, parse_count);
  } else if (key == "nu") {
    cfg.nus = parse_list<double>(key, value, parse_real);
  } else if (key == "loss") {
    cfg.loss = parse_bregman_kind(trim(value));
  } else if (key == "parallel") {
    cfg.workers = parse_count(key, value);
  } else if (key == "iterations") {
    cfg.iterations = parse_count(key, value);
  } else if (key == "width") {
    cfg.width = parse_count(key, value);
  } else if (key == "kappa") {
    cfg.kappa = parse_real(key, value);
  } else if (key == "lr") {
    cfg.learning_rate = parse_real(key, value);
  } else if (key == "batch") {
    cfg.batch_size = parse_count(key, value);
  } else if (key == "n_test") {
    cfg.n_test = parse_count(key, value);
  } else if (key == "n12") {
    cfg.n12 = parse_count(key, value);
  } else if (key == "grid") {
    cfg.iteration_grid = parse_list<std::size_t>(key, value, parse_count);
  } else if (key == "ratio_iterations") {
    cfg.ratio_iterations = parse_count(key, value);
  } else if (key == "sigma") {
    cfg.flow_sigma = parse_real(key, value);
  } else if (key == "eval_n") {
    cfg.flow_eval_n = parse_count(key, value);
  } else if (key == "ode_steps") {
    cfg.ode.steps = parse_count(key, value);
  } else if (key == "integrator") {
    const std::string v = trim(value);
    if (v == "rk4") {
      cfg.ode.integrator = Integrator::Rk4;
    } else if (v == "euler") {
      cfg.ode.integrator = Integrator::Euler;
    } else {
      throw std::invalid_argument("config: integrator must be rk4 or euler, got '" + v + "'");
    }
  } else if (key == "samples_out") {
    cfg.samples_output = trim(value);
  } else {
    throw std::invalid_argument("config: unknown key '" + key + "'");
  }
}

void load_config_file(ExperimentConfig& cfg, const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot read config file " + path);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    if (trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument(path + ":" + std::to_string(lineno) + ": expected key=value");
    }
    apply_config_entry(cfg, std::string_view(line).substr(0, eq),
                       std::string_view(line).substr(eq + 1));
  }
}

std::uint64_t replication_seed(std::uint64_t base_seed, std::string_view scenario, std::size_t n,
                               std::size_t rep) {
  // FNV-1a over "scenario|n|rep", then a splitmix finaliser.
  const std::string key = std::string(scenario) + "|" + std::to_string(n) + "|" + std::to_string(rep);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : key) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return base_seed ^ mix64(h);
}

RunResult run_replications(std::string_view experiment, const std::vector<ReplicationTask>& tasks,
                           std::size_t workers,
                           const std::function<Metrics(const ReplicationTask&)>& work) {
  std::vector<std::optional<Metrics>> results(tasks.size());
  std::vector<std::string> errors(tasks.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < tasks.size(); i = next++) {
      try {
        results[i] = work(tasks[i]);
      } catch (const std::exception& e) {
        errors[i] = e.what();
      }
    }
  };
  const std::size_t n_threads = std::max<std::size_t>(1, std::min(workers, tasks.size()));
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  RunResult out;
  out.tasks = tasks.size();
  // (scenario, n, metric) -> values in task order
  std::map<std::tuple<std::string, std::size_t, std::string>, std::vector<double>> cells;
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    if (!results[i]) {
      ++out.failures;
      out.failure_messages.push_back(tasks[i].scenario + " n=" + std::to_string(tasks[i].n) +
                                     " rep=" + std::to_string(tasks[i].rep) + ": " + errors[i]);
      continue;
    }
    for (const auto& [metric, value] : *results[i])
      cells[{tasks[i].scenario, tasks[i].n, metric}].push_back(value);
  }
  for (const auto& [key, values] : cells) {
    const auto& [scenario, n, metric] = key;
    SummaryRow row{std::string(experiment), scenario, n, metric, 0.0, 0.0, values.size()};
    if (values.size() >= 2) {
      const Summary s = summary(values);
      row.mean = s.mean;
      row.std = s.std;
    } else {
      row.mean = values.front();
      row.std = 0.0;  // single replication: no spread estimate
    }
    out.rows.push_back(std::move(row));
  }
  return out;
}

namespace {

std::string format_real(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

std::size_t or_default(std::size_t v, std::size_t fallback) { return v == 0 ? fallback : v; }
double or_default(double v, double fallback) { return v == 0.0 ? fallback : v; }

void note_single_rep(const ExperimentConfig& cfg) {
  if (cfg.reps == 1) std::cerr << "note: reps=1, std columns are 0 by convention\n";
}

}  // namespace

RunResult run_dre(const ExperimentConfig& cfg) {
  cfg.validate();
  note_single_rep(cfg);
  std::vector<ReplicationTask> tasks;
  for (std::size_t d : cfg.dims) {
    const std::string scenario = "d=" + std::to_string(d);
    for (std::size_t n : cfg.resolved_sizes())
      for (std::size_t r = 0; r < cfg.reps; ++r)
        tasks.push_back({scenario, n, r, replication_seed(cfg.base_seed, scenario, n, r)});
  }
  return run_replications("dre", tasks, cfg.workers, [&cfg](const ReplicationTask& t) {
    const GammaShiftSpec spec{static_cast<std::size_t>(std::stoul(t.scenario.substr(2)))};
    const RngStream base(t.seed);
    RngStream data_rng = base.child(0);
    const DomainSample sample = gen_gamma_shift(spec, t.n, t.n, data_rng);
    DreConfig dre;
    dre.kind = cfg.loss;
    dre.kappa = cfg.kappa;
    dre.width = cfg.width;
    dre.iterations = or_default(cfg.iterations, default_dre_iterations(spec.d));
    dre.batch_size = or_default(cfg.batch_size, std::size_t{100});
    dre.learning_rate = or_default(cfg.learning_rate, 1e-4);
    dre.seed = base.child(2).seed();
    const MlpModel model = fit_ratio(sample, dre);
    RngStream eval_rng = base.child(1);
    const RatioErrors e = eval_ratio(model, spec, cfg.n_test, eval_rng);
    return Metrics{{"source_mse", e.source_mse}, {"target_mse", e.target_mse}};
  });
}

RunResult run_shift(const ExperimentConfig& cfg) {
  cfg.validate();
  note_single_rep(cfg);
  std::vector<ReplicationTask> tasks;
  std::map<std::string, double> nu_of;
  for (double nu : cfg.nus) {
    const std::string scenario = "nu=" + format_real(nu);
    nu_of[scenario] = nu;
    for (std::size_t n : cfg.resolved_sizes())
      for (std::size_t r = 0; r < cfg.reps; ++r)
        tasks.push_back({scenario, n, r, replication_seed(cfg.base_seed, scenario, n, r)});
  }
  return run_replications("shift", tasks, cfg.workers, [&](const ReplicationTask& t) {
    ShiftConfig sc;
    sc.nu = nu_of.at(t.scenario);
    sc.n11 = t.n;
    sc.n12 = cfg.n12;
    sc.iteration_grid = cfg.iteration_grid;
    sc.learning_rate = or_default(cfg.learning_rate, 1e-3);
    sc.width = cfg.width;
    sc.kappa = cfg.kappa;
    sc.batch_size = or_default(cfg.batch_size, std::size_t{100});
    sc.n_test = cfg.n_test;
    sc.ratio_iterations = cfg.ratio_iterations;
    sc.seed = t.seed;
    const RiskReport r = run_shift_replication(sc);
    return Metrics{{"sers", r.sers}, {"sert", r.sert}, {"edrc", r.edrc}, {"odrc", r.odrc}};
  });
}

namespace {

constexpr double kFlowGrid[] = {-1.0, -0.5, 0.0, 0.5, 1.0};

}  // namespace

RunResult run_flow(const ExperimentConfig& cfg) {
  cfg.validate();
  note_single_rep(cfg);
  const std::string scenario = "gauss_sigma=" + format_real(cfg.flow_sigma);
  const auto sizes = cfg.resolved_sizes();
  std::vector<ReplicationTask> tasks;
  for (std::size_t n : sizes)
    for (std::size_t r = 0; r < cfg.reps; ++r)
      tasks.push_back({scenario, n, r, replication_seed(cfg.base_seed, scenario, n, r)});
  const std::size_t sample_dump_n = sizes.back();

  return run_replications("flow", tasks, cfg.workers, [&](const ReplicationTask& t) {
    const double sigma = cfg.flow_sigma;
    const RngStream base(t.seed);
    RngStream data_rng = base.child(0);
    Matrix X(t.n, 1), Y(t.n, 1);
    for (std::size_t i = 0; i < t.n; ++i) {
      X(i, 0) = -1.0 + 2.0 * data_rng.uniform();
      Y(i, 0) = X(i, 0) + sigma * data_rng.normal();
    }
    FlowTrainConfig fc;
    fc.iterations = or_default(cfg.iterations, std::size_t{5000});
    fc.batch_size = or_default(cfg.batch_size, std::size_t{256});
    fc.learning_rate = or_default(cfg.learning_rate, 1e-3);
    fc.width = cfg.width;
    fc.kappa = cfg.kappa;
    fc.seed = base.child(2).seed();
    const auto interp = InterpolantSpec::linear();
    const FlowModel learned = fit_velocity(X, Y, interp, fc);
    FlowTrainConfig untrained_cfg = fc;
    untrained_cfg.iterations = 0;
    const FlowModel untrained = fit_velocity(X, Y, interp, untrained_cfg);

    RngStream eval_rng = base.child(1);
    const std::size_t m = cfg.flow_eval_n;
    double w_oracle = 0.0, w_learned = 0.0, w_untrained = 0.0, w_prior = 0.0;
    Matrix dump_x, dump_z;
    for (double x : kFlowGrid) {
      std::vector<double> truth(m);
      for (auto& v : truth) v = x + sigma * eval_rng.normal();
      const double xv[] = {x};
      const VelocityField oracle = [&](const Matrix& z, double tau, Matrix& out) {
        out = Matrix(z.rows(), 1);
        for (std::size_t i = 0; i < z.rows(); ++i)
          out(i, 0) = gaussian_velocity_oracle(x, sigma, interp, z(i, 0), tau);
      };
      w_oracle += w2_empirical_1d(sample_ode(oracle, 1, m, cfg.ode, eval_rng).col(0), truth);
      const Matrix z_learned = sample_ode(learned, xv, m, cfg.ode, eval_rng);
      w_learned += w2_empirical_1d(z_learned.col(0), truth);
      w_untrained += w2_empirical_1d(sample_ode(untrained, xv, m, cfg.ode, eval_rng).col(0), truth);
      w_prior += w2_empirical_1d(sample_gaussian(eval_rng, m, 1).col(0), truth);
      if (!cfg.samples_output.empty() && t.rep == 0 && t.n == sample_dump_n) {
        dump_x = dump_x.empty() ? Matrix(m, 1, x) : vstack(dump_x, Matrix(m, 1, x));
        dump_z = dump_z.empty() ? z_learned : vstack(dump_z, z_learned);
      }
    }
    if (!dump_z.empty()) write_samples_csv(cfg.samples_output, dump_x, dump_z);
    const double k = static_cast<double>(std::size(kFlowGrid));
    return Metrics{{"w2_oracle", w_oracle / k},
                   {"w2_learned", w_learned / k},
                   {"w2_untrained", w_untrained / k},
                   {"w2_prior", w_prior / k},
                   {"lip_bound", lipschitz_upper_bound(learned.net.params)}};
  });
}

RunResult run_experiment(const ExperimentConfig& cfg) {
  switch (cfg.experiment) {
    case Experiment::Dre: return run_dre(cfg);
    case Experiment::Shift: return run_shift(cfg);
    case Experiment::Flow: return run_flow(cfg);
  }
  throw std::logic_error("run_experiment: unhandled experiment");
}

std::string format_csv(std::vector<SummaryRow> rows) {
  std::stable_sort(rows.begin(), rows.end(), [](const SummaryRow& a, const SummaryRow& b) {
    return std::tie(a.scenario, a.n, a.metric) < std::tie(b.scenario, b.n, b.metric);
  });
  std::string out = "experiment,scenario,n,metric,mean,std,reps\n";
  char buf[64];
  for (const auto& r : rows) {
    out += r.experiment + ',' + r.scenario + ',' + std::to_string(r.n) + ',' + r.metric + ',';
    std::snprintf(buf, sizeof buf, "%.6g,%.6g,", r.mean, r.std);
    out += buf;
    out += std::to_string(r.reps) + '\n';
  }
  return out;
}

void write_csv(const std::vector<SummaryRow>& rows, const std::string& path) {
  const std::string text = format_csv(rows);
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open " + path + " for writing");
  os.write(text.data(), static_cast<std::streamsize>(text.size()));
  os.close();
  if (!os) throw IoError("write failed for " + path);
}

std::vector<SummaryRow> parse_csv(std::string_view text) {
  std::vector<SummaryRow> rows;
  std::istringstream is{std::string(text)};
  std::string line;
  if (!std::getline(is, line) || line != "experiment,scenario,n,metric,mean,std,reps") {
    throw std::invalid_argument("parse_csv: missing or unexpected header");
  }
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) f.push_back(cell);
    if (f.size() != 7) throw std::invalid_argument("parse_csv: expected 7 fields in '" + line + "'");
    rows.push_back({f[0], f[1], parse_count("n", f[2]), f[3], parse_real("mean", f[4]),
                    parse_real("std", f[5]), parse_count("reps", f[6])});
  }
  return rows;
}

std::vector<SummaryRow> read_csv(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot read " + path);
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_csv(ss.str());
}

}  // namespace udr
