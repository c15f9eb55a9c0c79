#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "udr/bregman.hpp"
#include "udr/flow.hpp"

namespace udr {

enum class Experiment { Dre, Shift, Flow };

std::string_view to_string(Experiment e);
Experiment parse_experiment(std::string_view name);

/// Everything that determines a run. Zero-valued overrides fall back to the
/// module defaults for the experiment.
struct ExperimentConfig {
  Experiment experiment = Experiment::Dre;
  std::vector<std::size_t> dims{1};  // dre: covariate dimensions
  std::vector<double> nus{0.1};      // shift: noise levels
  std::vector<std::size_t> sizes;    // empty: experiment default
  std::size_t reps = 20;
  std::uint64_t base_seed = 20240601;
  std::string output;
  BregmanKind loss = BregmanKind::LeastSquares;
  std::size_t workers = 1;

  std::size_t iterations = 0;  // dre: by d; flow: 5000
  std::size_t width = 64;
  double kappa = 0.5;
  double learning_rate = 0.0;  // dre 1e-4, shift 1e-3, flow 1e-3
  std::size_t batch_size = 0;  // dre/shift 100, flow 256
  std::size_t n_test = 1000;
  std::size_t n12 = 500;
  std::vector<std::size_t> iteration_grid{1000, 2000, 3000, 4000, 5000};
  std::size_t ratio_iterations = 5000;
  double flow_sigma = 0.5;
  std::size_t flow_eval_n = 2000;
  OdeConfig ode;
  std::string samples_output;

  /// Sizes actually used (the explicit list or the experiment default).
  std::vector<std::size_t> resolved_sizes() const;
  void validate() const;
};

/// Applies one `key=value` setting (the long flag names without dashes).
/// Throws std::invalid_argument on an unknown key or malformed value.
void apply_config_entry(ExperimentConfig& cfg, std::string_view key, std::string_view value);

/// Reads a flat key=value file; blank lines and `#` comments are skipped.
void load_config_file(ExperimentConfig& cfg, const std::string& path);

struct SummaryRow {
  std::string experiment;
  std::string scenario;
  std::size_t n = 0;
  std::string metric;
  double mean = 0.0;
  double std = 0.0;
  std::size_t reps = 0;

  friend bool operator==(const SummaryRow&, const SummaryRow&) = default;
};

struct RunResult {
  std::vector<SummaryRow> rows;
  std::size_t tasks = 0;
  std::size_t failures = 0;
  std::vector<std::string> failure_messages;

  /// More than 10% of replications failed.
  bool partial_failure() const { return failures * 10 > tasks; }
};

/// Seed for one replication: base_seed xor hash(scenario, n, rep).
std::uint64_t replication_seed(std::uint64_t base_seed, std::string_view scenario, std::size_t n,
                               std::size_t rep);

using Metrics = std::vector<std::pair<std::string, double>>;

/// One replication task of a cell.
struct ReplicationTask {
  std::string scenario;
  std::size_t n = 0;
  std::size_t rep = 0;
  std::uint64_t seed = 0;
};

/// Runs `work` for every task on `workers` threads, then folds the metrics
/// per (scenario, n, metric) in replication order. A throwing task is
/// recorded as a failure and left out of the aggregates.
RunResult run_replications(std::string_view experiment, const std::vector<ReplicationTask>& tasks,
                           std::size_t workers,
                           const std::function<Metrics(const ReplicationTask&)>& work);

/// Ratio-estimation experiment: per (d, n), train a ratio model on n source and n target
/// draws and report source_mse / target_mse on fresh test draws.
RunResult run_dre(const ExperimentConfig& cfg);

/// Covariate-shift experiment: per (nu, n11), the sers / sert / edrc / odrc risks.
RunResult run_shift(const ExperimentConfig& cfg);

/// Gaussian toy: x ~ U(-1, 1), Y | x ~ N(x, sigma^2). Per training size,
/// W2 averaged over x in {-1, -0.5, 0, 0.5, 1} for the exact-velocity flow
/// (w2_oracle), the trained flow (w2_learned), the initial network
/// (w2_untrained) and the zero-velocity flow (w2_prior), plus the network's
/// Lipschitz upper bound (lip_bound).
RunResult run_flow(const ExperimentConfig& cfg);

RunResult run_experiment(const ExperimentConfig& cfg);

/// Header `experiment,scenario,n,metric,mean,std,reps`; rows sorted by
/// (scenario, n, metric); values with 6 significant digits; LF endings.
std::string format_csv(std::vector<SummaryRow> rows);
void write_csv(const std::vector<SummaryRow>& rows, const std::string& path);
std::vector<SummaryRow> parse_csv(std::string_view text);
std::vector<SummaryRow> read_csv(const std::string& path);

/// Raised for unreadable or unwritable files; carries the path.
class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace udr
