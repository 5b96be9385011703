#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "spdnn/dgp.hpp"
#include "spdnn/optim.hpp"

namespace spdnn {

// Independent per-replication RNG streams. Trajectory simulation uses
// train/valid/test; weight initialization and minibatch order use
// init/shuffle.
enum class StreamTag : std::uint64_t {
  train = 1,
  valid = 2,
  test = 3,
  init = 4,
  shuffle = 5,
};

std::uint64_t replication_seed(std::uint64_t base_seed, int replication,
                               StreamTag tag);

// Tuning grid lambda(i) = 10^-i log(n)/n, tau(j) = 10^-j / log(n) over
// i in {i_min, i_min+i_step, ..., <= i_max} and likewise for j.
struct GridSpec {
  std::size_t n = 0;
  int i_min = 0;
  int i_max = 10;
  int i_step = 1;
  int j_min = 0;
  int j_max = 10;
  int j_step = 1;

  std::vector<int> i_values() const;
  std::vector<int> j_values() const;
  double lambda_of(int i) const;
  double tau_of(int j) const;
  std::size_t size() const;
  void validate() const;
};

struct GridPointResult {
  int i = 0;
  int j = 0;
  double lambda = 0.0;
  double tau = 0.0;
  double valid_score = 0.0;
  bool failed = false;
  std::string error;
};

struct GridSearchResult {
  Network best;
  int best_i = 0;
  int best_j = 0;
  std::vector<GridPointResult> table;

  std::string table_tsv() const;
};

// Trains one network per grid point (identical seeds everywhere, so grid
// points differ only in the penalty), scores each on the validation
// trajectory with the unpenalized loss, and returns the minimizer. Ties
// prefer the sparser point: larger i + j, then larger i, then larger j.
// Diverged points are skipped; only an all-failed grid is an error.
GridSearchResult grid_search(const Trajectory& train_data,
                             const Trajectory& valid_data,
                             const GridSpec& grid, const TrainConfig& cfg,
                             const Architecture& arch, int threads = 1);

using Predictor = std::function<double(std::span<const double>)>;

// Mean squared distance to the true mean function over the test features
// (the generating process is known, so the irreducible noise drops out).
double evaluate_l2(const Predictor& h, const Trajectory& test, DgpKind kind);
double evaluate_l2(const Network& net, const Trajectory& test, DgpKind kind);

// Test MSE against the noisy targets (reported by the --vs-targets mode).
double evaluate_mse(const Network& net, const Trajectory& test);

// Mean hinge loss of h minus that of the hinge-optimal classifier on the
// same test trajectory.
double evaluate_excess_risk(const Predictor& h, const Trajectory& test,
                            DgpKind kind);
double evaluate_excess_risk(const Network& net, const Trajectory& test,
                            DgpKind kind);

struct ExperimentResult {
  DgpKind dgp = DgpKind::dgp1;
  std::size_t n = 0;
  int replication = 0;
  std::string method;  // "SPDNN" or "NPDNN"
  std::optional<std::pair<int, int>> ij;
  double error = 0.0;
  std::size_t sparsity = 0;  // parameters with |theta_j| > 1e-6
  std::uint64_t seed = 0;    // train-stream seed of the replication
};

struct ReplicateOptions {
  GridSpec grid;      // n is set by replicate
  TrainConfig cfg;    // loss and seeds are set per replication
  Architecture arch = {.input_dim = 1, .hidden_widths = {100, 100}};
  std::size_t test_size = 10000;
  SimOptions sim;
  int threads = 1;
  double max_failure_fraction = 0.10;
  // Regression scoring: distance to the true mean function by default,
  // test MSE against the noisy targets when set.
  bool vs_targets = false;
};

// For each replication: simulate independent train/validation/test
// trajectories, run the grid search (SPDNN) and a lambda = 0 run (NPDNN)
// under the same seeds, evaluate both on the test trajectory, and emit
// two records. Failed replications are skipped unless more than
// max_failure_fraction of them fail.
std::vector<ExperimentResult> replicate(DgpKind kind, std::size_t n, int reps,
                                        std::uint64_t base_seed,
                                        const ReplicateOptions& options = {});

// Delimited results table, columns exactly:
// dgp, n, replication, method, i, j, error, sparsity, seed.
std::string results_table(const std::vector<ExperimentResult>& results);
std::vector<ExperimentResult> parse_results_table(std::istream& in);

struct SummaryRow {
  DgpKind dgp = DgpKind::dgp1;
  std::size_t n = 0;
  std::string method;
  std::size_t count = 0;
  double min = 0, q1 = 0, median = 0, q3 = 0, max = 0;
  double whisker_lo = 0, whisker_hi = 0;
};

// Linear-interpolation quantile of a sorted sample.
double quantile_linear(std::span<const double> sorted, double p);

struct BoxStats {
  double min = 0, q1 = 0, median = 0, q3 = 0, max = 0;
  double whisker_lo = 0, whisker_hi = 0;  // data extremes within 1.5 IQR
  std::vector<double> outliers;
};

BoxStats box_stats(std::vector<double> values);

std::vector<SummaryRow> summarize(const std::vector<ExperimentResult>& results);
std::string summary_table(const std::vector<SummaryRow>& rows);

// Writes results.tsv, summary.tsv and one boxplot_<dgp>.svg per process
// present, grouped by n and method.
void report(const std::vector<ExperimentResult>& results,
            const std::string& out_dir);

// Static SVG boxplot for the rows of one process. Whisker/box extents are
// the summary values; points beyond the whiskers are drawn individually.
std::string render_boxplot_svg(DgpKind dgp,
                               const std::vector<SummaryRow>& rows,
                               const std::vector<ExperimentResult>& results);

// Runs fn(0..count-1) on up to `threads` workers; exceptions propagate.
void parallel_for(std::size_t count, int threads,
                  const std::function<void(std::size_t)>& fn);

}  // namespace spdnn
