#include "spdnn/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <istream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "spdnn/penalty.hpp"
#include "spdnn/rng.hpp"

namespace spdnn {

namespace {

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double hinge(double z) { return z < 1.0 ? 1.0 - z : 0.0; }

void check_test_trajectory(const Trajectory& test, DgpKind kind,
                           const char* where) {
  if (test.kind != kind) {
    throw std::invalid_argument(std::string(where) +
                                ": trajectory kind does not match");
  }
  if (test.feature_dim != feature_dim(kind)) {
    throw std::invalid_argument(
        std::string(where) +
        ": the true mean function needs full-lag features (expected " +
        std::to_string(feature_dim(kind)) + " per row, got " +
        std::to_string(test.feature_dim) + ")");
  }
  if (test.size() == 0) {
    throw std::invalid_argument(std::string(where) + ": empty trajectory");
  }
}

}  // namespace

std::uint64_t replication_seed(std::uint64_t base_seed, int replication,
                               StreamTag tag) {
  return hash64(base_seed, static_cast<std::uint64_t>(replication),
                static_cast<std::uint64_t>(tag));
}

std::vector<int> GridSpec::i_values() const {
  std::vector<int> values;
  for (int i = i_min; i <= i_max; i += i_step) values.push_back(i);
  return values;
}

std::vector<int> GridSpec::j_values() const {
  std::vector<int> values;
  for (int j = j_min; j <= j_max; j += j_step) values.push_back(j);
  return values;
}

double GridSpec::lambda_of(int i) const {
  return std::pow(10.0, -i) * std::log(static_cast<double>(n)) /
         static_cast<double>(n);
}

double GridSpec::tau_of(int j) const {
  return std::pow(10.0, -j) / std::log(static_cast<double>(n));
}

std::size_t GridSpec::size() const {
  return i_values().size() * j_values().size();
}

void GridSpec::validate() const {
  if (n < 2) throw std::invalid_argument("grid: n must be >= 2");
  if (i_step < 1 || j_step < 1) {
    throw std::invalid_argument("grid: steps must be >= 1");
  }
  if (i_min > i_max || j_min > j_max) {
    throw std::invalid_argument("grid: empty index range");
  }
  if (i_min < 0 || j_min < 0) {
    throw std::invalid_argument("grid: indices must be >= 0");
  }
}

std::string GridSearchResult::table_tsv() const {
  std::ostringstream out;
  out << "i\tj\tlambda\ttau\tvalid_score\tstatus\n";
  for (const auto& p : table) {
    out << p.i << '\t' << p.j << '\t' << fmt17(p.lambda) << '\t'
        << fmt17(p.tau) << '\t';
    if (p.failed) {
      out << "NA\tfailed: " << p.error << '\n';
    } else {
      out << fmt17(p.valid_score) << "\tok\n";
    }
  }
  return out.str();
}

GridSearchResult grid_search(const Trajectory& train_data,
                             const Trajectory& valid_data,
                             const GridSpec& grid, const TrainConfig& cfg,
                             const Architecture& arch, int threads) {
  grid.validate();
  if (train_data.kind != valid_data.kind ||
      train_data.feature_dim != valid_data.feature_dim) {
    throw std::invalid_argument(
        "grid_search: train and validation trajectories disagree");
  }
  const auto is = grid.i_values();
  const auto js = grid.j_values();
  const std::size_t count = is.size() * js.size();

  std::vector<GridPointResult> table(count);
  std::vector<std::optional<Network>> nets(count);

  parallel_for(count, threads, [&](std::size_t idx) {
    const int i = is[idx / js.size()];
    const int j = js[idx % js.size()];
    GridPointResult& point = table[idx];
    point.i = i;
    point.j = j;
    point.lambda = grid.lambda_of(i);
    point.tau = grid.tau_of(j);
    TrainConfig point_cfg = cfg;
    point_cfg.penalty = PenaltyParams{point.lambda, point.tau};
    try {
      auto result = train(train_data.view(), point_cfg, arch);
      point.valid_score =
          mean_loss(result.network, valid_data.view(), cfg.loss);
      nets[idx] = std::move(result.network);
    } catch (const std::exception& e) {
      point.failed = true;
      point.error = e.what();
      std::fprintf(stderr, "warning: grid point (i=%d, j=%d) skipped: %s\n",
                   i, j, e.what());
    }
  });

  std::size_t best_idx = count;
  for (std::size_t idx = 0; idx < count; ++idx) {
    if (table[idx].failed) continue;
    if (best_idx == count) {
      best_idx = idx;
      continue;
    }
    const auto& cur = table[idx];
    const auto& best = table[best_idx];
    if (cur.valid_score < best.valid_score) {
      best_idx = idx;
    } else if (cur.valid_score == best.valid_score) {
      // Tie: prefer the sparser point.
      const auto rank = [](const GridPointResult& p) {
        return std::tuple(p.i + p.j, p.i, p.j);
      };
      if (rank(cur) > rank(best)) best_idx = idx;
    }
  }
  if (best_idx == count) {
    std::string first;
    for (const auto& p : table) {
      if (p.failed) {
        first = p.error;
        break;
      }
    }
    throw std::runtime_error("grid_search: all grid points failed: " + first);
  }

  GridSearchResult result{std::move(*nets[best_idx]), table[best_idx].i,
                          table[best_idx].j, std::move(table)};
  return result;
}

double evaluate_l2(const Predictor& h, const Trajectory& test, DgpKind kind) {
  check_test_trajectory(test, kind, "evaluate_l2");
  double total = 0.0;
  for (std::size_t t = 0; t < test.size(); ++t) {
    const auto x = test.row(t);
    const double diff = h(x) - mean_function(kind, x);
    total += diff * diff;
  }
  return total / static_cast<double>(test.size());
}

double evaluate_l2(const Network& net, const Trajectory& test, DgpKind kind) {
  return evaluate_l2(
      [&net](std::span<const double> x) { return net.forward(x); }, test,
      kind);
}

double evaluate_mse(const Network& net, const Trajectory& test) {
  if (test.size() == 0) {
    throw std::invalid_argument("evaluate_mse: empty trajectory");
  }
  double total = 0.0;
  for (std::size_t t = 0; t < test.size(); ++t) {
    const double diff = net.forward(test.row(t)) - test.targets[t];
    total += diff * diff;
  }
  return total / static_cast<double>(test.size());
}

double evaluate_excess_risk(const Predictor& h, const Trajectory& test,
                            DgpKind kind) {
  if (task_of(kind) != TaskKind::binary) {
    throw std::invalid_argument(
        "evaluate_excess_risk: needs a classification process");
  }
  check_test_trajectory(test, kind, "evaluate_excess_risk");
  double total = 0.0;
  for (std::size_t t = 0; t < test.size(); ++t) {
    const auto x = test.row(t);
    const double y = test.targets[t];
    if (y != 1.0 && y != -1.0) {
      throw std::invalid_argument(
          "evaluate_excess_risk: labels must be -1 or +1");
    }
    const double bayes = static_cast<double>(bayes_classifier(kind, x));
    total += hinge(y * h(x)) - hinge(y * bayes);
  }
  return total / static_cast<double>(test.size());
}

double evaluate_excess_risk(const Network& net, const Trajectory& test,
                            DgpKind kind) {
  return evaluate_excess_risk(
      [&net](std::span<const double> x) { return net.forward(x); }, test,
      kind);
}

std::vector<ExperimentResult> replicate(DgpKind kind, std::size_t n, int reps,
                                        std::uint64_t base_seed,
                                        const ReplicateOptions& options) {
  if (reps < 1) throw std::invalid_argument("replicate: reps must be >= 1");
  const TaskKind task = task_of(kind);
  const int lags = options.sim.feature_lags > 0 ? options.sim.feature_lags
                                                : lag_order(kind);

  if (lags != lag_order(kind) &&
      !(task == TaskKind::regression && options.vs_targets)) {
    throw std::invalid_argument(
        "replicate: scoring against the true mean function needs the full "
        "lag order; use vs_targets for reduced-lag regression runs");
  }

  GridSpec grid = options.grid;
  grid.n = n;
  grid.validate();
  Architecture arch = options.arch;
  arch.input_dim = lags + 1;
  arch.validate();
  TrainConfig base_cfg = options.cfg;
  base_cfg.loss = task == TaskKind::regression ? Loss::square : Loss::hinge;

  struct Slot {
    std::optional<ExperimentResult> spdnn;
    std::optional<ExperimentResult> npdnn;
    std::string error;
  };
  std::vector<Slot> slots(static_cast<std::size_t>(reps));

  parallel_for(static_cast<std::size_t>(reps), options.threads,
               [&](std::size_t idx) {
    const int r = static_cast<int>(idx) + 1;
    Slot& slot = slots[idx];
    try {
      const auto s_train = replication_seed(base_seed, r, StreamTag::train);
      const auto s_valid = replication_seed(base_seed, r, StreamTag::valid);
      const auto s_test = replication_seed(base_seed, r, StreamTag::test);
      const auto train_traj = simulate(kind, n, s_train, options.sim);
      const auto valid_traj = simulate(kind, n, s_valid, options.sim);
      const auto test_traj =
          simulate(kind, options.test_size, s_test, options.sim);

      TrainConfig cfg = base_cfg;
      cfg.seed = replication_seed(base_seed, r, StreamTag::init);
      cfg.shuffle_seed = replication_seed(base_seed, r, StreamTag::shuffle);

      const auto evaluate = [&](const Network& net) {
        if (task != TaskKind::regression) {
          return evaluate_excess_risk(net, test_traj, kind);
        }
        return options.vs_targets ? evaluate_mse(net, test_traj)
                                  : evaluate_l2(net, test_traj, kind);
      };

      auto gs = grid_search(train_traj, valid_traj, grid, cfg, arch);
      ExperimentResult sp;
      sp.dgp = kind;
      sp.n = n;
      sp.replication = r;
      sp.method = "SPDNN";
      sp.ij = std::pair{gs.best_i, gs.best_j};
      sp.error = evaluate(gs.best);
      sp.sparsity = l0_norm(gs.best.params(), kEffectiveSparsityTol);
      sp.seed = s_train;
      slot.spdnn = std::move(sp);

      TrainConfig np_cfg = cfg;
      np_cfg.penalty = PenaltyParams{0.0, 1.0};
      auto np = train(train_traj.view(), np_cfg, arch);
      ExperimentResult npr;
      npr.dgp = kind;
      npr.n = n;
      npr.replication = r;
      npr.method = "NPDNN";
      npr.error = evaluate(np.network);
      npr.sparsity = l0_norm(np.network.params(), kEffectiveSparsityTol);
      npr.seed = s_train;
      slot.npdnn = std::move(npr);
    } catch (const std::exception& e) {
      slot.spdnn.reset();
      slot.npdnn.reset();
      slot.error = e.what();
    }
  });

  std::vector<ExperimentResult> results;
  results.reserve(2 * static_cast<std::size_t>(reps));
  int failures = 0;
  std::string first_error;
  for (const auto& slot : slots) {
    if (slot.spdnn && slot.npdnn) {
      results.push_back(*slot.spdnn);
      results.push_back(*slot.npdnn);
    } else {
      ++failures;
      if (first_error.empty()) first_error = slot.error;
    }
  }
  if (failures > options.max_failure_fraction * reps) {
    throw std::runtime_error(
        "replicate: " + std::to_string(failures) + "/" +
        std::to_string(reps) + " replications failed; first error: " +
        first_error);
  }
  return results;
}

std::string results_table(const std::vector<ExperimentResult>& results) {
  std::ostringstream out;
  out << "dgp\tn\treplication\tmethod\ti\tj\terror\tsparsity\tseed\n";
  for (const auto& rec : results) {
    out << to_string(rec.dgp) << '\t' << rec.n << '\t' << rec.replication
        << '\t' << rec.method << '\t';
    if (rec.ij) {
      out << rec.ij->first << '\t' << rec.ij->second << '\t';
    } else {
      out << "NA\tNA\t";
    }
    out << fmt17(rec.error) << '\t' << rec.sparsity << '\t' << rec.seed
        << '\n';
  }
  return out.str();
}

std::vector<ExperimentResult> parse_results_table(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) ||
      line != "dgp\tn\treplication\tmethod\ti\tj\terror\tsparsity\tseed") {
    throw std::runtime_error("parse_results_table: bad header");
  }
  std::vector<ExperimentResult> results;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    ExperimentResult rec;
    std::string dgp, i_text, j_text;
    row >> dgp >> rec.n >> rec.replication >> rec.method >> i_text >> j_text >>
        rec.error >> rec.sparsity >> rec.seed;
    if (!row) throw std::runtime_error("parse_results_table: short row");
    rec.dgp = dgp_from_string(dgp);
    if (i_text != "NA") rec.ij = std::pair{std::stoi(i_text), std::stoi(j_text)};
    results.push_back(std::move(rec));
  }
  return results;
}

double quantile_linear(std::span<const double> sorted, double p) {
  if (sorted.empty()) {
    throw std::invalid_argument("quantile_linear: empty sample");
  }
  if (p <= 0.0) return sorted.front();
  if (p >= 1.0) return sorted.back();
  const double pos = p * static_cast<double>(sorted.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(pos);
  const double frac = pos - static_cast<double>(lo);
  if (lo + 1 >= sorted.size()) return sorted.back();
  return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

BoxStats box_stats(std::vector<double> values) {
  if (values.empty()) throw std::invalid_argument("box_stats: empty sample");
  std::sort(values.begin(), values.end());
  BoxStats stats;
  stats.min = values.front();
  stats.max = values.back();
  stats.q1 = quantile_linear(values, 0.25);
  stats.median = quantile_linear(values, 0.5);
  stats.q3 = quantile_linear(values, 0.75);
  const double iqr = stats.q3 - stats.q1;
  const double lo_fence = stats.q1 - 1.5 * iqr;
  const double hi_fence = stats.q3 + 1.5 * iqr;
  stats.whisker_lo = stats.max;
  stats.whisker_hi = stats.min;
  for (double v : values) {
    if (v >= lo_fence && v < stats.whisker_lo) stats.whisker_lo = v;
    if (v <= hi_fence && v > stats.whisker_hi) stats.whisker_hi = v;
    if (v < lo_fence || v > hi_fence) stats.outliers.push_back(v);
  }
  return stats;
}

namespace {

struct GroupKey {
  DgpKind dgp;
  std::size_t n;
  std::string method;

  bool operator<(const GroupKey& other) const {
    if (dgp != other.dgp) return static_cast<int>(dgp) < static_cast<int>(other.dgp);
    if (n != other.n) return n < other.n;
    // SPDNN before NPDNN inside a group.
    return (method == "SPDNN" ? 0 : 1) < (other.method == "SPDNN" ? 0 : 1);
  }
  bool operator==(const GroupKey& other) const {
    return dgp == other.dgp && n == other.n && method == other.method;
  }
};

std::vector<std::pair<GroupKey, std::vector<double>>> collect_groups(
    const std::vector<ExperimentResult>& results) {
  std::vector<std::pair<GroupKey, std::vector<double>>> groups;
  for (const auto& rec : results) {
    const GroupKey key{rec.dgp, rec.n, rec.method};
    auto it = std::find_if(groups.begin(), groups.end(),
                           [&](const auto& g) { return g.first == key; });
    if (it == groups.end()) {
      groups.push_back({key, {rec.error}});
    } else {
      it->second.push_back(rec.error);
    }
  }
  std::sort(groups.begin(), groups.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  return groups;
}

}  // namespace

std::vector<SummaryRow> summarize(const std::vector<ExperimentResult>& results) {
  std::vector<SummaryRow> rows;
  for (auto& [key, values] : collect_groups(results)) {
    const BoxStats stats = box_stats(values);
    SummaryRow row;
    row.dgp = key.dgp;
    row.n = key.n;
    row.method = key.method;
    row.count = values.size();
    row.min = stats.min;
    row.q1 = stats.q1;
    row.median = stats.median;
    row.q3 = stats.q3;
    row.max = stats.max;
    row.whisker_lo = stats.whisker_lo;
    row.whisker_hi = stats.whisker_hi;
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string summary_table(const std::vector<SummaryRow>& rows) {
  std::ostringstream out;
  out << "dgp\tn\tmethod\tcount\tmin\tq1\tmedian\tq3\tmax\twhisker_lo\t"
         "whisker_hi\n";
  for (const auto& row : rows) {
    out << to_string(row.dgp) << '\t' << row.n << '\t' << row.method << '\t'
        << row.count << '\t' << fmt17(row.min) << '\t' << fmt17(row.q1) << '\t'
        << fmt17(row.median) << '\t' << fmt17(row.q3) << '\t'
        << fmt17(row.max) << '\t' << fmt17(row.whisker_lo) << '\t'
        << fmt17(row.whisker_hi) << '\n';
  }
  return out.str();
}

void parallel_for(std::size_t count, int threads,
                  const std::function<void(std::size_t)>& fn) {
  if (count == 0) return;
  const std::size_t workers = std::min<std::size_t>(
      count, static_cast<std::size_t>(std::max(threads, 1)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (;;) {
          const std::size_t i = next.fetch_add(1);
          if (i >= count) break;
          fn(i);
        }
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace spdnn
