#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <vector>

#include "doctest.h"
#include "spdnn/harness.hpp"
#include "spdnn/rng.hpp"

using namespace spdnn;

namespace {

TrainConfig small_cfg(std::uint64_t base_seed, int replication = 1) {
  TrainConfig cfg;
  cfg.seed = replication_seed(base_seed, replication, StreamTag::init);
  cfg.shuffle_seed = replication_seed(base_seed, replication, StreamTag::shuffle);
  cfg.max_epochs = 30;
  cfg.patience = 8;
  return cfg;
}

ReplicateOptions small_options() {
  ReplicateOptions options;
  options.grid.i_min = 0;
  options.grid.i_max = 5;
  options.grid.i_step = 5;
  options.grid.j_min = 0;
  options.grid.j_max = 5;
  options.grid.j_step = 5;
  options.arch.hidden_widths = {8};
  options.cfg.max_epochs = 30;
  options.cfg.patience = 8;
  options.test_size = 400;
  options.threads = 2;
  return options;
}

}  // namespace

TEST_CASE("grid formulas and validation") {
  GridSpec grid;
  grid.n = 1000;
  CHECK(grid.lambda_of(0) == std::log(1000.0) / 1000.0);
  CHECK(grid.lambda_of(0) == doctest::Approx(6.9077552789821368e-3).epsilon(1e-14));
  CHECK(grid.lambda_of(2) == doctest::Approx(6.9077552789821370e-5).epsilon(1e-12));
  CHECK(grid.tau_of(0) == 1.0 / std::log(1000.0));
  CHECK(grid.tau_of(3) == doctest::Approx(1e-3 / std::log(1000.0)).epsilon(1e-12));
  CHECK(grid.i_values().size() == 11);
  CHECK(grid.size() == 121);

  grid.i_min = 0;
  grid.i_max = 6;
  grid.i_step = 2;
  CHECK(grid.i_values() == std::vector<int>{0, 2, 4, 6});

  GridSpec bad;
  bad.n = 1;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad.n = 100;
  bad.i_step = 0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("replication stream seeds are distinct and stable") {
  const auto s1 = replication_seed(1, 1, StreamTag::train);
  CHECK(s1 == replication_seed(1, 1, StreamTag::train));
  CHECK(s1 != replication_seed(1, 1, StreamTag::valid));
  CHECK(s1 != replication_seed(1, 2, StreamTag::train));
  CHECK(s1 != replication_seed(2, 1, StreamTag::train));
}

TEST_CASE("evaluate_l2 oracle cases") {
  const auto test = simulate(DgpKind::dgp1, 800, 5);
  const Predictor truth = [](std::span<const double> x) {
    return mean_function(DgpKind::dgp1, x);
  };
  CHECK(evaluate_l2(truth, test, DgpKind::dgp1) == 0.0);

  // Zero predictor: mean of f^2, recomputed directly.
  const Predictor zero = [](std::span<const double>) { return 0.0; };
  double expected = 0.0;
  for (std::size_t t = 0; t < test.size(); ++t) {
    const double f = mean_function(DgpKind::dgp1, test.row(t));
    expected += f * f;
  }
  expected /= static_cast<double>(test.size());
  CHECK(evaluate_l2(zero, test, DgpKind::dgp1) ==
        doctest::Approx(expected).epsilon(1e-15));

  // The error uses features only, so noisy targets do not enter.
  Trajectory renoised = test;
  for (double& y : renoised.targets) y += 17.5;
  CHECK(evaluate_l2(zero, renoised, DgpKind::dgp1) ==
        evaluate_l2(zero, test, DgpKind::dgp1));

  CHECK_THROWS_AS(evaluate_l2(zero, test, DgpKind::dgp2), std::invalid_argument);
  SimOptions reduced;
  reduced.feature_lags = 1;
  const auto short_rows = simulate(DgpKind::dgp1, 50, 5, reduced);
  CHECK_THROWS_AS(evaluate_l2(zero, short_rows, DgpKind::dgp1),
                  std::invalid_argument);
}

TEST_CASE("evaluate_excess_risk oracle cases") {
  const auto test = simulate(DgpKind::dgp3, 1000, 9);
  const Predictor bayes = [](std::span<const double> x) {
    return static_cast<double>(bayes_classifier(DgpKind::dgp3, x));
  };
  CHECK(evaluate_excess_risk(bayes, test, DgpKind::dgp3) == 0.0);

  // Zero predictor: hinge(0) = 1 against the optimal classifier's loss.
  const Predictor zero = [](std::span<const double>) { return 0.0; };
  double expected = 0.0;
  double bayes_loss = 0.0;
  for (std::size_t t = 0; t < test.size(); ++t) {
    const double h_star =
        static_cast<double>(bayes_classifier(DgpKind::dgp3, test.row(t)));
    const double loss_star = std::max(1.0 - test.targets[t] * h_star, 0.0);
    expected += 1.0 - loss_star;
    bayes_loss += loss_star;
  }
  expected /= static_cast<double>(test.size());
  bayes_loss /= static_cast<double>(test.size());
  CHECK(evaluate_excess_risk(zero, test, DgpKind::dgp3) ==
        doctest::Approx(expected).epsilon(1e-12));

  // Any predictor stays above the negative mean optimal loss.
  Rng rng(4);
  for (int trial = 0; trial < 5; ++trial) {
    const double a = rng.uniform(-2.0, 2.0), b = rng.uniform(-1.0, 1.0);
    const Predictor lin = [a, b](std::span<const double> x) {
      return a * x[0] + b;
    };
    CHECK(evaluate_excess_risk(lin, test, DgpKind::dgp3) >= -bayes_loss - 1e-15);
  }

  CHECK_THROWS_AS(evaluate_excess_risk(zero, test, DgpKind::dgp1),
                  std::invalid_argument);
}

TEST_CASE("grid search selects the validation argmin with sparse tie-break") {
  const auto train_traj = simulate(DgpKind::dgp2, 100, 31);
  const auto valid_traj = simulate(DgpKind::dgp2, 100, 32);
  GridSpec grid;
  grid.n = 100;
  grid.i_min = 0;
  grid.i_max = 6;
  grid.i_step = 3;
  grid.j_min = 0;
  grid.j_max = 4;
  grid.j_step = 2;
  const Architecture arch{.input_dim = 2, .hidden_widths = {6}};
  const auto result =
      grid_search(train_traj, valid_traj, grid, small_cfg(7), arch, 2);

  REQUIRE(result.table.size() == grid.size());
  // Independent argmin with the documented tie rule.
  const GridPointResult* best = nullptr;
  for (const auto& p : result.table) {
    REQUIRE_FALSE(p.failed);
    if (best == nullptr || p.valid_score < best->valid_score ||
        (p.valid_score == best->valid_score &&
         std::tuple(p.i + p.j, p.i, p.j) >
             std::tuple(best->i + best->j, best->i, best->j))) {
      best = &p;
    }
  }
  CHECK(result.best_i == best->i);
  CHECK(result.best_j == best->j);

  // Chosen point lies inside the declared grid.
  const auto is = grid.i_values();
  const auto js = grid.j_values();
  CHECK(std::find(is.begin(), is.end(), result.best_i) != is.end());
  CHECK(std::find(js.begin(), js.end(), result.best_j) != js.end());

  // Determinism, including across thread counts.
  const auto again =
      grid_search(train_traj, valid_traj, grid, small_cfg(7), arch, 1);
  CHECK(again.best_i == result.best_i);
  CHECK(again.best_j == result.best_j);
  CHECK(network_to_string(again.best) == network_to_string(result.best));
  CHECK(again.table_tsv() == result.table_tsv());
}

TEST_CASE("single-point grid returns that point") {
  const auto train_traj = simulate(DgpKind::dgp3, 80, 3);
  const auto valid_traj = simulate(DgpKind::dgp3, 80, 4);
  GridSpec grid;
  grid.n = 80;
  grid.i_min = grid.i_max = 2;
  grid.j_min = grid.j_max = 1;
  TrainConfig cfg = small_cfg(5);
  cfg.loss = Loss::hinge;
  const Architecture arch{.input_dim = 2, .hidden_widths = {4}};
  const auto result = grid_search(train_traj, valid_traj, grid, cfg, arch);
  CHECK(result.best_i == 2);
  CHECK(result.best_j == 1);
  CHECK(result.table.size() == 1);
}

TEST_CASE("grid search trains every point from identical seeds") {
  const auto train_traj = simulate(DgpKind::dgp2, 90, 55);
  const auto valid_traj = simulate(DgpKind::dgp2, 90, 56);
  GridSpec grid;
  grid.n = 90;
  grid.i_min = 0;
  grid.i_max = 10;
  grid.i_step = 10;
  grid.j_min = grid.j_max = 0;
  const TrainConfig cfg = small_cfg(21);
  const Architecture arch{.input_dim = 2, .hidden_widths = {5}};
  const auto gs = grid_search(train_traj, valid_traj, grid, cfg, arch);

  // Reproduce each grid point directly with the shared code path.
  for (const auto& p : gs.table) {
    TrainConfig point_cfg = cfg;
    point_cfg.penalty = PenaltyParams{p.lambda, p.tau};
    const auto direct = train(train_traj.view(), point_cfg, arch);
    CHECK(mean_loss(direct.network, valid_traj.view(), cfg.loss) ==
          p.valid_score);
  }
}

TEST_CASE("NPDNN path is byte-identical to a zero-lambda grid-style run") {
  const auto train_traj = simulate(DgpKind::dgp2, 120, 71);
  const TrainConfig base = small_cfg(13);
  const Architecture arch{.input_dim = 2, .hidden_widths = {8}};

  TrainConfig as_grid_point = base;
  as_grid_point.penalty = PenaltyParams{0.0, 0.05};  // tau from some grid cell
  TrainConfig as_npdnn = base;
  as_npdnn.penalty = PenaltyParams{0.0, 1.0};

  const auto a = train(train_traj.view(), as_grid_point, arch);
  const auto b = train(train_traj.view(), as_npdnn, arch);
  CHECK(network_to_string(a.network) == network_to_string(b.network));
  CHECK(a.history.to_table() == b.history.to_table());
}

TEST_CASE("replicate emits two records per replication, deterministically") {
  const auto options = small_options();
  const auto results = replicate(DgpKind::dgp2, 80, 1, 99, options);
  REQUIRE(results.size() == 2);
  CHECK(results[0].method == "SPDNN");
  CHECK(results[1].method == "NPDNN");
  CHECK(results[0].ij.has_value());
  CHECK_FALSE(results[1].ij.has_value());
  CHECK(results[0].replication == 1);
  CHECK(results[0].error >= 0.0);
  CHECK(results[1].error >= 0.0);
  CHECK(results[0].seed == replication_seed(99, 1, StreamTag::train));

  const auto rerun = replicate(DgpKind::dgp2, 80, 1, 99, options);
  CHECK(results_table(rerun) == results_table(results));

  // Thread count does not affect the table.
  auto serial = options;
  serial.threads = 1;
  CHECK(results_table(replicate(DgpKind::dgp2, 80, 2, 42, serial)) ==
        results_table(replicate(DgpKind::dgp2, 80, 2, 42, options)));
}

TEST_CASE("replicate rejects reduced lags unless scoring against targets") {
  auto options = small_options();
  options.sim.feature_lags = 1;  // dgp1 uses 3 own lags
  CHECK_THROWS_AS(replicate(DgpKind::dgp1, 60, 1, 3, options),
                  std::invalid_argument);
  options.vs_targets = true;
  options.cfg.max_epochs = 5;
  const auto results = replicate(DgpKind::dgp1, 60, 1, 3, options);
  CHECK(results.size() == 2);
}

TEST_CASE("results table round-trips through the parser") {
  const auto results = replicate(DgpKind::dgp3, 80, 2, 7, small_options());
  const std::string table = results_table(results);
  CHECK(table.rfind("dgp\tn\treplication\tmethod\ti\tj\terror\tsparsity\tseed\n",
                    0) == 0);
  std::istringstream in(table);
  const auto parsed = parse_results_table(in);
  CHECK(results_table(parsed) == table);

  std::istringstream bad("wrong header\n");
  CHECK_THROWS_AS(parse_results_table(bad), std::runtime_error);
}

TEST_CASE("quantiles use linear interpolation") {
  const std::vector<double> five{1, 2, 3, 4, 5};
  CHECK(quantile_linear(five, 0.25) == 2.0);
  CHECK(quantile_linear(five, 0.5) == 3.0);
  CHECK(quantile_linear(five, 0.75) == 4.0);
  CHECK(quantile_linear(five, 0.0) == 1.0);
  CHECK(quantile_linear(five, 1.0) == 5.0);

  // Against a direct re-implementation on random sorted samples.
  Rng rng(88);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> values(1 + rng.bounded(40));
    for (double& v : values) v = rng.uniform(-5.0, 5.0);
    std::sort(values.begin(), values.end());
    const double p = rng.unit();
    const double pos = p * static_cast<double>(values.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(pos);
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    const double oracle = values[lo] + (pos - lo) * (values[hi] - values[lo]);
    CHECK(quantile_linear(values, p) == doctest::Approx(oracle).epsilon(1e-12));
  }
}

TEST_CASE("box statistics flag points beyond 1.5 IQR") {
  const BoxStats stats = box_stats({1, 2, 3, 4, 100});
  CHECK(stats.q1 == 2.0);
  CHECK(stats.median == 3.0);
  CHECK(stats.q3 == 4.0);
  CHECK(stats.whisker_lo == 1.0);
  CHECK(stats.whisker_hi == 4.0);  // 100 is past q3 + 1.5 IQR = 7
  REQUIRE(stats.outliers.size() == 1);
  CHECK(stats.outliers[0] == 100.0);

  const BoxStats single = box_stats({2.5});
  CHECK(single.median == 2.5);
  CHECK(single.whisker_lo == 2.5);
  CHECK(single.whisker_hi == 2.5);
  CHECK(single.outliers.empty());
}

TEST_CASE("summary, boxplot and report stay internally consistent") {
  const auto results = replicate(DgpKind::dgp2, 80, 3, 11, small_options());
  const auto rows = summarize(results);
  REQUIRE(rows.size() == 2);  // SPDNN and NPDNN at one n
  CHECK(rows[0].method == "SPDNN");
  CHECK(rows[1].method == "NPDNN");
  for (const auto& row : rows) {
    std::vector<double> values;
    for (const auto& rec : results) {
      if (rec.method == row.method) values.push_back(rec.error);
    }
    const BoxStats stats = box_stats(values);
    CHECK(row.count == values.size());
    CHECK(row.min == stats.min);
    CHECK(row.q1 == stats.q1);
    CHECK(row.median == stats.median);
    CHECK(row.q3 == stats.q3);
    CHECK(row.max == stats.max);
    CHECK(row.whisker_lo == stats.whisker_lo);
    CHECK(row.whisker_hi == stats.whisker_hi);
  }

  // The figure embeds the same whisker extents as the summary rows.
  const std::string svg = render_boxplot_svg(DgpKind::dgp2, rows, results);
  CHECK(svg.find("<svg") != std::string::npos);
  for (const auto& row : rows) {
    char expected[160];
    std::snprintf(expected, sizeof expected, "method=%s whisker_lo=%.17g",
                  row.method.c_str(), row.whisker_lo);
    CHECK(svg.find(expected) != std::string::npos);
    std::snprintf(expected, sizeof expected, "whisker_hi=%.17g",
                  row.whisker_hi);
    CHECK(svg.find(expected) != std::string::npos);
  }

  const auto dir = std::filesystem::temp_directory_path() / "spdnn_report_test";
  std::filesystem::remove_all(dir);
  report(results, dir.string());
  CHECK(std::filesystem::exists(dir / "results.tsv"));
  CHECK(std::filesystem::exists(dir / "summary.tsv"));
  CHECK(std::filesystem::exists(dir / "boxplot_dgp2.svg"));
  std::filesystem::remove_all(dir);
}

TEST_CASE("empty results still produce valid tables") {
  const std::vector<ExperimentResult> empty;
  CHECK(results_table(empty) ==
        "dgp\tn\treplication\tmethod\ti\tj\terror\tsparsity\tseed\n");
  CHECK(summarize(empty).empty());
  CHECK(summary_table({}) ==
        "dgp\tn\tmethod\tcount\tmin\tq1\tmedian\tq3\tmax\twhisker_lo\t"
        "whisker_hi\n");

  const auto dir = std::filesystem::temp_directory_path() / "spdnn_empty_report";
  std::filesystem::remove_all(dir);
  report(empty, dir.string());
  std::ifstream results_file(dir / "results.tsv");
  std::string line;
  std::getline(results_file, line);
  CHECK(line == "dgp\tn\treplication\tmethod\ti\tj\terror\tsparsity\tseed");
  CHECK_FALSE(std::getline(results_file, line));
  std::filesystem::remove_all(dir);
}

TEST_CASE("report rejects unwritable directories") {
  const std::vector<ExperimentResult> empty;
  CHECK_THROWS_AS(report(empty, "/proc/definitely/not/writable"),
                  std::runtime_error);
}

TEST_CASE("parallel_for covers every index and propagates errors") {
  std::vector<int> hits(257, 0);
  parallel_for(hits.size(), 3, [&](std::size_t i) { hits[i] += 1; });
  CHECK(std::count(hits.begin(), hits.end(), 1) ==
        static_cast<long>(hits.size()));
  CHECK_THROWS_AS(parallel_for(8, 2,
                               [](std::size_t i) {
                                 if (i == 5) throw std::runtime_error("boom");
                               }),
                  std::runtime_error);
}
