#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "spdnn/harness.hpp"
#include "spdnn/theory.hpp"

namespace {

using namespace spdnn;

struct TrainFlags {
  double lr = 1e-3;
  int batch_size = 32;
  int patience = 30;
  int max_epochs = 1000;
  std::string widths = "100,100";
  double clamp = std::numeric_limits<double>::infinity();
};

struct SimFlags {
  int burn_in = 1000;
  double phi = 0.5;
  int feature_lags = 0;
};

void add_train_flags(CLI::App* cmd, TrainFlags& flags) {
  cmd->add_option("--lr", flags.lr, "Adam learning rate");
  cmd->add_option("--batch-size", flags.batch_size, "minibatch size");
  cmd->add_option("--patience", flags.patience,
                  "early-stopping patience in epochs");
  cmd->add_option("--max-epochs", flags.max_epochs, "epoch cap");
  cmd->add_option("--widths", flags.widths,
                  "comma-separated hidden widths, e.g. 100,100");
  cmd->add_option("--clamp", flags.clamp,
                  "output clamp F (default inf = none)");
}

void add_sim_flags(CLI::App* cmd, SimFlags& flags) {
  cmd->add_option("--burn-in", flags.burn_in, "discarded warm-up steps");
  cmd->add_option("--phi", flags.phi, "exogenous AR(1) coefficient");
  cmd->add_option("--feature-lags", flags.feature_lags,
                  "own lags per feature row (0 = process lag order)");
}

void add_grid_flags(CLI::App* cmd, GridSpec& grid) {
  cmd->add_option("--i-min", grid.i_min, "smallest lambda exponent index");
  cmd->add_option("--i-max", grid.i_max, "largest lambda exponent index");
  cmd->add_option("--i-step", grid.i_step, "lambda index stride");
  cmd->add_option("--j-min", grid.j_min, "smallest tau exponent index");
  cmd->add_option("--j-max", grid.j_max, "largest tau exponent index");
  cmd->add_option("--j-step", grid.j_step, "tau index stride");
}

std::vector<int> parse_widths(const std::string& text) {
  std::vector<int> widths;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) widths.push_back(std::stoi(item));
  }
  if (widths.empty()) throw CLI::ValidationError("--widths", "no widths given");
  return widths;
}

TrainConfig make_config(const TrainFlags& flags, std::uint64_t seed) {
  TrainConfig cfg = TrainConfig::seeded(seed);
  cfg.learning_rate = flags.lr;
  cfg.batch_size = flags.batch_size;
  cfg.patience = flags.patience;
  cfg.max_epochs = flags.max_epochs;
  return cfg;
}

SimOptions make_sim(const SimFlags& flags) {
  SimOptions sim;
  sim.burn_in = flags.burn_in;
  sim.exog_phi = flags.phi;
  sim.feature_lags = flags.feature_lags;
  return sim;
}

int effective_threads(int requested) {
  if (requested > 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sparse-penalized neural network estimation for dependent time series"};
  app.require_subcommand(1);
  app.set_config("--config", "", "plain-text key=value config file");

  // simulate ----------------------------------------------------------
  auto* cmd_sim = app.add_subcommand("simulate", "generate a trajectory file");
  cmd_sim->configurable();
  std::string sim_dgp, sim_out;
  std::size_t sim_n = 0;
  std::uint64_t sim_seed = 0;
  SimFlags sim_flags;
  cmd_sim->add_option("--dgp", sim_dgp, "dgp1|dgp2|dgp3|dgp4")->required();
  cmd_sim->add_option("--n", sim_n, "trajectory length")->required();
  cmd_sim->add_option("--seed", sim_seed, "simulation seed");
  cmd_sim->add_option("--out", sim_out, "output path")->required();
  add_sim_flags(cmd_sim, sim_flags);

  // train -------------------------------------------------------------
  auto* cmd_train = app.add_subcommand("train", "fit one network on a trajectory file");
  cmd_train->configurable();
  std::string train_data, train_monitor, train_out = "network.txt", train_history;
  std::string train_loss = "auto";
  double train_lambda = 0.0, train_tau = 1.0;
  std::uint64_t train_seed = 0;
  TrainFlags train_flags;
  cmd_train->add_option("--data", train_data, "training trajectory file")->required();
  cmd_train->add_option("--lambda", train_lambda, "penalty weight");
  cmd_train->add_option("--tau", train_tau, "clipping threshold");
  cmd_train->add_option("--seed", train_seed, "training seed");
  cmd_train->add_option("--loss", train_loss, "auto|square|hinge");
  cmd_train->add_option("--monitor", train_monitor,
                        "trajectory file monitored for early stopping "
                        "(default: training data)");
  cmd_train->add_option("--out", train_out, "network output path");
  cmd_train->add_option("--history", train_history, "history table output path");
  add_train_flags(cmd_train, train_flags);

  // tune ---------------------------------------------------------------
  auto* cmd_tune = app.add_subcommand("tune", "grid-search (lambda, tau) on a validation trajectory");
  cmd_tune->configurable();
  std::string tune_dgp, tune_out;
  std::size_t tune_n = 0;
  std::uint64_t tune_seed = 0;
  int tune_threads = 0;
  GridSpec tune_grid;
  TrainFlags tune_flags;
  SimFlags tune_sim;
  cmd_tune->add_option("--dgp", tune_dgp, "dgp1|dgp2|dgp3|dgp4")->required();
  cmd_tune->add_option("--n", tune_n, "train/validation length")->required();
  cmd_tune->add_option("--seed", tune_seed, "base seed");
  cmd_tune->add_option("--out", tune_out, "grid table output path");
  cmd_tune->add_option("--threads", tune_threads, "worker threads (0 = auto)");
  add_grid_flags(cmd_tune, tune_grid);
  add_train_flags(cmd_tune, tune_flags);
  add_sim_flags(cmd_tune, tune_sim);

  // replicate -----------------------------------------------------------
  auto* cmd_rep = app.add_subcommand("replicate", "SPDNN-vs-NPDNN study over replications");
  cmd_rep->configurable();
  std::string rep_dgp, rep_out_dir;
  std::size_t rep_n = 0, rep_test_size = 10000;
  int rep_reps = 20;
  std::uint64_t rep_base_seed = 0;
  int rep_threads = 0;
  bool rep_vs_targets = false;
  GridSpec rep_grid;
  TrainFlags rep_flags;
  SimFlags rep_sim;
  cmd_rep->add_option("--dgp", rep_dgp, "dgp1|dgp2|dgp3|dgp4")->required();
  cmd_rep->add_option("--n", rep_n, "training length")->required();
  cmd_rep->add_option("--reps", rep_reps, "number of replications");
  cmd_rep->add_option("--base-seed", rep_base_seed, "base seed");
  cmd_rep->add_option("--out-dir", rep_out_dir, "report directory")->required();
  cmd_rep->add_option("--test-size", rep_test_size, "test trajectory length");
  cmd_rep->add_option("--threads", rep_threads, "worker threads (0 = auto)");
  cmd_rep->add_flag("--vs-targets", rep_vs_targets,
                    "score regression runs by test MSE against noisy targets");
  add_grid_flags(cmd_rep, rep_grid);
  add_train_flags(cmd_rep, rep_flags);
  add_sim_flags(cmd_rep, rep_sim);

  // rates ----------------------------------------------------------------
  auto* cmd_rates = app.add_subcommand("rates", "emit a convergence-rate curve");
  cmd_rates->configurable();
  std::string rates_task;
  double rates_n_max = 0, rates_n_min = 10;
  int rates_points = 50;
  ScheduleExponents exps;
  cmd_rates->add_option("--task", rates_task, "regression|classification")->required();
  cmd_rates->add_option("--n-max", rates_n_max, "largest sample size")->required();
  cmd_rates->add_option("--n-min", rates_n_min, "smallest sample size");
  cmd_rates->add_option("--points", rates_points, "table rows (log-spaced)");
  cmd_rates->add_option("--nu1", exps.nu1, "width exponent");
  cmd_rates->add_option("--nu2", exps.nu2, "weight-bound exponent");
  cmd_rates->add_option("--nu3", exps.nu3, "lambda log exponent");
  cmd_rates->add_option("--nu4", exps.nu4, "lambda rate exponent");
  cmd_rates->add_option("--nu5", exps.nu5, "beta log exponent");
  cmd_rates->add_option("--nu6", exps.nu6, "beta rate exponent");
  cmd_rates->add_option("--kappa", exps.kappa, "approximation-class exponent");
  cmd_rates->add_option("--r", exps.r, "approximation-class log exponent");

  // report ----------------------------------------------------------------
  auto* cmd_report = app.add_subcommand("report", "tables and boxplots from a results file");
  cmd_report->configurable();
  std::string report_in, report_out_dir;
  cmd_report->add_option("--in", report_in, "results.tsv path")->required();
  cmd_report->add_option("--out-dir", report_out_dir, "report directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*cmd_sim) {
      const auto traj = simulate(dgp_from_string(sim_dgp), sim_n, sim_seed,
                                 make_sim(sim_flags));
      save_trajectory_file(traj, sim_out);
      std::cout << "wrote " << sim_out << " (" << traj.size() << " rows)\n";
    } else if (*cmd_train) {
      const auto traj = load_trajectory_file(train_data);
      TrainConfig cfg = make_config(train_flags, train_seed);
      cfg.penalty = PenaltyParams{train_lambda, train_tau};
      cfg.loss = train_loss == "auto"
                     ? (task_of(traj.kind) == TaskKind::regression
                            ? Loss::square
                            : Loss::hinge)
                     : loss_from_string(train_loss);
      Architecture arch;
      arch.input_dim = traj.feature_dim;
      arch.hidden_widths = parse_widths(train_flags.widths);
      arch.output_clamp = train_flags.clamp;
      Trajectory monitor;
      const DataView* monitor_view = nullptr;
      DataView mview;
      if (!train_monitor.empty()) {
        monitor = load_trajectory_file(train_monitor);
        mview = monitor.view();
        monitor_view = &mview;
      }
      const auto result = train(traj.view(), cfg, arch, monitor_view);
      save_network_file(result.network, train_out);
      if (!train_history.empty()) {
        std::ofstream hist(train_history);
        if (!hist) throw std::runtime_error("cannot write " + train_history);
        hist << result.history.to_table();
      }
      std::cout << "best epoch " << result.history.best_epoch << ", monitored loss "
                << fmt17(result.history.best_loss) << ", wrote " << train_out
                << "\n";
    } else if (*cmd_tune) {
      const DgpKind kind = dgp_from_string(tune_dgp);
      const SimOptions sim = make_sim(tune_sim);
      const auto train_traj =
          simulate(kind, tune_n, replication_seed(tune_seed, 1, StreamTag::train), sim);
      const auto valid_traj =
          simulate(kind, tune_n, replication_seed(tune_seed, 1, StreamTag::valid), sim);
      TrainConfig cfg = make_config(tune_flags, 0);
      cfg.seed = replication_seed(tune_seed, 1, StreamTag::init);
      cfg.shuffle_seed = replication_seed(tune_seed, 1, StreamTag::shuffle);
      cfg.loss = task_of(kind) == TaskKind::regression ? Loss::square : Loss::hinge;
      GridSpec grid = tune_grid;
      grid.n = tune_n;
      Architecture arch;
      arch.input_dim = train_traj.feature_dim;
      arch.hidden_widths = parse_widths(tune_flags.widths);
      arch.output_clamp = tune_flags.clamp;
      const auto gs = grid_search(train_traj, valid_traj, grid, cfg, arch,
                                  effective_threads(tune_threads));
      std::cout << gs.table_tsv();
      std::cout << "chosen i=" << gs.best_i << " j=" << gs.best_j
                << " lambda=" << fmt17(grid.lambda_of(gs.best_i))
                << " tau=" << fmt17(grid.tau_of(gs.best_j)) << "\n";
      if (!tune_out.empty()) {
        std::ofstream out(tune_out);
        if (!out) throw std::runtime_error("cannot write " + tune_out);
        out << gs.table_tsv();
      }
    } else if (*cmd_rep) {
      ReplicateOptions options;
      options.grid = rep_grid;
      options.cfg = make_config(rep_flags, 0);
      options.arch.hidden_widths = parse_widths(rep_flags.widths);
      options.arch.output_clamp = rep_flags.clamp;
      options.test_size = rep_test_size;
      options.sim = make_sim(rep_sim);
      options.threads = effective_threads(rep_threads);
      options.vs_targets = rep_vs_targets;
      const auto results = replicate(dgp_from_string(rep_dgp), rep_n, rep_reps,
                                     rep_base_seed, options);
      report(results, rep_out_dir);
      std::cout << "wrote " << results.size() << " records to " << rep_out_dir
                << "\n";
    } else if (*cmd_rates) {
      const bool classification = rates_task == "classification";
      if (!classification && rates_task != "regression") {
        throw std::runtime_error("rates: --task must be regression or classification");
      }
      if (rates_n_max < rates_n_min) {
        throw std::runtime_error("rates: --n-max must be >= --n-min");
      }
      std::cout << "n\tbound\n";
      const double lo = std::log(std::max(2.0, rates_n_min));
      const double hi = std::log(rates_n_max);
      double last_n = -1.0;
      for (int k = 0; k < rates_points; ++k) {
        const double frac =
            rates_points == 1 ? 0.0
                              : static_cast<double>(k) / (rates_points - 1);
        const double n = std::floor(std::exp(lo + (hi - lo) * frac));
        if (n == last_n) continue;
        last_n = n;
        const double bound = classification ? classification_rate(n, exps)
                                            : regression_rate(n, exps);
        std::cout << fmt17(n) << '\t' << fmt17(bound) << '\n';
      }
    } else if (*cmd_report) {
      std::ifstream in(report_in);
      if (!in) throw std::runtime_error("cannot open " + report_in);
      const auto results = parse_results_table(in);
      report(results, report_out_dir);
      std::cout << "wrote report for " << results.size() << " records to "
                << report_out_dir << "\n";
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
