#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "spdnn/harness.hpp"
#include "spdnn/theory.hpp"

namespace py = pybind11;
using namespace spdnn;

namespace {

std::vector<double> to_vector(const py::array_t<double, py::array::c_style |
                                                             py::array::forcecast>& a) {
  return {a.data(), a.data() + a.size()};
}

py::array_t<double> feature_matrix(const Trajectory& traj) {
  py::array_t<double> out({static_cast<py::ssize_t>(traj.size()),
                           static_cast<py::ssize_t>(traj.feature_dim)});
  std::copy(traj.features.begin(), traj.features.end(), out.mutable_data());
  return out;
}

py::array_t<double> target_vector(const Trajectory& traj) {
  py::array_t<double> out(static_cast<py::ssize_t>(traj.size()));
  std::copy(traj.targets.begin(), traj.targets.end(), out.mutable_data());
  return out;
}

Trajectory trajectory_from_arrays(const std::string& kind,
                                  py::array_t<double> features,
                                  py::array_t<double> targets) {
  auto f = py::array_t<double, py::array::c_style | py::array::forcecast>(features);
  auto t = py::array_t<double, py::array::c_style | py::array::forcecast>(targets);
  if (f.ndim() != 2 || t.ndim() != 1 || f.shape(0) != t.shape(0)) {
    throw std::invalid_argument("features must be (n, d) and targets (n,)");
  }
  Trajectory traj;
  traj.kind = dgp_from_string(kind);
  traj.feature_dim = static_cast<int>(f.shape(1));
  traj.features.assign(f.data(), f.data() + f.size());
  traj.targets.assign(t.data(), t.data() + t.size());
  return traj;
}

py::dict history_dict(const TrainingHistory& h) {
  py::list epochs, losses, penalties, best_flags;
  for (const auto& e : h.epochs) {
    epochs.append(e.epoch);
    losses.append(e.train_loss);
    penalties.append(e.penalty_value);
    best_flags.append(e.is_best);
  }
  py::dict d;
  d["epoch"] = epochs;
  d["train_loss"] = losses;
  d["penalty_value"] = penalties;
  d["monitored_best_flag"] = best_flags;
  d["best_epoch"] = h.best_epoch;
  d["best_loss"] = h.best_loss;
  d["stopped_epoch"] = h.stopped_epoch;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "sparse-penalized neural network estimation for dependent time series";

  // Penalty.
  m.def(
      "clipped_norm",
      [](py::array_t<double> theta, double tau) {
        return clipped_norm(to_vector(theta), tau);
      },
      py::arg("theta"), py::arg("tau"));
  m.def(
      "penalty_value",
      [](py::array_t<double> theta, double lam, double tau) {
        return penalty_value(to_vector(theta), {lam, tau});
      },
      py::arg("theta"), py::arg("lam"), py::arg("tau"));
  m.def(
      "penalty_subgradient",
      [](py::array_t<double> theta, double lam, double tau) {
        return penalty_subgradient(to_vector(theta), {lam, tau});
      },
      py::arg("theta"), py::arg("lam"), py::arg("tau"));
  m.def(
      "l0_norm",
      [](py::array_t<double> theta, double tol) {
        const auto v = to_vector(theta);
        return tol == 0.0 ? l0_norm(v) : l0_norm(v, tol);
      },
      py::arg("theta"), py::arg("tol") = 0.0);

  // Network.
  py::class_<Network>(m, "Network")
      .def_property_readonly("parameter_count", &Network::parameter_count)
      .def_property_readonly("input_dim",
                             [](const Network& n) { return n.arch().input_dim; })
      .def_property_readonly(
          "hidden_widths",
          [](const Network& n) { return n.arch().hidden_widths; })
      .def("forward",
           [](const Network& n, py::array_t<double> x) {
             return n.forward(to_vector(x));
           })
      .def("flatten", [](const Network& n) { return n.flatten(); })
      .def("max_abs_parameter", &Network::max_abs_parameter)
      .def("to_string", &network_to_string)
      .def_static("from_string", [](const std::string& text) {
        std::istringstream in(text);
        return load_network(in);
      });

  // Trajectory.
  py::class_<Trajectory>(m, "Trajectory")
      .def_property_readonly(
          "kind", [](const Trajectory& t) { return std::string(to_string(t.kind)); })
      .def_property_readonly("features", &feature_matrix)
      .def_property_readonly("targets", &target_vector)
      .def_property_readonly("seed", [](const Trajectory& t) { return t.seed; })
      .def_property_readonly("burn_in",
                             [](const Trajectory& t) { return t.burn_in_used; })
      .def("__len__", &Trajectory::size)
      .def_static("from_arrays", &trajectory_from_arrays, py::arg("kind"),
                  py::arg("features"), py::arg("targets"));

  m.def(
      "simulate",
      [](const std::string& kind, std::size_t n, std::uint64_t seed,
         double phi, int burn_in, int feature_lags) {
        SimOptions options;
        options.exog_phi = phi;
        options.burn_in = burn_in;
        options.feature_lags = feature_lags;
        return simulate(dgp_from_string(kind), n, seed, options);
      },
      py::arg("kind"), py::arg("n"), py::arg("seed") = 0, py::arg("phi") = 0.5,
      py::arg("burn_in") = 1000, py::arg("feature_lags") = 0);
  m.def(
      "simulate_exog_ar1",
      [](std::size_t n, std::uint64_t seed, double phi, int burn_in) {
        return simulate_exog_ar1(n, seed, phi, burn_in);
      },
      py::arg("n"), py::arg("seed") = 0, py::arg("phi") = 0.5,
      py::arg("burn_in") = 1000);
  m.def(
      "mean_function",
      [](const std::string& kind, py::array_t<double> x) {
        return mean_function(dgp_from_string(kind), to_vector(x));
      },
      py::arg("kind"), py::arg("x"));
  m.def(
      "bayes_classifier",
      [](const std::string& kind, py::array_t<double> x) {
        return bayes_classifier(dgp_from_string(kind), to_vector(x));
      },
      py::arg("kind"), py::arg("x"));

  // Training.
  m.def(
      "train",
      [](const Trajectory& data, std::vector<int> widths, double lam,
         double tau, const std::string& loss, std::uint64_t seed, double lr,
         int batch_size, int patience, int max_epochs, double clamp) {
        TrainConfig cfg = TrainConfig::seeded(seed);
        cfg.penalty = PenaltyParams{lam, tau};
        cfg.learning_rate = lr;
        cfg.batch_size = batch_size;
        cfg.patience = patience;
        cfg.max_epochs = max_epochs;
        cfg.loss = loss == "auto" ? (task_of(data.kind) == TaskKind::regression
                                         ? Loss::square
                                         : Loss::hinge)
                                  : loss_from_string(loss);
        Architecture arch{data.feature_dim, std::move(widths), clamp};
        const auto result = train(data.view(), cfg, arch);
        return py::make_tuple(result.network, history_dict(result.history));
      },
      py::arg("data"), py::arg("widths") = std::vector<int>{100, 100},
      py::arg("lam") = 0.0, py::arg("tau") = 1.0, py::arg("loss") = "auto",
      py::arg("seed") = 0, py::arg("lr") = 1e-3, py::arg("batch_size") = 32,
      py::arg("patience") = 30, py::arg("max_epochs") = 1000,
      py::arg("clamp") = std::numeric_limits<double>::infinity());

  // Evaluation.
  m.def(
      "evaluate_l2",
      [](const Network& net, const Trajectory& test) {
        return evaluate_l2(net, test, test.kind);
      },
      py::arg("net"), py::arg("test"));
  m.def(
      "evaluate_mse",
      [](const Network& net, const Trajectory& test) {
        return evaluate_mse(net, test);
      },
      py::arg("net"), py::arg("test"));
  m.def(
      "evaluate_excess_risk",
      [](const Network& net, const Trajectory& test) {
        return evaluate_excess_risk(net, test, test.kind);
      },
      py::arg("net"), py::arg("test"));

  // Schedules, rates, covering bound, dependence diagnostic.
  const auto exponents_from_kwargs = [](double nu1, double nu2, double nu3,
                                        double nu4, double nu5, double nu6,
                                        double kappa, double r) {
    ScheduleExponents e;
    e.nu1 = nu1;
    e.nu2 = nu2;
    e.nu3 = nu3;
    e.nu4 = nu4;
    e.nu5 = nu5;
    e.nu6 = nu6;
    e.kappa = kappa;
    e.r = r;
    return e;
  };
  m.def(
      "schedule",
      [exponents_from_kwargs](double n, const std::string& task, double nu1,
                              double nu2, double nu3, double nu4, double nu5,
                              double nu6, double kappa, double r) {
        const auto s = schedule(
            n, exponents_from_kwargs(nu1, nu2, nu3, nu4, nu5, nu6, kappa, r),
            task == "classification" ? TaskKind::binary : TaskKind::regression);
        py::dict d;
        d["depth"] = s.depth;
        d["width"] = s.width;
        d["bound"] = s.bound;
        d["lambda"] = s.lambda;
        d["tau_max"] = s.tau_max;
        d["beta"] = s.beta;
        d["k_n"] = s.k_n;
        return d;
      },
      py::arg("n"), py::arg("task") = "regression", py::arg("nu1") = 0.5,
      py::arg("nu2") = 0.5, py::arg("nu3") = 1.0, py::arg("nu4") = 0.5,
      py::arg("nu5") = 1.0, py::arg("nu6") = 0.25, py::arg("kappa") = 1.0,
      py::arg("r") = 1.0);
  m.def(
      "regression_rate",
      [exponents_from_kwargs](double n, double nu1, double nu2, double nu3,
                              double nu4, double nu5, double nu6, double kappa,
                              double r) {
        return regression_rate(
            n, exponents_from_kwargs(nu1, nu2, nu3, nu4, nu5, nu6, kappa, r));
      },
      py::arg("n"), py::arg("nu1") = 0.5, py::arg("nu2") = 0.5,
      py::arg("nu3") = 1.0, py::arg("nu4") = 0.5, py::arg("nu5") = 1.0,
      py::arg("nu6") = 0.25, py::arg("kappa") = 1.0, py::arg("r") = 1.0);
  m.def(
      "classification_rate",
      [exponents_from_kwargs](double n, double nu1, double nu2, double nu3,
                              double nu4, double nu5, double nu6, double kappa,
                              double r) {
        return classification_rate(
            n, exponents_from_kwargs(nu1, nu2, nu3, nu4, nu5, nu6, kappa, r));
      },
      py::arg("n"), py::arg("nu1") = 0.5, py::arg("nu2") = 0.5,
      py::arg("nu3") = 1.0, py::arg("nu4") = 0.5, py::arg("nu5") = 1.0,
      py::arg("nu6") = 0.25, py::arg("kappa") = 1.0, py::arg("r") = 1.0);
  m.def("covering_bound", &covering_bound, py::arg("eps"), py::arg("L"),
        py::arg("N"), py::arg("B"), py::arg("j"), py::arg("alpha"),
        py::arg("lam"), py::arg("tau"), py::arg("K"));
  m.def(
      "dependence_diagnostic",
      [](py::array_t<double> series, int r_max) {
        return dependence_diagnostic(to_vector(series), r_max);
      },
      py::arg("series"), py::arg("r_max"));

  // Experiment pipeline.
  m.def(
      "replicate",
      [](const std::string& kind, std::size_t n, int reps,
         std::uint64_t base_seed, int i_max, int i_step, int j_max, int j_step,
         std::vector<int> widths, int max_epochs, int patience,
         std::size_t test_size, int threads) {
        ReplicateOptions options;
        options.grid.i_max = i_max;
        options.grid.i_step = i_step;
        options.grid.j_max = j_max;
        options.grid.j_step = j_step;
        options.arch.hidden_widths = std::move(widths);
        options.cfg.max_epochs = max_epochs;
        options.cfg.patience = patience;
        options.test_size = test_size;
        options.threads = threads;
        const auto results =
            replicate(dgp_from_string(kind), n, reps, base_seed, options);
        py::list rows;
        for (const auto& rec : results) {
          py::dict d;
          d["dgp"] = std::string(to_string(rec.dgp));
          d["n"] = rec.n;
          d["replication"] = rec.replication;
          d["method"] = rec.method;
          d["i"] = rec.ij ? py::object(py::int_(rec.ij->first)) : py::none();
          d["j"] = rec.ij ? py::object(py::int_(rec.ij->second)) : py::none();
          d["error"] = rec.error;
          d["sparsity"] = rec.sparsity;
          d["seed"] = rec.seed;
          rows.append(d);
        }
        return rows;
      },
      py::arg("kind"), py::arg("n"), py::arg("reps"), py::arg("base_seed") = 0,
      py::arg("i_max") = 10, py::arg("i_step") = 1, py::arg("j_max") = 10,
      py::arg("j_step") = 1, py::arg("widths") = std::vector<int>{100, 100},
      py::arg("max_epochs") = 1000, py::arg("patience") = 30,
      py::arg("test_size") = 10000, py::arg("threads") = 1);

  m.attr("__version__") = "1.0.0";
}
