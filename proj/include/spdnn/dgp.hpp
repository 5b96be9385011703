#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "spdnn/network.hpp"

namespace spdnn {

// The four simulated processes: DGP1/DGP2 are nonlinear autoregressions
// with an exogenous AR(1) covariate (regression task), DGP3/DGP4 binary
// autoregressions (classification task).
enum class DgpKind { dgp1, dgp2, dgp3, dgp4 };

enum class TaskKind { regression, binary };

TaskKind task_of(DgpKind kind);
// Autoregressive lag order p: 3, 1, 1, 2.
int lag_order(DgpKind kind);
// Features are (Y_{t-1}, ..., Y_{t-p}, X_{t-1}): p + 1 values.
int feature_dim(DgpKind kind);
const char* to_string(DgpKind kind);
DgpKind dgp_from_string(const std::string& name);

struct SimOptions {
  double exog_phi = 0.5;  // AR(1) coefficient of the exogenous covariate
  int burn_in = 1000;
  // Number of own lags placed in the feature rows; 0 means the kind's
  // full lag order. The recursion itself always uses the full lags.
  int feature_lags = 0;
  // Test hooks.
  bool zero_noise = false;               // innovations forced to 0
  std::optional<double> frozen_exog;     // constant exogenous path
};

struct Trajectory {
  DgpKind kind = DgpKind::dgp1;
  int feature_dim = 0;
  std::vector<double> features;  // n x feature_dim, row-major, time-ordered
  std::vector<double> targets;   // n (real, or -1/+1 for binary kinds)
  std::uint64_t seed = 0;
  int burn_in_used = 0;

  std::size_t size() const { return targets.size(); }
  std::span<const double> row(std::size_t t) const {
    return {features.data() + t * static_cast<std::size_t>(feature_dim),
            static_cast<std::size_t>(feature_dim)};
  }
  DataView view() const {
    return {features.data(), targets.data(), targets.size(), feature_dim};
  }
};

// Stationary AR(1) path X_t = phi*X_{t-1} + u_t with standardized U[-2,2]
// innovations (mean 0, variance 1), burn-in discarded, zero start.
std::vector<double> simulate_exog_ar1(std::size_t n, std::uint64_t seed,
                                      double phi = 0.5, int burn_in = 1000);

// The deterministic part f of the chosen process evaluated at a feature
// vector (own lags then exogenous value). DGP3/DGP4 values lie in [-1, 1].
double mean_function(DgpKind kind, std::span<const double> x);

// Hinge-optimal classifier for the binary kinds: +1 iff f(x) >= 0.
int bayes_classifier(DgpKind kind, std::span<const double> x);
// The >= 0 sign rule by itself.
inline int label_from_score(double f) { return f >= 0.0 ? 1 : -1; }

// Simulates a length-n trajectory after burn-in. Regression kinds add
// standardized U[-2,2] noise to f; binary kinds draw
// Y_t = 2*Bernoulli((1 + f)/2) - 1. Deterministic given (kind, n, seed).
Trajectory simulate(DgpKind kind, std::size_t n, std::uint64_t seed,
                    const SimOptions& options = {});

// Delimited text table: header lines record kind, seed, burn-in; one row
// per time step with columns x_1..x_{p+1}, y.
void save_trajectory(const Trajectory& traj, std::ostream& out);
Trajectory load_trajectory(std::istream& in);
void save_trajectory_file(const Trajectory& traj, const std::string& path);
Trajectory load_trajectory_file(const std::string& path);

}  // namespace spdnn
