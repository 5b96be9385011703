#pragma once

#include <functional>
#include <span>
#include <vector>

#include "spdnn/dgp.hpp"

namespace spdnn {

// Exponents and multiplier constants of the tuning/architecture schedules
//   L_n = ceil(c_L log n), N_n = ceil(c_N n^nu1), B_n = max(1, c_B n^nu2),
//   lambda_n = c_lambda (log n)^nu3 / n^nu4, beta_n = (log n)^nu5 / n^nu6,
// plus the approximation-class constants (kappa, r) entering the rate
// bounds and the problem constants (rho, h_star, k_ell) entering K_n.
//
// Validation enforces: all exponents positive, nu6 < 1/2, 0 < nu4 < 1 and
// (nu4 + nu6 < 1, or nu4 + nu6 = 1 with nu5 > 1 - nu3). For the
// classification variant nu4 = 1 is additionally accepted (the
// classification schedule pins the n-exponent of lambda_n to 1; its
// coupling condition on nu4 is vacuous there and is skipped).
struct ScheduleExponents {
  double nu1 = 0.5;
  double nu2 = 0.5;
  double nu3 = 1.0;
  double nu4 = 0.5;
  double nu5 = 1.0;
  double nu6 = 0.25;
  double kappa = 1.0;
  double r = 1.0;
  double c_L = 1.0;
  double c_N = 1.0;
  double c_B = 1.0;
  double c_lambda = 1.0;
  double rho = 1.0;     // sub-Gaussian scale of the regression noise
  double h_star = 1.0;  // sup-norm bound of the target function
  double k_ell = 1.0;   // Lipschitz constant of the margin loss (hinge: 1)

  void validate(TaskKind task = TaskKind::regression) const;
};

struct Schedule {
  int depth = 0;        // L_n
  int width = 0;        // N_n
  double bound = 1.0;   // B_n
  double lambda = 0.0;  // lambda_n
  double tau_max = 0.0;
  double beta = 0.0;    // beta_n
  double k_n = 0.0;     // K_n (regression) or k_ell (classification)
};

// Concrete schedule at sample size n (real-valued, n >= 2). tau_max is
// beta_n / (16 K_n (L_n+1) ((N_n+1) B_n)^{L_n+1}) for regression with
// K_n = max(sqrt(32 rho^2) sqrt(log n), h_star), and
// beta_n / (4 k_ell (L_n+1) ((N_n+1) B_n)^{L_n+1}) for classification.
Schedule schedule(double n, const ScheduleExponents& exp,
                  TaskKind task = TaskKind::regression);

// Convergence-rate bounds: pointwise max of two log-polynomial terms.
//   regression:     (log n)^{r+nu3} / n^{2 nu4/(kappa+2)}  vs  beta_n
//   classification: (log n)^{r+nu3} / n^{nu4/(kappa+1)}    vs  beta_n
double regression_rate(double n, const ScheduleExponents& exp);
double classification_rate(double n, const ScheduleExponents& exp);

// Log covering-number bound
//   2 (2^j a / lambda) (L+1) log((L+1)(N+1)B / d),
//   d = eps/(4K) - tau (L+1) ((N+1)B)^{L+1},
// defined only while d > 0 (throws std::domain_error otherwise; that is
// the regime the tau schedule excludes).
double covering_bound(double eps, double L, double N, double B, int j,
                      double alpha, double lambda, double tau, double K);

using TestFunction = std::function<double(double)>;

// x clipped to [-1, 1] and sin(x): cheap bounded Lipschitz-1 maps.
const std::vector<TestFunction>& default_test_functions();

// Empirical covariance-decay diagnostic: for each r = 1..r_max, the
// maximum over ordered pairs from the family of |sample covariance of
// g1(Z_t), g2(Z_{t+r})|. A sanity check of weak dependence, not an
// estimator of dependence coefficients.
std::vector<double> dependence_diagnostic(
    std::span<const double> series, int r_max,
    const std::vector<TestFunction>& family = default_test_functions());

}  // namespace spdnn
