#include "spdnn/theory.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace spdnn {

namespace {

void require(bool ok, const char* condition) {
  if (!ok) {
    throw std::invalid_argument(std::string("schedule exponents: requires ") +
                                condition);
  }
}

}  // namespace

void ScheduleExponents::validate(TaskKind task) const {
  require(nu1 > 0.0, "nu1 > 0");
  require(nu2 > 0.0, "nu2 > 0");
  require(nu3 > 0.0, "nu3 > 0");
  require(nu5 > 0.0, "nu5 > 0");
  require(nu6 > 0.0, "nu6 > 0");
  require(nu6 < 0.5, "nu6 < 1/2");
  if (task == TaskKind::binary && nu4 == 1.0) {
    // Classification reading: the n-exponent of lambda_n is pinned to 1;
    // the (nu4, nu6) coupling below cannot hold with nu6 > 0 and is skipped.
  } else {
    require(nu4 > 0.0 && nu4 < 1.0, "0 < nu4 < 1");
    require(nu4 + nu6 < 1.0 || (nu4 + nu6 == 1.0 && nu5 > 1.0 - nu3),
            "nu4 + nu6 < 1, or nu4 + nu6 = 1 with nu5 > 1 - nu3");
  }
  require(kappa >= 0.0, "kappa >= 0");
  require(r > 0.0, "r > 0");
  require(c_L > 0.0 && c_N > 0.0 && c_B > 0.0 && c_lambda > 0.0,
          "positive multiplier constants");
  require(rho > 0.0, "rho > 0");
  require(h_star > 0.0, "h_star > 0");
  require(k_ell > 0.0, "k_ell > 0");
}

Schedule schedule(double n, const ScheduleExponents& exp, TaskKind task) {
  if (!(n >= 2.0)) throw std::invalid_argument("schedule: n must be >= 2");
  exp.validate(task);
  const double logn = std::log(n);

  Schedule s;
  s.depth = static_cast<int>(std::ceil(exp.c_L * logn));
  s.width = static_cast<int>(std::ceil(exp.c_N * std::pow(n, exp.nu1)));
  s.bound = std::max(1.0, exp.c_B * std::pow(n, exp.nu2));
  s.lambda = exp.c_lambda * std::pow(logn, exp.nu3) / std::pow(n, exp.nu4);
  s.beta = std::pow(logn, exp.nu5) / std::pow(n, exp.nu6);

  const double depth_term = static_cast<double>(s.depth) + 1.0;
  const double size_term =
      std::pow((static_cast<double>(s.width) + 1.0) * s.bound, depth_term);
  if (task == TaskKind::regression) {
    s.k_n = std::max(std::sqrt(32.0 * exp.rho * exp.rho) * std::sqrt(logn),
                     exp.h_star);
    s.tau_max = s.beta / (16.0 * s.k_n * depth_term * size_term);
  } else {
    s.k_n = exp.k_ell;
    s.tau_max = s.beta / (4.0 * exp.k_ell * depth_term * size_term);
  }
  return s;
}

double regression_rate(double n, const ScheduleExponents& exp) {
  if (!(n >= 2.0)) throw std::invalid_argument("regression_rate: n must be >= 2");
  exp.validate(TaskKind::regression);
  const double logn = std::log(n);
  const double approx_term =
      std::pow(logn, exp.r + exp.nu3) /
      std::pow(n, 2.0 * exp.nu4 / (exp.kappa + 2.0));
  const double deviation_term = std::pow(logn, exp.nu5) / std::pow(n, exp.nu6);
  return std::max(approx_term, deviation_term);
}

double classification_rate(double n, const ScheduleExponents& exp) {
  if (!(n >= 2.0)) {
    throw std::invalid_argument("classification_rate: n must be >= 2");
  }
  exp.validate(TaskKind::binary);
  const double logn = std::log(n);
  const double approx_term = std::pow(logn, exp.r + exp.nu3) /
                             std::pow(n, exp.nu4 / (exp.kappa + 1.0));
  const double deviation_term = std::pow(logn, exp.nu5) / std::pow(n, exp.nu6);
  return std::max(approx_term, deviation_term);
}

double covering_bound(double eps, double L, double N, double B, int j,
                      double alpha, double lambda, double tau, double K) {
  if (!(eps > 0.0)) throw std::invalid_argument("covering_bound: eps must be > 0");
  if (!(lambda > 0.0)) {
    throw std::invalid_argument("covering_bound: lambda must be > 0");
  }
  if (!(K > 0.0)) throw std::invalid_argument("covering_bound: K must be > 0");
  if (tau < 0.0) throw std::invalid_argument("covering_bound: tau must be >= 0");
  const double depth_term = L + 1.0;
  const double denom =
      eps / (4.0 * K) - tau * depth_term * std::pow((N + 1.0) * B, depth_term);
  if (!(denom > 0.0)) {
    throw std::domain_error("covering_bound: tau too large for this epsilon");
  }
  return 2.0 * (std::exp2(j) * alpha / lambda) * depth_term *
         std::log(depth_term * (N + 1.0) * B / denom);
}

const std::vector<TestFunction>& default_test_functions() {
  static const std::vector<TestFunction> family = {
      [](double x) { return std::clamp(x, -1.0, 1.0); },
      [](double x) { return std::sin(x); },
  };
  return family;
}

std::vector<double> dependence_diagnostic(
    std::span<const double> series, int r_max,
    const std::vector<TestFunction>& family) {
  if (r_max < 1) {
    throw std::invalid_argument("dependence_diagnostic: r_max must be >= 1");
  }
  const std::size_t n = series.size();
  if (n < static_cast<std::size_t>(r_max) + 2) {
    throw std::invalid_argument(
        "dependence_diagnostic: series shorter than r_max + 2");
  }
  if (family.empty()) {
    throw std::invalid_argument("dependence_diagnostic: empty test family");
  }

  // Apply each test map once.
  std::vector<std::vector<double>> mapped(family.size());
  for (std::size_t g = 0; g < family.size(); ++g) {
    mapped[g].resize(n);
    for (std::size_t t = 0; t < n; ++t) mapped[g][t] = family[g](series[t]);
  }

  std::vector<double> eps_hat(static_cast<std::size_t>(r_max), 0.0);
  for (int r = 1; r <= r_max; ++r) {
    const std::size_t k = n - static_cast<std::size_t>(r);
    double worst = 0.0;
    for (const auto& a : mapped) {
      for (const auto& b : mapped) {
        // Shifted two-pass covariance; exactly zero on constant inputs.
        const double sa = a[0];
        const double sb = b[static_cast<std::size_t>(r)];
        double sum_a = 0.0, sum_b = 0.0, sum_ab = 0.0;
        for (std::size_t t = 0; t < k; ++t) {
          const double da = a[t] - sa;
          const double db = b[t + static_cast<std::size_t>(r)] - sb;
          sum_a += da;
          sum_b += db;
          sum_ab += da * db;
        }
        const double inv = 1.0 / static_cast<double>(k);
        const double cov = sum_ab * inv - (sum_a * inv) * (sum_b * inv);
        worst = std::max(worst, std::abs(cov));
      }
    }
    eps_hat[static_cast<std::size_t>(r - 1)] = worst;
  }
  return eps_hat;
}

}  // namespace spdnn
