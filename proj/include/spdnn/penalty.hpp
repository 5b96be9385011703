#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace spdnn {

// Weight lambda and clipping threshold tau of the clipped-L1 penalty
// lambda * sum_j min(|theta_j| / tau, 1).
struct PenaltyParams {
  double lambda = 0.0;
  double tau = 1.0;

  void validate() const;
};

// sum_j min(|theta_j| / tau, 1). Interpolates between L1/tau for small
// weights and the nonzero count for weights past the threshold.
double clipped_norm(std::span<const double> theta, double tau);

// lambda * clipped_norm(theta, tau).
double penalty_value(std::span<const double> theta, const PenaltyParams& params);

// Subgradient of penalty_value: lambda*sign(theta_j)/tau on the linear
// branch |theta_j| < tau, 0 on the saturated branch and at both kinks
// (|theta_j| = tau takes the saturated side, sign(0) = 0).
std::vector<double> penalty_subgradient(std::span<const double> theta,
                                        const PenaltyParams& params);

// Adds the subgradient into an existing gradient buffer (training hot path).
void add_penalty_subgradient(std::span<const double> theta,
                             const PenaltyParams& params,
                             std::span<double> grad);

// Exact nonzero count.
std::size_t l0_norm(std::span<const double> theta);

// Count of coordinates with |theta_j| > abs_tol ("effective sparsity";
// gradient training never produces exact zeros).
std::size_t l0_norm(std::span<const double> theta, double abs_tol);

inline constexpr double kEffectiveSparsityTol = 1e-6;

}  // namespace spdnn
