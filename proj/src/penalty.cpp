#include "spdnn/penalty.hpp"

#include <cmath>
#include <stdexcept>

namespace spdnn {

void PenaltyParams::validate() const {
  if (!(tau > 0.0)) {
    throw std::invalid_argument("penalty: clipping threshold tau must be > 0");
  }
  if (!(lambda >= 0.0)) {
    throw std::invalid_argument("penalty: weight lambda must be >= 0");
  }
}

double clipped_norm(std::span<const double> theta, double tau) {
  if (!(tau > 0.0)) {
    throw std::invalid_argument("clipped_norm: tau must be > 0");
  }
  double sum = 0.0;
  for (double t : theta) {
    const double scaled = std::abs(t) / tau;
    sum += scaled < 1.0 ? scaled : 1.0;
  }
  return sum;
}

double penalty_value(std::span<const double> theta, const PenaltyParams& params) {
  params.validate();
  if (params.lambda == 0.0) return 0.0;
  return params.lambda * clipped_norm(theta, params.tau);
}

std::vector<double> penalty_subgradient(std::span<const double> theta,
                                        const PenaltyParams& params) {
  params.validate();
  std::vector<double> grad(theta.size(), 0.0);
  add_penalty_subgradient(theta, params, grad);
  return grad;
}

void add_penalty_subgradient(std::span<const double> theta,
                             const PenaltyParams& params,
                             std::span<double> grad) {
  if (grad.size() != theta.size()) {
    throw std::invalid_argument("add_penalty_subgradient: size mismatch");
  }
  if (params.lambda == 0.0) return;
  const double slope = params.lambda / params.tau;
  for (std::size_t j = 0; j < theta.size(); ++j) {
    const double t = theta[j];
    if (t > 0.0 && t < params.tau) {
      grad[j] += slope;
    } else if (t < 0.0 && -t < params.tau) {
      grad[j] -= slope;
    }
    // t == 0 and |t| >= tau contribute nothing.
  }
}

std::size_t l0_norm(std::span<const double> theta) {
  std::size_t count = 0;
  for (double t : theta) count += (t != 0.0);
  return count;
}

std::size_t l0_norm(std::span<const double> theta, double abs_tol) {
  std::size_t count = 0;
  for (double t : theta) count += (std::abs(t) > abs_tol);
  return count;
}

}  // namespace spdnn
