#pragma once

// Shared helpers for the unit and acceptance suites: random small
// networks/batches and an independent finite-difference gradient oracle.

#include <cmath>
#include <limits>
#include <vector>

#include "spdnn/network.hpp"
#include "spdnn/rng.hpp"

namespace spdnn::testing {

struct RandomCase {
  Architecture arch;
  std::vector<double> params;
  std::vector<double> features;  // count x dim
  std::vector<double> targets;
  Loss loss = Loss::square;

  DataView view() const {
    return {features.data(), targets.data(), targets.size(), arch.input_dim};
  }
  Network network() const { return Network::from_flat(arch, params); }
};

// Distance of the case from every ReLU/hinge/clamp kink: the smallest
// |pre-activation|, |margin - 0| and ||raw| - F| over the batch. Cases
// this close to a kink are rejected before finite differencing.
inline double kink_distance(const RandomCase& c) {
  const Network net = c.network();
  const auto sizes = c.arch.layer_sizes();
  double dist = std::numeric_limits<double>::infinity();
  std::vector<double> act, next;
  for (std::size_t s = 0; s < c.targets.size(); ++s) {
    const auto x = c.view().row(s);
    act.assign(x.begin(), x.end());
    for (std::size_t j = 1; j + 1 < sizes.size(); ++j) {
      const auto w = net.weights(static_cast<int>(j));
      const auto b = net.biases(static_cast<int>(j));
      next.assign(static_cast<std::size_t>(sizes[j]), 0.0);
      for (int o = 0; o < sizes[j]; ++o) {
        double pre = b[o];
        for (int i = 0; i < sizes[j - 1]; ++i) {
          pre += w[static_cast<std::size_t>(o) * sizes[j - 1] + i] * act[i];
        }
        dist = std::min(dist, std::abs(pre));
        next[o] = pre > 0.0 ? pre : 0.0;
      }
      act = next;
    }
    const double raw = net.forward_unclamped(x);
    if (std::isfinite(c.arch.output_clamp)) {
      dist = std::min(dist, std::abs(std::abs(raw) - c.arch.output_clamp));
    }
    if (c.loss == Loss::hinge) {
      const double h = std::clamp(raw, -c.arch.output_clamp, c.arch.output_clamp);
      dist = std::min(dist, std::abs(1.0 - c.targets[s] * h));
    }
  }
  return dist;
}

inline RandomCase random_case(Rng& rng, Loss loss) {
  RandomCase c;
  c.loss = loss;
  c.arch.input_dim = 1 + static_cast<int>(rng.bounded(4));
  const int layers = 1 + static_cast<int>(rng.bounded(3));
  for (int l = 0; l < layers; ++l) {
    c.arch.hidden_widths.push_back(1 + static_cast<int>(rng.bounded(8)));
  }
  if (rng.unit() < 0.33) c.arch.output_clamp = rng.uniform(0.5, 3.0);

  Network net(c.arch);
  const auto sizes = c.arch.layer_sizes();
  for (std::size_t j = 1; j < sizes.size(); ++j) {
    const double scale = 1.0 / std::sqrt(static_cast<double>(sizes[j - 1]));
    for (double& w : net.weights(static_cast<int>(j))) {
      w = rng.uniform(-1.0, 1.0) * scale;
    }
    for (double& b : net.biases(static_cast<int>(j))) {
      b = rng.uniform(-0.3, 0.3);
    }
  }
  c.params = net.flatten();

  const std::size_t count = 1 + rng.bounded(8);
  c.features.resize(count * static_cast<std::size_t>(c.arch.input_dim));
  c.targets.resize(count);
  for (double& x : c.features) x = rng.uniform(-2.0, 2.0);
  for (double& y : c.targets) {
    y = loss == Loss::hinge ? (rng.unit() < 0.5 ? -1.0 : 1.0)
                            : rng.uniform(-2.0, 2.0);
  }
  return c;
}

// Draws until the case is at least `margin` away from every kink, so a
// +-step perturbation cannot cross one.
inline RandomCase random_smooth_case(Rng& rng, Loss loss,
                                     double margin = 1e-4) {
  for (;;) {
    RandomCase c = random_case(rng, loss);
    if (kink_distance(c) > margin) return c;
  }
}

// Central finite differences of the mean batch loss.
inline std::vector<double> fd_gradient(const RandomCase& c, double step) {
  Network net = c.network();
  std::vector<double> params = c.params;
  std::vector<double> grad(params.size());
  for (std::size_t k = 0; k < params.size(); ++k) {
    const double saved = params[k];
    params[k] = saved + step;
    net.assign(params);
    const double up = mean_loss(net, c.view(), c.loss);
    params[k] = saved - step;
    net.assign(params);
    const double down = mean_loss(net, c.view(), c.loss);
    params[k] = saved;
    grad[k] = (up - down) / (2.0 * step);
  }
  return grad;
}

// Largest mixed absolute/relative disagreement between two gradients.
inline double max_gradient_error(const std::vector<double>& a,
                                 const std::vector<double>& b) {
  double worst = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double scale = std::max({1.0, std::abs(a[k]), std::abs(b[k])});
    worst = std::max(worst, std::abs(a[k] - b[k]) / scale);
  }
  return worst;
}

}  // namespace spdnn::testing
