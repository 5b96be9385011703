#include "spdnn/optim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <sstream>

#include "spdnn/rng.hpp"

namespace spdnn {

namespace {

// Sub-stream tags hashed with TrainConfig::seeded's base value.
constexpr std::uint64_t kInitSubStream = 0x696e6974;     // "init"
constexpr std::uint64_t kShuffleSubStream = 0x7368666c;  // "shfl"

void he_uniform_init(Network& net, Rng& rng) {
  const auto& sizes = net.sizes();
  for (std::size_t j = 1; j < sizes.size(); ++j) {
    const int in = sizes[j - 1];
    const double limit = std::sqrt(6.0 / static_cast<double>(in));
    for (double& w : net.weights(static_cast<int>(j))) {
      w = rng.uniform(-limit, limit);
    }
    // Biases start at zero.
  }
}

}  // namespace

TrainConfig TrainConfig::seeded(std::uint64_t s) {
  TrainConfig cfg;
  cfg.seed = hash64(s, kInitSubStream);
  cfg.shuffle_seed = hash64(s, kShuffleSubStream);
  return cfg;
}

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0)) {
    throw std::invalid_argument("train config: learning_rate must be > 0");
  }
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) {
    throw std::invalid_argument("train config: beta1, beta2 must be in [0, 1)");
  }
  if (!(epsilon >= 0.0)) {
    throw std::invalid_argument("train config: epsilon must be >= 0");
  }
  if (batch_size < 1) {
    throw std::invalid_argument("train config: batch_size must be >= 1");
  }
  if (patience < 1) {
    throw std::invalid_argument("train config: patience must be >= 1");
  }
  if (max_epochs < 1) {
    throw std::invalid_argument("train config: max_epochs must be >= 1");
  }
  penalty.validate();
}

void adam_step(AdamState& state, std::span<double> params,
               std::span<const double> grad, const TrainConfig& cfg) {
  const std::size_t n = params.size();
  if (state.m.size() != n || state.v.size() != n || grad.size() != n) {
    throw std::invalid_argument("adam_step: state/params/grad length mismatch");
  }
  state.t += 1;
  const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.t));
  const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.t));
  const double lr = cfg.learning_rate;
  for (std::size_t i = 0; i < n; ++i) {
    const double g = grad[i];
    state.m[i] = cfg.beta1 * state.m[i] + (1.0 - cfg.beta1) * g;
    state.v[i] = cfg.beta2 * state.v[i] + (1.0 - cfg.beta2) * g * g;
    const double m_hat = state.m[i] / bc1;
    const double v_hat = state.v[i] / bc2;
    params[i] -= lr * m_hat / (std::sqrt(v_hat) + cfg.epsilon);
  }
}

std::string TrainingHistory::to_table() const {
  std::ostringstream out;
  out << "epoch\ttrain_loss\tpenalty_value\tmonitored_best_flag\n";
  char buf[40];
  for (const auto& e : epochs) {
    out << e.epoch << '\t';
    std::snprintf(buf, sizeof buf, "%.17g", e.train_loss);
    out << buf << '\t';
    std::snprintf(buf, sizeof buf, "%.17g", e.penalty_value);
    out << buf << '\t' << (e.is_best ? 1 : 0) << '\n';
  }
  return out.str();
}

TrainResult train(const DataView& data, const TrainConfig& cfg,
                  const Architecture& arch, const DataView* monitor) {
  cfg.validate();
  arch.validate();
  if (data.count == 0) {
    throw std::invalid_argument("train: empty training data");
  }
  if (data.dim != arch.input_dim) {
    throw std::invalid_argument(
        "train: data feature dimension " + std::to_string(data.dim) +
        " does not match architecture input_dim " +
        std::to_string(arch.input_dim));
  }
  const DataView& monitored = monitor ? *monitor : data;

  Network net(arch);
  Rng init_rng(cfg.seed);
  he_uniform_init(net, init_rng);
  Rng shuffle_rng(cfg.shuffle_seed);

  const std::size_t n = data.count;
  const std::size_t param_count = net.parameter_count();
  const std::size_t batch = std::min<std::size_t>(cfg.batch_size, n);

  AdamState state(param_count);
  GradWorkspace ws;
  std::vector<double> grad(param_count);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<double> batch_x(batch * static_cast<std::size_t>(data.dim));
  std::vector<double> batch_y(batch);

  TrainingHistory history;
  std::vector<double> best_params = net.flatten();
  double best_loss = std::numeric_limits<double>::infinity();
  int epochs_since_best = 0;
  const bool penalized = cfg.penalty.lambda > 0.0;

  for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    shuffle_rng.shuffle(std::span<std::size_t>(order));
    for (std::size_t start = 0; start < n; start += batch) {
      const std::size_t k = std::min(batch, n - start);  // short last batch kept
      for (std::size_t s = 0; s < k; ++s) {
        const auto row = data.row(order[start + s]);
        std::copy(row.begin(), row.end(),
                  batch_x.begin() + s * static_cast<std::size_t>(data.dim));
        batch_y[s] = data.targets[order[start + s]];
      }
      const DataView view{batch_x.data(), batch_y.data(), k, data.dim};
      loss_and_gradient(net, view, cfg.loss, grad, ws);
      if (penalized) {
        add_penalty_subgradient(net.params(), cfg.penalty, grad);
      }
      adam_step(state, net.params(), grad, cfg);
    }

    const double epoch_loss = mean_loss(net, monitored, cfg.loss, ws);
    if (!std::isfinite(epoch_loss)) {
      throw TrainingDivergence(
          epoch, "train: non-finite loss at epoch " + std::to_string(epoch));
    }
    const double pen = penalty_value(net.params(), cfg.penalty);
    const bool is_best = epoch_loss < best_loss;
    history.epochs.push_back({epoch, epoch_loss, pen, is_best});
    if (is_best) {
      best_loss = epoch_loss;
      best_params = net.flatten();
      history.best_epoch = epoch;
      epochs_since_best = 0;
    } else {
      ++epochs_since_best;
      if (epochs_since_best >= cfg.patience) {
        history.stopped_epoch = epoch;
        break;
      }
    }
    history.stopped_epoch = epoch;
  }

  history.best_loss = best_loss;
  net.assign(best_params);
  return {std::move(net), std::move(history)};
}

}  // namespace spdnn
