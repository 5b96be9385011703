#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "spdnn/network.hpp"
#include "spdnn/penalty.hpp"

namespace spdnn {

// Penalized minibatch training configuration. `seed` drives the
// He-uniform initialization stream, `shuffle_seed` the per-epoch
// permutation stream; seeded(s) derives both from one value.
struct TrainConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  int batch_size = 32;
  int patience = 30;
  int max_epochs = 1000;
  Loss loss = Loss::square;
  PenaltyParams penalty;
  std::uint64_t seed = 0;
  std::uint64_t shuffle_seed = 0;

  static TrainConfig seeded(std::uint64_t s);
  void validate() const;
};

struct AdamState {
  std::vector<double> m;
  std::vector<double> v;
  std::uint64_t t = 0;

  explicit AdamState(std::size_t n) : m(n, 0.0), v(n, 0.0) {}
};

// One Adam update with bias correction:
//   m <- b1*m + (1-b1)*g,  v <- b2*v + (1-b2)*g^2,  t <- t+1,
//   params <- params - lr * (m/(1-b1^t)) / (sqrt(v/(1-b2^t)) + eps).
void adam_step(AdamState& state, std::span<double> params,
               std::span<const double> grad, const TrainConfig& cfg);

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0.0;   // unpenalized mean loss on the monitor set
  double penalty_value = 0.0;
  bool is_best = false;
};

struct TrainingHistory {
  std::vector<EpochRecord> epochs;
  int best_epoch = 0;
  double best_loss = 0.0;
  int stopped_epoch = 0;
  std::string init_scheme = "he-uniform";

  // Delimited table: epoch, train_loss, penalty_value, monitored_best_flag.
  std::string to_table() const;
};

struct TrainResult {
  Network network;
  TrainingHistory history;
};

class TrainingDivergence : public std::runtime_error {
 public:
  TrainingDivergence(int epoch_idx, const std::string& what)
      : std::runtime_error(what), epoch(epoch_idx) {}
  int epoch;
};

// Penalized empirical risk minimization: He-uniform init, shuffled
// minibatches with gradient = loss gradient + penalty subgradient, Adam
// updates, patience-based early stopping on the unpenalized mean loss
// over `monitor` (the training data when null), best checkpoint restored.
// Throws TrainingDivergence when the monitored loss turns non-finite.
TrainResult train(const DataView& data, const TrainConfig& cfg,
                  const Architecture& arch, const DataView* monitor = nullptr);

}  // namespace spdnn
