#pragma once

#include <cstddef>
#include <iosfwd>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace spdnn {

// Fixed MLP family: ReLU hidden layers, identity output of dimension 1,
// optional hard clamp of the output to [-output_clamp, +output_clamp].
struct Architecture {
  int input_dim = 1;
  std::vector<int> hidden_widths;
  double output_clamp = std::numeric_limits<double>::infinity();

  int depth() const { return static_cast<int>(hidden_widths.size()); }
  int width() const;
  // p_0, ..., p_{L+1} with p_0 = input_dim and p_{L+1} = 1.
  std::vector<int> layer_sizes() const;
  std::size_t parameter_count() const;
  void validate() const;

  bool operator==(const Architecture&) const = default;
};

enum class Loss { square, hinge };

const char* to_string(Loss loss);
Loss loss_from_string(const std::string& name);

// Non-owning view of a dataset: `count` rows of `dim` features plus one
// target each, row-major.
struct DataView {
  const double* features = nullptr;
  const double* targets = nullptr;
  std::size_t count = 0;
  int dim = 0;

  std::span<const double> row(std::size_t t) const {
    return {features + t * static_cast<std::size_t>(dim),
            static_cast<std::size_t>(dim)};
  }
};

// Scratch buffers for forward/backward passes, reusable across calls.
struct GradWorkspace {
  std::vector<std::vector<double>> act;    // post-activation per layer
  std::vector<std::vector<double>> delta;  // backpropagated errors
};

// MLP parameters stored as one flat vector, per affine layer weights
// (output-major) then biases. flatten()/assign() round-trip exactly and
// the optimizer updates the flat buffer in place.
class Network {
 public:
  explicit Network(Architecture arch);

  const Architecture& arch() const { return arch_; }
  const std::vector<int>& sizes() const { return sizes_; }
  std::size_t parameter_count() const { return params_.size(); }

  std::vector<double> flatten() const { return params_; }
  void assign(std::span<const double> flat);
  static Network from_flat(Architecture arch, std::span<const double> flat);

  // Sup-norm of the parameter vector; reported against the weight bound
  // of the network class, never enforced during training.
  double max_abs_parameter() const;

  std::span<double> params() { return params_; }
  std::span<const double> params() const { return params_; }

  // Weight block of affine layer j (1-based), output-major: entry
  // (o, i) at position o * p_{j-1} + i.
  std::span<const double> weights(int layer) const;
  std::span<double> weights(int layer);
  std::span<const double> biases(int layer) const;
  std::span<double> biases(int layer);

  // Affine/ReLU composition with the output clamped to
  // [-output_clamp, +output_clamp].
  double forward(std::span<const double> x) const;
  // Same composition without the final clamp.
  double forward_unclamped(std::span<const double> x) const;

 private:
  friend double loss_and_gradient(const Network&, const DataView&, Loss,
                                  std::span<double>, GradWorkspace&);
  friend double mean_loss(const Network&, const DataView&, Loss,
                          GradWorkspace&);

  double forward_impl(std::span<const double> x, GradWorkspace* ws) const;

  Architecture arch_;
  std::vector<int> sizes_;                // p_0 .. p_{L+1}
  std::vector<double> params_;            // flat weights+biases
  std::vector<std::size_t> weight_off_;   // per affine layer
  std::vector<std::size_t> bias_off_;
};

// Mean loss over the batch and the exact gradient of that mean with
// respect to the flat parameter vector. Square: (y - h(x))^2. Hinge:
// max(1 - y*h(x), 0) with labels in {-1, +1}. Subgradient 0 is used at
// the ReLU, hinge and clamp kinks.
double loss_and_gradient(const Network& net, const DataView& batch, Loss loss,
                         std::span<double> grad, GradWorkspace& ws);

std::pair<double, std::vector<double>> loss_and_gradient(const Network& net,
                                                         const DataView& batch,
                                                         Loss loss);

// Forward-only mean loss (early-stopping monitor).
double mean_loss(const Network& net, const DataView& data, Loss loss,
                 GradWorkspace& ws);
double mean_loss(const Network& net, const DataView& data, Loss loss);

// Plain-text network format: architecture header, then per layer the
// weight matrix (one row per input, outputs across) and the bias vector,
// 17 significant digits.
void save_network(const Network& net, std::ostream& out);
Network load_network(std::istream& in);
void save_network_file(const Network& net, const std::string& path);
Network load_network_file(const std::string& path);
std::string network_to_string(const Network& net);

}  // namespace spdnn
