#include "spdnn/network.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace spdnn {

namespace {

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void ensure_workspace(const Network& net, GradWorkspace& ws) {
  const auto& sizes = net.sizes();
  const std::size_t layers = sizes.size();
  if (ws.act.size() != layers) ws.act.resize(layers);
  for (std::size_t l = 0; l < layers; ++l) {
    ws.act[l].resize(static_cast<std::size_t>(sizes[l]));
  }
  if (ws.delta.size() != layers - 1) ws.delta.resize(layers - 1);
  for (std::size_t l = 0; l + 1 < layers; ++l) {
    ws.delta[l].resize(static_cast<std::size_t>(sizes[l + 1]));
  }
}

}  // namespace

int Architecture::width() const {
  int w = 0;
  for (int h : hidden_widths) w = std::max(w, h);
  return w;
}

std::vector<int> Architecture::layer_sizes() const {
  std::vector<int> sizes;
  sizes.reserve(hidden_widths.size() + 2);
  sizes.push_back(input_dim);
  sizes.insert(sizes.end(), hidden_widths.begin(), hidden_widths.end());
  sizes.push_back(1);
  return sizes;
}

std::size_t Architecture::parameter_count() const {
  const auto sizes = layer_sizes();
  std::size_t count = 0;
  for (std::size_t j = 1; j < sizes.size(); ++j) {
    count += static_cast<std::size_t>(sizes[j - 1]) * sizes[j] + sizes[j];
  }
  return count;
}

void Architecture::validate() const {
  if (input_dim < 1) {
    throw std::invalid_argument("architecture: input_dim must be >= 1");
  }
  if (hidden_widths.empty()) {
    throw std::invalid_argument(
        "architecture: at least one hidden layer is required");
  }
  for (int h : hidden_widths) {
    if (h < 1) {
      throw std::invalid_argument("architecture: hidden widths must be >= 1");
    }
  }
  if (!(output_clamp > 0.0)) {
    throw std::invalid_argument("architecture: output_clamp must be > 0");
  }
}

const char* to_string(Loss loss) {
  return loss == Loss::square ? "square" : "hinge";
}

Loss loss_from_string(const std::string& name) {
  if (name == "square") return Loss::square;
  if (name == "hinge") return Loss::hinge;
  throw std::invalid_argument("unknown loss: " + name);
}

Network::Network(Architecture arch) : arch_(std::move(arch)) {
  arch_.validate();
  sizes_ = arch_.layer_sizes();
  weight_off_.resize(sizes_.size() - 1);
  bias_off_.resize(sizes_.size() - 1);
  std::size_t off = 0;
  for (std::size_t j = 1; j < sizes_.size(); ++j) {
    weight_off_[j - 1] = off;
    off += static_cast<std::size_t>(sizes_[j - 1]) * sizes_[j];
    bias_off_[j - 1] = off;
    off += static_cast<std::size_t>(sizes_[j]);
  }
  params_.assign(off, 0.0);
}

void Network::assign(std::span<const double> flat) {
  if (flat.size() != params_.size()) {
    throw std::invalid_argument("network: flat parameter size mismatch");
  }
  std::copy(flat.begin(), flat.end(), params_.begin());
}

Network Network::from_flat(Architecture arch, std::span<const double> flat) {
  Network net(std::move(arch));
  net.assign(flat);
  return net;
}

double Network::max_abs_parameter() const {
  double sup = 0.0;
  for (double p : params_) sup = std::max(sup, std::abs(p));
  return sup;
}

std::span<const double> Network::weights(int layer) const {
  const std::size_t j = static_cast<std::size_t>(layer);
  const std::size_t count =
      static_cast<std::size_t>(sizes_[j - 1]) * sizes_[j];
  return {params_.data() + weight_off_[j - 1], count};
}

std::span<double> Network::weights(int layer) {
  const std::size_t j = static_cast<std::size_t>(layer);
  const std::size_t count =
      static_cast<std::size_t>(sizes_[j - 1]) * sizes_[j];
  return {params_.data() + weight_off_[j - 1], count};
}

std::span<const double> Network::biases(int layer) const {
  const std::size_t j = static_cast<std::size_t>(layer);
  return {params_.data() + bias_off_[j - 1], static_cast<std::size_t>(sizes_[j])};
}

std::span<double> Network::biases(int layer) {
  const std::size_t j = static_cast<std::size_t>(layer);
  return {params_.data() + bias_off_[j - 1], static_cast<std::size_t>(sizes_[j])};
}

double Network::forward_impl(std::span<const double> x, GradWorkspace* ws) const {
  if (x.size() != static_cast<std::size_t>(sizes_[0])) {
    throw std::invalid_argument(
        "forward: layer 1 expects input of size " + std::to_string(sizes_[0]) +
        ", got " + std::to_string(x.size()));
  }
  GradWorkspace local;
  if (ws == nullptr) ws = &local;
  ensure_workspace(*this, *ws);

  std::copy(x.begin(), x.end(), ws->act[0].begin());
  const std::size_t affine_layers = sizes_.size() - 1;
  for (std::size_t j = 1; j <= affine_layers; ++j) {
    const int in = sizes_[j - 1];
    const int out = sizes_[j];
    const double* w = params_.data() + weight_off_[j - 1];
    const double* b = params_.data() + bias_off_[j - 1];
    const double* prev = ws->act[j - 1].data();
    double* cur = ws->act[j].data();
    const bool hidden = j < affine_layers;
    for (int o = 0; o < out; ++o) {
      const double* row = w + static_cast<std::size_t>(o) * in;
      double sum = b[o];
      for (int i = 0; i < in; ++i) sum += row[i] * prev[i];
      cur[o] = hidden ? (sum > 0.0 ? sum : 0.0) : sum;
    }
  }
  return ws->act[affine_layers][0];
}

double Network::forward_unclamped(std::span<const double> x) const {
  return forward_impl(x, nullptr);
}

double Network::forward(std::span<const double> x) const {
  const double raw = forward_impl(x, nullptr);
  const double f = arch_.output_clamp;
  return std::clamp(raw, -f, f);
}

double loss_and_gradient(const Network& net, const DataView& batch, Loss loss,
                         std::span<double> grad, GradWorkspace& ws) {
  if (batch.count == 0) {
    throw std::invalid_argument("loss_and_gradient: empty batch");
  }
  if (batch.dim != net.sizes_[0]) {
    throw std::invalid_argument(
        "loss_and_gradient: layer 1 expects input of size " +
        std::to_string(net.sizes_[0]) + ", got " + std::to_string(batch.dim));
  }
  if (grad.size() != net.parameter_count()) {
    throw std::invalid_argument("loss_and_gradient: gradient size mismatch");
  }
  std::fill(grad.begin(), grad.end(), 0.0);

  const auto& sizes = net.sizes_;
  const std::size_t affine_layers = sizes.size() - 1;
  const double clamp = net.arch_.output_clamp;
  double total = 0.0;

  for (std::size_t s = 0; s < batch.count; ++s) {
    const double y = batch.targets[s];
    if (loss == Loss::hinge && y != 1.0 && y != -1.0) {
      throw std::invalid_argument(
          "loss_and_gradient: hinge labels must be -1 or +1, got " +
          fmt17(y));
    }
    const double raw = net.forward_impl(batch.row(s), &ws);
    const double h = std::clamp(raw, -clamp, clamp);

    double dldh = 0.0;
    if (loss == Loss::square) {
      const double r = h - y;
      total += r * r;
      dldh = 2.0 * r;
    } else {
      const double margin = 1.0 - y * h;
      if (margin > 0.0) {
        total += margin;
        dldh = -y;
      }
    }
    // Hard clamp: zero gradient outside (and exactly at) the clamp.
    const bool inside = std::abs(raw) < clamp;
    const double dldraw = inside ? dldh : 0.0;
    if (dldraw == 0.0) continue;

    ws.delta[affine_layers - 1][0] = dldraw;
    for (std::size_t j = affine_layers; j >= 1; --j) {
      const int in = sizes[j - 1];
      const int out = sizes[j];
      const double* w = net.params_.data() + net.weight_off_[j - 1];
      const double* prev = ws.act[j - 1].data();
      const double* delta = ws.delta[j - 1].data();
      double* gw = grad.data() + net.weight_off_[j - 1];
      double* gb = grad.data() + net.bias_off_[j - 1];

      for (int o = 0; o < out; ++o) {
        const double d = delta[o];
        if (d == 0.0) continue;
        double* grow = gw + static_cast<std::size_t>(o) * in;
        for (int i = 0; i < in; ++i) grow[i] += d * prev[i];
        gb[o] += d;
      }
      if (j == 1) break;

      double* dprev = ws.delta[j - 2].data();
      std::fill(dprev, dprev + in, 0.0);
      for (int o = 0; o < out; ++o) {
        const double d = delta[o];
        if (d == 0.0) continue;
        const double* row = w + static_cast<std::size_t>(o) * in;
        for (int i = 0; i < in; ++i) dprev[i] += d * row[i];
      }
      // ReLU subgradient: 1 on positive pre-activations, 0 otherwise
      // (post-activation > 0 iff pre-activation > 0).
      for (int i = 0; i < in; ++i) {
        if (prev[i] <= 0.0) dprev[i] = 0.0;
      }
    }
  }

  const double inv = 1.0 / static_cast<double>(batch.count);
  for (double& g : grad) g *= inv;
  return total * inv;
}

std::pair<double, std::vector<double>> loss_and_gradient(const Network& net,
                                                         const DataView& batch,
                                                         Loss loss) {
  GradWorkspace ws;
  std::vector<double> grad(net.parameter_count());
  const double value = loss_and_gradient(net, batch, loss, grad, ws);
  return {value, std::move(grad)};
}

double mean_loss(const Network& net, const DataView& data, Loss loss,
                 GradWorkspace& ws) {
  if (data.count == 0) {
    throw std::invalid_argument("mean_loss: empty dataset");
  }
  const double clamp = net.arch_.output_clamp;
  double total = 0.0;
  for (std::size_t s = 0; s < data.count; ++s) {
    const double raw = net.forward_impl(data.row(s), &ws);
    const double h = std::clamp(raw, -clamp, clamp);
    const double y = data.targets[s];
    if (loss == Loss::square) {
      const double r = h - y;
      total += r * r;
    } else {
      if (y != 1.0 && y != -1.0) {
        throw std::invalid_argument(
            "mean_loss: hinge labels must be -1 or +1, got " + fmt17(y));
      }
      const double margin = 1.0 - y * h;
      if (margin > 0.0) total += margin;
    }
  }
  return total / static_cast<double>(data.count);
}

double mean_loss(const Network& net, const DataView& data, Loss loss) {
  GradWorkspace ws;
  return mean_loss(net, data, loss, ws);
}

void save_network(const Network& net, std::ostream& out) {
  const auto& arch = net.arch();
  out << "spdnn network v1\n";
  out << "input_dim " << arch.input_dim << "\n";
  out << "hidden_widths";
  for (int h : arch.hidden_widths) out << ' ' << h;
  out << "\n";
  out << "output_clamp " << fmt17(arch.output_clamp) << "\n";
  const auto& sizes = net.sizes();
  for (std::size_t j = 1; j < sizes.size(); ++j) {
    const int in = sizes[j - 1];
    const int out_dim = sizes[j];
    out << "layer " << j << " in " << in << " out " << out_dim << "\n";
    const auto w = net.weights(static_cast<int>(j));
    for (int i = 0; i < in; ++i) {
      out << 'w';
      // Row-major in the (input x output) convention: row i lists the
      // weight to every output unit.
      for (int o = 0; o < out_dim; ++o) {
        out << ' ' << fmt17(w[static_cast<std::size_t>(o) * in + i]);
      }
      out << "\n";
    }
    const auto b = net.biases(static_cast<int>(j));
    out << 'b';
    for (int o = 0; o < out_dim; ++o) out << ' ' << fmt17(b[o]);
    out << "\n";
  }
  out << "end\n";
}

Network load_network(std::istream& in) {
  std::string word;
  std::string line;
  if (!std::getline(in, line) || line != "spdnn network v1") {
    throw std::runtime_error("load_network: bad header");
  }
  Architecture arch;
  in >> word >> arch.input_dim;
  if (word != "input_dim") throw std::runtime_error("load_network: expected input_dim");
  in >> word;
  if (word != "hidden_widths") {
    throw std::runtime_error("load_network: expected hidden_widths");
  }
  std::getline(in, line);
  {
    std::istringstream widths(line);
    int h;
    while (widths >> h) arch.hidden_widths.push_back(h);
  }
  std::string clamp_text;
  in >> word >> clamp_text;
  if (word != "output_clamp") {
    throw std::runtime_error("load_network: expected output_clamp");
  }
  arch.output_clamp = std::strtod(clamp_text.c_str(), nullptr);
  Network net(arch);
  const auto& sizes = net.sizes();
  for (std::size_t j = 1; j < sizes.size(); ++j) {
    std::size_t layer_idx;
    int in_dim, out_dim;
    in >> word >> layer_idx;
    if (word != "layer" || layer_idx != j) {
      throw std::runtime_error("load_network: expected layer " + std::to_string(j));
    }
    in >> word >> in_dim >> word >> out_dim;
    if (in_dim != sizes[j - 1] || out_dim != sizes[j]) {
      throw std::runtime_error("load_network: layer " + std::to_string(j) +
                               " has inconsistent dimensions");
    }
    auto w = net.weights(static_cast<int>(j));
    for (int i = 0; i < in_dim; ++i) {
      in >> word;
      if (word != "w") throw std::runtime_error("load_network: expected weight row");
      for (int o = 0; o < out_dim; ++o) {
        in >> w[static_cast<std::size_t>(o) * in_dim + i];
      }
    }
    in >> word;
    if (word != "b") throw std::runtime_error("load_network: expected bias row");
    auto b = net.biases(static_cast<int>(j));
    for (int o = 0; o < out_dim; ++o) in >> b[o];
  }
  in >> word;
  if (word != "end" || !in) {
    throw std::runtime_error("load_network: truncated file");
  }
  return net;
}

void save_network_file(const Network& net, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  save_network(net, out);
}

Network load_network_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open for reading: " + path);
  return load_network(in);
}

std::string network_to_string(const Network& net) {
  std::ostringstream out;
  save_network(net, out);
  return out.str();
}

}  // namespace spdnn
