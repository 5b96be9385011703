#include "spdnn/dgp.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "spdnn/rng.hpp"

namespace spdnn {

namespace {

constexpr std::uint64_t kExogStream = 0x65786f67;   // "exog"
constexpr std::uint64_t kNoiseStream = 0x6e6f6973;  // "nois"

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// AR(1) path of length n including transients, zero start.
std::vector<double> ar1_path(std::size_t n, Rng& rng, double phi,
                             bool zero_noise) {
  std::vector<double> x(n, 0.0);
  double prev = 0.0;
  for (std::size_t t = 0; t < n; ++t) {
    const double u = zero_noise ? 0.0 : rng.standardized_uniform();
    prev = phi * prev + u;
    x[t] = prev;
  }
  return x;
}

}  // namespace

TaskKind task_of(DgpKind kind) {
  return (kind == DgpKind::dgp1 || kind == DgpKind::dgp2)
             ? TaskKind::regression
             : TaskKind::binary;
}

int lag_order(DgpKind kind) {
  switch (kind) {
    case DgpKind::dgp1: return 3;
    case DgpKind::dgp2: return 1;
    case DgpKind::dgp3: return 1;
    case DgpKind::dgp4: return 2;
  }
  throw std::invalid_argument("lag_order: bad kind");
}

int feature_dim(DgpKind kind) { return lag_order(kind) + 1; }

const char* to_string(DgpKind kind) {
  switch (kind) {
    case DgpKind::dgp1: return "dgp1";
    case DgpKind::dgp2: return "dgp2";
    case DgpKind::dgp3: return "dgp3";
    case DgpKind::dgp4: return "dgp4";
  }
  return "?";
}

DgpKind dgp_from_string(const std::string& name) {
  std::string s = name;
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  if (s == "dgp1" || s == "1") return DgpKind::dgp1;
  if (s == "dgp2" || s == "2") return DgpKind::dgp2;
  if (s == "dgp3" || s == "3") return DgpKind::dgp3;
  if (s == "dgp4" || s == "4") return DgpKind::dgp4;
  throw std::invalid_argument("unknown DGP: " + name);
}

std::vector<double> simulate_exog_ar1(std::size_t n, std::uint64_t seed,
                                      double phi, int burn_in) {
  if (n < 1) throw std::invalid_argument("simulate_exog_ar1: n must be >= 1");
  Rng rng(seed);
  auto path = ar1_path(n + static_cast<std::size_t>(burn_in), rng, phi, false);
  return {path.end() - static_cast<std::ptrdiff_t>(n), path.end()};
}

double mean_function(DgpKind kind, std::span<const double> x) {
  const std::size_t expected = static_cast<std::size_t>(feature_dim(kind));
  if (x.size() != expected) {
    throw std::invalid_argument(
        std::string("mean_function: ") + to_string(kind) + " expects " +
        std::to_string(expected) + " features, got " +
        std::to_string(x.size()));
  }
  switch (kind) {
    case DgpKind::dgp1:
      return 1.0 - 0.2 * x[0] + 0.3 * x[1] + 0.25 * x[2] -
             0.6 / (1.0 + x[3] * x[3]);
    case DgpKind::dgp2:
      return 0.5 + (-0.4 + 0.25 * std::exp(-2.0 * x[0] * x[0])) * x[0] +
             1.5 * x[1];
    case DgpKind::dgp3:
      return -0.15 + (0.1 - 0.2 * std::exp(-0.5 * x[0] * x[0])) * x[0] +
             0.25 / (1.0 + x[1] * x[1]);
    case DgpKind::dgp4:
      return 0.1 + 0.15 * x[0] - 0.25 * x[1] - 0.2 * std::exp(-x[2] * x[2]);
  }
  throw std::invalid_argument("mean_function: bad kind");
}

int bayes_classifier(DgpKind kind, std::span<const double> x) {
  if (task_of(kind) != TaskKind::binary) {
    throw std::invalid_argument(
        std::string("bayes_classifier: ") + to_string(kind) +
        " is not a classification process");
  }
  return label_from_score(mean_function(kind, x));
}

Trajectory simulate(DgpKind kind, std::size_t n, std::uint64_t seed,
                    const SimOptions& options) {
  if (n < 1) throw std::invalid_argument("simulate: n must be >= 1");
  if (options.burn_in < 0) {
    throw std::invalid_argument("simulate: burn_in must be >= 0");
  }
  const int p = lag_order(kind);
  int lags = options.feature_lags > 0 ? options.feature_lags : p;
  if (options.burn_in < lags) {
    throw std::invalid_argument("simulate: burn_in must cover the lag order");
  }
  const TaskKind task = task_of(kind);
  const std::size_t total = n + static_cast<std::size_t>(options.burn_in);

  std::vector<double> exog;
  if (options.frozen_exog) {
    exog.assign(total, *options.frozen_exog);
  } else {
    Rng exog_rng(hash64(seed, kExogStream));
    exog = ar1_path(total, exog_rng, options.exog_phi, options.zero_noise);
  }

  Rng noise_rng(hash64(seed, kNoiseStream));
  std::vector<double> y(total, 0.0);
  std::vector<double> state(static_cast<std::size_t>(p) + 1);
  for (std::size_t t = 0; t < total; ++t) {
    for (int k = 1; k <= p; ++k) {
      const std::ptrdiff_t idx = static_cast<std::ptrdiff_t>(t) - k;
      state[static_cast<std::size_t>(k - 1)] = idx >= 0 ? y[idx] : 0.0;
    }
    state[static_cast<std::size_t>(p)] =
        t >= 1 ? exog[t - 1] : (options.frozen_exog ? *options.frozen_exog : 0.0);
    const double f = mean_function(kind, state);
    if (task == TaskKind::regression) {
      const double eps =
          options.zero_noise ? 0.0 : noise_rng.standardized_uniform();
      y[t] = f + eps;
    } else {
      const double prob = std::clamp((1.0 + f) / 2.0, 0.0, 1.0);
      y[t] = noise_rng.unit() < prob ? 1.0 : -1.0;
    }
    if (!std::isfinite(y[t])) {
      throw std::runtime_error(
          "simulate: non-finite recursion value at step " + std::to_string(t) +
          " (explosive parameters)");
    }
  }

  Trajectory traj;
  traj.kind = kind;
  traj.feature_dim = lags + 1;
  traj.seed = seed;
  traj.burn_in_used = options.burn_in;
  traj.targets.resize(n);
  traj.features.resize(n * static_cast<std::size_t>(lags + 1));
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t t = static_cast<std::size_t>(options.burn_in) + i;
    traj.targets[i] = y[t];
    double* row = traj.features.data() + i * static_cast<std::size_t>(lags + 1);
    for (int k = 1; k <= lags; ++k) row[k - 1] = y[t - static_cast<std::size_t>(k)];
    row[lags] = exog[t - 1];
  }
  return traj;
}

void save_trajectory(const Trajectory& traj, std::ostream& out) {
  out << "# spdnn trajectory v1\n";
  out << "# kind=" << to_string(traj.kind) << " n=" << traj.size()
      << " seed=" << traj.seed << " burn_in=" << traj.burn_in_used
      << " feature_dim=" << traj.feature_dim << "\n";
  for (int c = 1; c <= traj.feature_dim; ++c) out << 'x' << c << '\t';
  out << "y\n";
  for (std::size_t t = 0; t < traj.size(); ++t) {
    const auto row = traj.row(t);
    for (double v : row) out << fmt17(v) << '\t';
    out << fmt17(traj.targets[t]) << '\n';
  }
}

Trajectory load_trajectory(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != "# spdnn trajectory v1") {
    throw std::runtime_error("load_trajectory: bad header");
  }
  if (!std::getline(in, line) || line.rfind("# ", 0) != 0) {
    throw std::runtime_error("load_trajectory: missing metadata line");
  }
  Trajectory traj;
  std::size_t n = 0;
  {
    std::istringstream meta(line.substr(2));
    std::string kv;
    while (meta >> kv) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) continue;
      const std::string key = kv.substr(0, eq);
      const std::string value = kv.substr(eq + 1);
      if (key == "kind") traj.kind = dgp_from_string(value);
      else if (key == "n") n = std::stoull(value);
      else if (key == "seed") traj.seed = std::stoull(value);
      else if (key == "burn_in") traj.burn_in_used = std::stoi(value);
      else if (key == "feature_dim") traj.feature_dim = std::stoi(value);
    }
  }
  if (traj.feature_dim < 1) {
    throw std::runtime_error("load_trajectory: bad feature_dim");
  }
  std::getline(in, line);  // column names
  traj.features.reserve(n * static_cast<std::size_t>(traj.feature_dim));
  traj.targets.reserve(n);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    for (int c = 0; c < traj.feature_dim; ++c) {
      double v;
      if (!(row >> v)) {
        throw std::runtime_error("load_trajectory: short row");
      }
      traj.features.push_back(v);
    }
    double y;
    if (!(row >> y)) throw std::runtime_error("load_trajectory: missing target");
    traj.targets.push_back(y);
  }
  if (n != 0 && traj.size() != n) {
    throw std::runtime_error("load_trajectory: row count disagrees with header");
  }
  return traj;
}

void save_trajectory_file(const Trajectory& traj, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  save_trajectory(traj, out);
}

Trajectory load_trajectory_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open for reading: " + path);
  return load_trajectory(in);
}

}  // namespace spdnn
