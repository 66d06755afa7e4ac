#include "granger/simulation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <optional>
#include <random>
#include <thread>

#include "granger/errors.hpp"

namespace granger {

std::size_t NetworkSpec::max_lag() const noexcept {
  std::size_t out = 0;
  for (const auto& c : coefficients) out = std::max(out, c.lag);
  return out;
}

void NetworkSpec::check() const {
  if (n_nodes == 0) throw ValidationError("network has no nodes");
  if (burn_in >= total_len) {
    throw ValidationError("burn_in (" + std::to_string(burn_in) + ") must be less than total_len (" +
                          std::to_string(total_len) + ")");
  }
  for (std::size_t i = 0; i < coefficients.size(); ++i) {
    const auto& c = coefficients[i];
    const std::string where = "coefficients[" + std::to_string(i) + "]";
    if (c.target >= n_nodes) throw ValidationError(where + ".target out of range");
    if (c.source >= n_nodes) throw ValidationError(where + ".source out of range");
    if (c.lag == 0) throw ValidationError(where + ".lag must be at least 1");
    if (!std::isfinite(c.value)) throw ValidationError(where + ".value is not finite");
  }
  if (noise_variances.size() != n_nodes) {
    throw ValidationError("noise_variances needs one entry per node");
  }
  for (std::size_t i = 0; i < n_nodes; ++i) {
    const auto& r = noise_variances[i];
    if (!(r.lo >= 0.0) || !(r.hi >= r.lo) || !std::isfinite(r.hi)) {
      throw ValidationError("noise_variances[" + std::to_string(i) + "] must satisfy 0 <= lo <= hi");
    }
  }
  if (initial_values.size() != n_nodes) {
    throw ValidationError("initial_values needs one entry per node");
  }
  if (!labels.empty() && labels.size() != n_nodes) {
    throw ValidationError("labels needs one entry per node");
  }
  if (max_lag() >= total_len) throw ValidationError("total_len does not exceed the largest lag");
}

Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> NetworkSpec::true_edges() const {
  const auto n = static_cast<Eigen::Index>(n_nodes);
  Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> e = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>::Constant(n, n, false);
  for (const auto& c : coefficients) {
    if (c.source != c.target && c.value != 0.0) {
      e(static_cast<Eigen::Index>(c.source), static_cast<Eigen::Index>(c.target)) = true;
    }
  }
  return e;
}

std::vector<std::string> NetworkSpec::node_labels() const {
  if (!labels.empty()) return labels;
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n_nodes; ++i) out.push_back(std::to_string(i + 1));
  return out;
}

NoiseLevel noise_level_from_string(const std::string& s) {
  if (s == "low") return NoiseLevel::kLow;
  if (s == "moderate") return NoiseLevel::kModerate;
  if (s == "high") return NoiseLevel::kHigh;
  throw ValidationError("unknown noise level '" + s + "' (low, moderate, high)");
}

std::string to_string(NoiseLevel level) {
  switch (level) {
    case NoiseLevel::kLow: return "low";
    case NoiseLevel::kModerate: return "moderate";
    case NoiseLevel::kHigh: return "high";
  }
  return "?";
}

NoiseRange noise_preset(NoiseLevel level, NoiseScale scale) {
  NoiseRange r;
  switch (level) {
    case NoiseLevel::kLow: r = {0.15, 0.35}; break;
    case NoiseLevel::kModerate: r = {0.25, 0.45}; break;
    case NoiseLevel::kHigh: r = {0.35, 0.55}; break;
  }
  if (scale == NoiseScale::kTable) {
    r.lo *= 10.0;
    r.hi *= 10.0;
  }
  return r;
}

NetworkSpec builtin_3node(NoiseLevel level, NoiseScale scale) {
  NetworkSpec s;
  s.name = "3node";
  s.n_nodes = 3;
  s.coefficients = {
      {0, 0, 1, 1.5}, {0, 0, 2, -0.9},
      {1, 0, 1, 0.8}, {1, 1, 1, 0.2},
      {2, 0, 1, -0.8}, {2, 2, 1, 0.4},
  };
  s.noise_variances.assign(3, noise_preset(level, scale));
  s.total_len = 1000;
  s.burn_in = 700;
  s.initial_values.assign(3, 1.0);
  return s;
}

NetworkSpec builtin_5node() {
  NetworkSpec s;
  s.name = "5node";
  s.n_nodes = 5;
  s.coefficients = {
      {0, 0, 1, 0.792}, {0, 0, 2, -0.278},
      {1, 1, 1, 0.768}, {1, 1, 2, -0.503}, {1, 0, 1, 0.83}, {1, 0, 2, -0.32},
      {2, 2, 1, 0.67}, {2, 2, 2, -0.312}, {2, 1, 1, 0.56}, {2, 1, 2, -0.42},
      {3, 3, 1, 0.733}, {3, 3, 2, -0.27}, {3, 1, 1, 0.72}, {3, 1, 2, -0.27},
      {3, 2, 1, 0.52}, {3, 2, 2, -0.456}, {3, 4, 1, 0.76}, {3, 4, 2, -0.33},
      {4, 4, 1, 0.845}, {4, 4, 2, -0.24}, {4, 3, 1, 0.68}, {4, 3, 2, -0.254},
  };
  s.noise_variances.assign(5, NoiseRange{0.15, 0.3});
  s.total_len = 1000;
  s.burn_in = 700;
  s.initial_values.assign(5, 1.0);
  return s;
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::vector<double> draw_variances(const NetworkSpec& spec, std::mt19937_64& rng) {
  std::vector<double> out;
  for (const auto& r : spec.noise_variances) {
    if (r.lo == r.hi) {
      out.push_back(r.lo);
    } else {
      out.push_back(std::uniform_real_distribution<double>(r.lo, r.hi)(rng));
    }
  }
  return out;
}

}  // namespace

std::uint64_t child_seed(std::uint64_t master_seed, std::uint64_t index) {
  return splitmix64(splitmix64(master_seed) ^ splitmix64(~index));
}

std::vector<double> drawn_noise_variances(const NetworkSpec& spec, std::uint64_t seed) {
  spec.check();
  std::mt19937_64 rng(seed);
  return draw_variances(spec, rng);
}

TimeSeriesMatrix simulate(const NetworkSpec& spec, std::uint64_t seed) {
  spec.check();
  std::mt19937_64 rng(seed);
  const std::vector<double> variances = draw_variances(spec, rng);
  std::vector<double> sd;
  for (double v : variances) sd.push_back(std::sqrt(v));

  const auto n = static_cast<Eigen::Index>(spec.n_nodes);
  const auto len = static_cast<Eigen::Index>(spec.total_len);
  const auto start = static_cast<Eigen::Index>(std::max<std::size_t>(spec.max_lag(), 1));
  Eigen::MatrixXd x(len, n);
  for (Eigen::Index t = 0; t < std::min(start, len); ++t) {
    for (Eigen::Index i = 0; i < n; ++i) x(t, i) = spec.initial_values[static_cast<std::size_t>(i)];
  }
  std::normal_distribution<double> normal(0.0, 1.0);
  for (Eigen::Index t = start; t < len; ++t) {
    for (Eigen::Index i = 0; i < n; ++i) x(t, i) = sd[static_cast<std::size_t>(i)] * normal(rng);
    for (const auto& c : spec.coefficients) {
      x(t, static_cast<Eigen::Index>(c.target)) +=
          c.value * x(t - static_cast<Eigen::Index>(c.lag), static_cast<Eigen::Index>(c.source));
    }
    for (Eigen::Index i = 0; i < n; ++i) {
      if (!(std::abs(x(t, i)) <= 1e12)) {
        throw DivergenceError("trajectory diverged at node " + std::to_string(i + 1) + ", step " +
                                  std::to_string(t),
                              static_cast<std::size_t>(i), static_cast<std::size_t>(t));
      }
    }
  }
  const auto keep = len - static_cast<Eigen::Index>(spec.burn_in);
  return TimeSeriesMatrix(x.bottomRows(keep), spec.node_labels());
}

BenchReport run_bench(const NetworkSpec& spec, const NetworkParams& params, std::size_t n_trials,
                      std::uint64_t master_seed, std::size_t threads) {
  spec.check();
  params.check();
  if (n_trials == 0) throw ValidationError("n_trials must be at least 1");

  using Adjacency = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;
  struct Outcome {
    std::optional<Adjacency> adjacency;
    std::string error;
  };
  std::vector<Outcome> outcomes(n_trials);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n_trials; i = next++) {
      try {
        const TimeSeriesMatrix ts = simulate(spec, child_seed(master_seed, i));
        outcomes[i].adjacency = infer_network(demeaned(ts), params).adjacency;
      } catch (const std::exception& e) {
        outcomes[i].error = e.what();
      }
    }
  };
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, n_trials);
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  }

  BenchReport report;
  report.network = spec.name;
  report.params = params;
  report.n_nodes = spec.n_nodes;
  report.n_trials = n_trials;
  report.master_seed = master_seed;
  report.labels = spec.node_labels();
  report.truth = spec.true_edges();
  const auto n = static_cast<Eigen::Index>(spec.n_nodes);
  report.detection_counts.setZero(n, n);
  std::vector<std::size_t> node_correct(spec.n_nodes, 0);
  std::size_t total_correct = 0;
  for (std::size_t i = 0; i < n_trials; ++i) {
    const auto& o = outcomes[i];
    if (!o.adjacency) {
      report.failures.push_back({i, o.error});
      continue;
    }
    const Adjacency& a = *o.adjacency;
    for (Eigen::Index r = 0; r < n; ++r) {
      for (Eigen::Index c = 0; c < n; ++c) {
        if (a(r, c)) ++report.detection_counts(r, c);
      }
    }
    const Adjacency wrong = a != report.truth;
    for (Eigen::Index k = 0; k < n; ++k) {
      if (!wrong.row(k).any() && !wrong.col(k).any()) ++node_correct[static_cast<std::size_t>(k)];
    }
    if (!wrong.any()) ++total_correct;
  }
  const double trials = static_cast<double>(n_trials);
  for (auto c : node_correct) report.per_node_accuracy.push_back(static_cast<double>(c) / trials);
  report.total_accuracy = static_cast<double>(total_correct) / trials;
  return report;
}

}  // namespace granger
