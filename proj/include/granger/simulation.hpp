#ifndef GRANGER_SIMULATION_HPP
#define GRANGER_SIMULATION_HPP

#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "granger/causality.hpp"
#include "granger/timeseries.hpp"

namespace granger {

/// One term of a linear difference equation: target(t) += value * source(t - lag).
/// Nodes are 0-based.
struct Coefficient {
  std::size_t target = 0;
  std::size_t source = 0;
  std::size_t lag = 1;
  double value = 0.0;
};

/// Noise variance drawn uniformly from [lo, hi] once per trial; lo == hi is a
/// fixed variance.
struct NoiseRange {
  double lo = 0.0;
  double hi = 0.0;
};

struct NetworkSpec {
  std::string name;
  std::size_t n_nodes = 0;
  std::vector<Coefficient> coefficients;
  std::vector<NoiseRange> noise_variances;
  std::size_t total_len = 1000;
  std::size_t burn_in = 700;
  /// Value of every node for the first max_lag steps, one entry per node.
  std::vector<double> initial_values;
  std::vector<std::string> labels;

  std::size_t max_lag() const noexcept;
  void check() const;
  /// Directed cross-node edges (source -> target) with a non-zero coefficient.
  Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> true_edges() const;
  std::vector<std::string> node_labels() const;
};

enum class NoiseLevel { kLow, kModerate, kHigh };
/// kSection: 0.15-0.35, 0.25-0.45, 0.35-0.55. kTable: ten times that.
enum class NoiseScale { kSection, kTable };

NoiseLevel noise_level_from_string(const std::string& s);
std::string to_string(NoiseLevel level);
NoiseRange noise_preset(NoiseLevel level, NoiseScale scale = NoiseScale::kSection);

NetworkSpec builtin_3node(NoiseLevel level = NoiseLevel::kLow, NoiseScale scale = NoiseScale::kSection);
NetworkSpec builtin_5node();

/// Seed of trial `index`, independent of how trials are scheduled.
std::uint64_t child_seed(std::uint64_t master_seed, std::uint64_t index);

/// Runs the difference equations with Gaussian noise and drops the burn-in
/// rows. Identical seeds give bit-identical output.
TimeSeriesMatrix simulate(const NetworkSpec& spec, std::uint64_t seed);

/// The per-trial noise variances that simulate(spec, seed) uses.
std::vector<double> drawn_noise_variances(const NetworkSpec& spec, std::uint64_t seed);

struct TrialFailure {
  std::size_t trial = 0;
  std::string message;
};

struct BenchReport {
  std::string network;
  NetworkParams params;
  std::size_t n_nodes = 0;
  std::size_t n_trials = 0;
  std::uint64_t master_seed = 0;
  /// detection_counts(from, to): trials in which from -> to was reported.
  Eigen::Matrix<std::size_t, Eigen::Dynamic, Eigen::Dynamic> detection_counts;
  Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> truth;
  std::vector<double> per_node_accuracy;
  double total_accuracy = 0.0;
  std::vector<TrialFailure> failures;
  std::vector<std::string> labels;
};

/// Trials run on `threads` workers (0: all cores). The report does not depend
/// on the thread count. A failed trial counts as inaccurate for every node.
BenchReport run_bench(const NetworkSpec& spec, const NetworkParams& params, std::size_t n_trials,
                      std::uint64_t master_seed, std::size_t threads = 0);

}  // namespace granger

#endif  // GRANGER_SIMULATION_HPP
