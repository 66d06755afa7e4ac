#ifndef GRANGER_TESTS_SUPPORT_HPP
#define GRANGER_TESTS_SUPPORT_HPP

#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "granger/simulation.hpp"
#include "granger/timeseries.hpp"

namespace testing {

inline Eigen::MatrixXd gaussian_matrix(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols,
                                       double sd = 1.0) {
  std::normal_distribution<double> n(0.0, sd);
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = n(rng);
  }
  return m;
}

inline granger::TimeSeriesMatrix white_noise(std::uint64_t seed, std::size_t rows, std::size_t cols) {
  std::mt19937_64 rng(seed);
  return granger::TimeSeriesMatrix(
      gaussian_matrix(rng, static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols)));
}

/// 3-node network with a fixed noise variance and a custom length.
inline granger::NetworkSpec three_node(double variance, std::size_t kept, std::size_t burn_in = 700) {
  granger::NetworkSpec s = granger::builtin_3node();
  s.noise_variances.assign(3, granger::NoiseRange{variance, variance});
  s.burn_in = burn_in;
  s.total_len = burn_in + kept;
  return s;
}

/// x = AR(2) of node 1 alone; y independent white noise.
inline granger::NetworkSpec ar2_plus_noise(std::size_t kept) {
  granger::NetworkSpec s;
  s.n_nodes = 2;
  s.coefficients = {{0, 0, 1, 1.5}, {0, 0, 2, -0.9}};
  s.noise_variances.assign(2, granger::NoiseRange{0.25, 0.25});
  s.burn_in = 700;
  s.total_len = 700 + kept;
  s.initial_values.assign(2, 1.0);
  return s;
}

}  // namespace testing

#endif  // GRANGER_TESTS_SUPPORT_HPP
