#include "granger/markov_mdl.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "granger/errors.hpp"

namespace granger {

namespace {

void check_bits(std::span<const std::uint8_t> bits) {
  for (auto b : bits) {
    if (b > 1) throw ValidationError("binary sequence holds a value other than 0 or 1");
  }
}

// -n1 log2 t - n0 log2(1 - t), with 0 * log 0 = 0 and +inf on an impossible symbol.
double binary_cost(std::size_t n1, std::size_t n0, double theta) {
  double cost = 0.0;
  if (n1 > 0) {
    if (theta <= 0.0) return std::numeric_limits<double>::infinity();
    cost -= static_cast<double>(n1) * std::log2(theta);
  }
  if (n0 > 0) {
    if (theta >= 1.0) return std::numeric_limits<double>::infinity();
    cost -= static_cast<double>(n0) * std::log2(1.0 - theta);
  }
  return cost;
}

}  // namespace

double bernoulli_code_length(std::span<const std::uint8_t> bits, double theta) {
  check_bits(bits);
  if (!(theta >= 0.0 && theta <= 1.0)) throw ValidationError("theta outside [0, 1]");
  std::size_t n1 = 0;
  for (auto b : bits) n1 += b;
  const std::size_t n0 = bits.size() - n1;
  const double cost = binary_cost(n1, n0, theta);
  if (std::isinf(cost)) throw ValidationError("observed a symbol with zero probability");
  return cost;
}

double universal_integer_bits(std::uint64_t j) {
  if (j == 0) throw ValidationError("universal integer code is defined for j >= 1");
  const double x = static_cast<double>(j);
  return std::log2(x) + 2.0 * std::log2(std::log2(x + 1.0) + 1.0) + 1.0;
}

std::vector<double> precision_grid(unsigned d) {
  if (d == 0 || d > 30) throw ValidationError("precision must be in 1..30 bits");
  const std::size_t n = std::size_t{1} << d;
  std::vector<double> grid(n);
  for (std::size_t i = 0; i < n; ++i) grid[i] = static_cast<double>(i) / static_cast<double>(n - 1);
  return grid;
}

MarkovMdlResult markov_code_length(std::span<const std::uint8_t> bits, unsigned gamma, unsigned d) {
  check_bits(bits);
  if (bits.empty()) throw ValidationError("empty binary sequence");
  if (bits.size() <= gamma) throw ValidationError("sequence shorter than the chain order");
  if (gamma > 20) throw ValidationError("chain order above 20 is not supported");
  if (d == 0 || d > 30) throw ValidationError("precision must be in 1..30 bits");

  const std::size_t k = std::size_t{1} << gamma;
  std::vector<std::size_t> ones(k, 0), zeros(k, 0);
  const std::size_t mask = k - 1;
  std::size_t context = 0;
  for (std::size_t i = 0; i < bits.size(); ++i) {
    if (i >= gamma) (bits[i] ? ones : zeros)[context]++;
    context = ((context << 1) | bits[i]) & mask;
  }

  const double steps = static_cast<double>((std::size_t{1} << d) - 1);
  MarkovMdlResult r;
  r.gamma = gamma;
  r.k = k;
  r.d = d;
  r.data_bits = static_cast<double>(gamma);
  for (std::size_t c = 0; c < k; ++c) {
    const std::size_t total = ones[c] + zeros[c];
    const double mle = total ? static_cast<double>(ones[c]) / static_cast<double>(total) : 0.5;
    // Convex in theta, so the best grid point brackets the MLE.
    const double lo = std::floor(mle * steps) / steps;
    const double hi = std::ceil(mle * steps) / steps;
    const double cost_lo = binary_cost(ones[c], zeros[c], lo);
    const double cost_hi = binary_cost(ones[c], zeros[c], hi);
    const bool take_lo = cost_lo < cost_hi || (cost_lo == cost_hi && std::abs(mle - lo) <= std::abs(hi - mle));
    r.theta_hat.push_back(take_lo ? lo : hi);
    r.data_bits += take_lo ? cost_lo : cost_hi;
  }
  r.param_bits = static_cast<double>(k) * static_cast<double>(d);
  r.index_bits = universal_integer_bits(k) + universal_integer_bits(d);
  r.total_bits = r.data_bits + r.param_bits + r.index_bits;
  return r;
}

MarkovMdlResult markov_mdl(std::span<const std::uint8_t> bits, unsigned gamma_max, unsigned d_max) {
  if (bits.empty()) throw ValidationError("empty binary sequence");
  if (d_max == 0) throw ValidationError("d_max must be at least 1");
  if (bits.size() <= gamma_max) throw ValidationError("sequence must be longer than gamma_max");
  MarkovMdlResult best;
  best.total_bits = std::numeric_limits<double>::infinity();
  for (unsigned gamma = 0; gamma <= gamma_max; ++gamma) {
    for (unsigned d = 1; d <= d_max; ++d) {
      auto r = markov_code_length(bits, gamma, d);
      if (r.total_bits < best.total_bits || best.theta_hat.empty()) best = std::move(r);
    }
  }
  return best;
}

}  // namespace granger
