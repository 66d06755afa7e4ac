#ifndef GRANGER_MARKOV_MDL_HPP
#define GRANGER_MARKOV_MDL_HPP

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace granger {

/// Crude two-part code for binary Markov chains. Everything here is in bits.

/// -n1 log2(theta) - n0 log2(1 - theta). Throws ValidationError when a symbol
/// with zero probability is observed or theta is outside [0, 1].
double bernoulli_code_length(std::span<const std::uint8_t> bits, double theta);

/// Universal code for positive integers: log2 j + 2 log2(log2(j + 1) + 1) + 1.
double universal_integer_bits(std::uint64_t j);

/// Parameter grid for precision d: { i / (2^d - 1) : i = 0 .. 2^d - 1 }, so
/// 2^d points including both 0 and 1.
std::vector<double> precision_grid(unsigned d);

struct MarkovMdlResult {
  unsigned gamma = 0;          ///< chain order; contexts k = 2^gamma
  std::size_t k = 1;
  unsigned d = 1;              ///< bits of precision per parameter
  std::vector<double> theta_hat;  ///< quantized P(1 | context), context as a gamma-bit integer
  double data_bits = 0.0;      ///< gamma-bit prefix plus conditional code
  double param_bits = 0.0;     ///< k * d
  double index_bits = 0.0;     ///< L_N(k) + L_N(d)
  double total_bits = 0.0;
};

/// Data part for a fixed (gamma, d): the first gamma symbols cost one bit each,
/// the rest are coded with the best grid parameter per context.
MarkovMdlResult markov_code_length(std::span<const std::uint8_t> bits, unsigned gamma, unsigned d);

/// Exhaustive search over gamma = 0..gamma_max and d = 1..d_max. Ties resolve
/// to the smaller gamma, then the smaller d.
MarkovMdlResult markov_mdl(std::span<const std::uint8_t> bits, unsigned gamma_max, unsigned d_max);

}  // namespace granger

#endif  // GRANGER_MARKOV_MDL_HPP
