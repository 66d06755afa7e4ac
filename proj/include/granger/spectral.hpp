#ifndef GRANGER_SPECTRAL_HPP
#define GRANGER_SPECTRAL_HPP

#include <complex>
#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "granger/model_selection.hpp"
#include "granger/regression.hpp"
#include "granger/timeseries.hpp"

namespace granger {

/// Bivariate VAR in lag-operator form A(L) [x, y]^T = [e, h]^T with A(0) = I.
/// `lag_polynomial[l - 1]` is A_l, the NEGATED regression coefficients at
/// lag l: row 0 is the x equation, row 1 the y equation.
struct BivariateVar {
  std::size_t order = 0;
  std::vector<Eigen::Matrix2d> lag_polynomial;
  ResidualCovariance noise_cov;

  /// Spectral radius of the companion form of the regression coefficients.
  double stability_radius() const;
  /// Same model with the roles of x and y exchanged.
  BivariateVar swapped() const;
};

/// Two per-equation least-squares fits on a shared response window (default
/// start: `order`).
BivariateVar fit_bivariate_var(const TimeSeriesMatrix& ts, std::size_t x, std::size_t y,
                               std::size_t order,
                               std::optional<std::size_t> window_start = std::nullopt);

/// Order minimizing the summed code length of both equations over 1..p_max.
std::size_t select_bivariate_order(const TimeSeriesMatrix& ts, std::size_t x, std::size_t y,
                                   std::size_t p_max, const MdlOptions& mdl = {});

/// A(e^{-i omega}) = I + sum_l A_l e^{-i omega l}.
Eigen::Matrix2cd lag_polynomial_at(const BivariateVar& model, double omega);

/// P = [[1, 0], [-cov_xy / var_x, 1]], which makes the normalized noise pair
/// uncorrelated.
Eigen::Matrix2d normalization_matrix(const BivariateVar& model);

/// D(omega) = (P A(e^{-i omega}))^{-1}; nullopt when the condition number of
/// P A reaches 1e12.
std::optional<Eigen::Matrix2cd> transfer_matrix(const BivariateVar& model, double omega);

struct SpectralCausality {
  double sample_rate_hz = 1.0;
  std::vector<double> frequencies_hz;
  std::vector<double> f_y_to_x;  ///< nats; NaN at singular frequencies
  std::vector<double> f_x_to_y;
  std::vector<Eigen::Matrix2cd> spectra;
  std::vector<bool> singular;
};

/// Frequency-resolved causality in both directions. Frequencies must lie in
/// (0, sample_rate/2].
SpectralCausality geweke_spectrum(const BivariateVar& model, std::span<const double> frequencies_hz,
                                  double sample_rate_hz = 1.0);

/// f_{y->x}(omega) at one angular frequency (radians/sample); NaN if singular.
double spectral_causality_at(const BivariateVar& model, double omega);

/// (1/pi) * integral over (0, pi) of f_{y->x}, by the midpoint rule. For a
/// stable model this approaches the time-domain measure ln(var_restricted /
/// var_unrestricted).
double integrated_spectral_causality(const BivariateVar& model, std::size_t points = 4096);

/// With a sample rate: 1..30 Hz plus 50 and 100 Hz (kept up to Nyquist).
/// Without: 64 uniform points strictly inside (0, pi) rad/sample, reported as
/// cycles/sample.
std::vector<double> default_frequency_grid(std::optional<double> sample_rate_hz);

/// Parses "1:30,50,100": comma-separated values and inclusive integer-step
/// ranges a:b (or a:b:step).
std::vector<double> parse_frequency_grid(const std::string& text);

/// CSV with columns frequency_hz, f_y_to_x, f_x_to_y.
void write_spectral_csv(std::ostream& out, const SpectralCausality& sc);

}  // namespace granger

#endif  // GRANGER_SPECTRAL_HPP
