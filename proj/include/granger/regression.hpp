#ifndef GRANGER_REGRESSION_HPP
#define GRANGER_REGRESSION_HPP

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "granger/timeseries.hpp"

namespace granger {

/// Singular-value ratio below which a design is declared rank deficient.
inline constexpr double kRankTolerance = 1e-10;

struct LagTerm {
  std::size_t variable = 0;
  /// Number of lags 1..lags; 0 contributes no columns.
  std::size_t lags = 0;
};

/// Lag structure of one regression: the target and, for each predictor in
/// order, how many of its past values enter the design.
struct LagSpec {
  std::size_t target = 0;
  std::vector<LagTerm> predictors;

  std::size_t max_lag() const noexcept;
  std::size_t n_columns() const noexcept;
  /// ValidationError unless every variable is below `n_vars`, the target
  /// appears at most once, and at least one predictor has a lag.
  void check(std::size_t n_vars) const;
};

struct Design {
  Eigen::MatrixXd matrix;
  Eigen::VectorXd response;
};

/// Lagged design for `spec`. The response holds the target from row
/// `window_start` (default: the spec's max lag) to the end; column order is
/// predictor by predictor, lags 1..L within each. `window_start` lets several
/// specs share one response window.
Design build_design(const TimeSeriesMatrix& ts, const LagSpec& spec,
                    std::optional<std::size_t> window_start = std::nullopt);

struct OlsFit {
  Eigen::VectorXd coefficients;
  Eigen::VectorXd residuals;
  double rss = 0.0;
  std::size_t m = 0;  ///< rows used
  std::size_t k = 0;  ///< regression coefficients
  double sigma2_mle = 0.0;  ///< rss / m
  double response_ss = 0.0;  ///< sum of squared responses, the scale for degeneracy checks
};

/// Least squares through Householder QR. Throws RankDeficientError (naming
/// the columns in the near-null direction) when the singular-value ratio of
/// the design is below kRankTolerance, ValidationError when rows < columns.
OlsFit ols_fit(const Eigen::MatrixXd& design, const Eigen::VectorXd& response);

/// Fits the shared-order family y ~ lags 1..n of every listed variable,
/// n = 1..p_max, on one response window with a single factorization. Each
/// returned OlsFit is ordered exactly as build_design would order the
/// equivalent LagSpec (variables in the given order, lags ascending).
class NestedOrderFits {
 public:
  NestedOrderFits(const TimeSeriesMatrix& ts, std::size_t target,
                  std::span<const std::size_t> variables, std::size_t p_max,
                  std::size_t window_start);

  std::size_t p_max() const noexcept { return p_max_; }
  std::size_t window_rows() const noexcept { return static_cast<std::size_t>(response_.size()); }

  OlsFit fit(std::size_t order) const;
  double rss(std::size_t order) const;

 private:
  void check_rank(std::size_t order) const;

  std::size_t n_vars_;
  std::size_t p_max_;
  Eigen::VectorXd response_;
  Eigen::MatrixXd design_;  // lag-major: lag 1 of every variable, then lag 2, ...
  Eigen::HouseholderQR<Eigen::MatrixXd> qr_;
  Eigen::VectorXd qty_;
  bool full_rank_all_orders_ = false;
};

/// 2x2 contemporaneous residual covariance (divisor m).
struct ResidualCovariance {
  Eigen::Matrix2d matrix = Eigen::Matrix2d::Zero();
};

ResidualCovariance residual_covariance(const OlsFit& fit_x, const OlsFit& fit_y);

/// Companion form of a VAR(p) x_t = sum_l A_l x_{t-l} + e_t.
Eigen::MatrixXd companion_matrix(std::span<const Eigen::MatrixXd> lag_coefficients);
/// Largest eigenvalue modulus.
double spectral_radius(const Eigen::MatrixXd& companion);
/// Convenience for a univariate AR with coefficients a_1..a_p.
double ar_spectral_radius(std::span<const double> coefficients);

struct NormalityTest {
  double statistic = 0.0;
  double p_value = 1.0;
};

/// Jarque-Bera test against the chi-square(2) reference distribution.
NormalityTest jarque_bera(const Eigen::VectorXd& residuals);

}  // namespace granger

#endif  // GRANGER_REGRESSION_HPP
