#include "granger/regression.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>

#include "granger/errors.hpp"

namespace granger {

std::size_t LagSpec::max_lag() const noexcept {
  std::size_t out = 0;
  for (const auto& p : predictors) out = std::max(out, p.lags);
  return out;
}

std::size_t LagSpec::n_columns() const noexcept {
  std::size_t out = 0;
  for (const auto& p : predictors) out += p.lags;
  return out;
}

void LagSpec::check(std::size_t n_vars) const {
  if (target >= n_vars) throw ValidationError("target index out of range");
  std::size_t target_count = 0;
  for (const auto& p : predictors) {
    if (p.variable >= n_vars) {
      throw ValidationError("predictor index " + std::to_string(p.variable) + " out of range");
    }
    if (p.variable == target) ++target_count;
  }
  if (target_count > 1) throw ValidationError("target listed more than once among predictors");
  if (max_lag() == 0) throw ValidationError("lag spec has no columns (every lag count is 0)");
}

Design build_design(const TimeSeriesMatrix& ts, const LagSpec& spec,
                    std::optional<std::size_t> window_start) {
  spec.check(ts.cols());
  const std::size_t max_lag = spec.max_lag();
  const std::size_t start = window_start.value_or(max_lag);
  if (start < max_lag) throw ValidationError("response window starts before the maximum lag");
  if (ts.rows() <= start) {
    throw ValidationError("series of length " + std::to_string(ts.rows()) +
                          " is too short for lag " + std::to_string(start));
  }
  const auto m = static_cast<Eigen::Index>(ts.rows() - start);
  Design d;
  d.matrix.resize(m, static_cast<Eigen::Index>(spec.n_columns()));
  d.response = ts.column(spec.target).segment(static_cast<Eigen::Index>(start), m);
  Eigen::Index col = 0;
  for (const auto& p : spec.predictors) {
    for (std::size_t lag = 1; lag <= p.lags; ++lag) {
      d.matrix.col(col++) = ts.column(p.variable).segment(static_cast<Eigen::Index>(start - lag), m);
    }
  }
  return d;
}

namespace {

// Smallest/largest singular value of an upper-triangular factor; the same
// spectrum as the design it came from.
double singular_ratio(const Eigen::MatrixXd& r) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(r);
  const auto& s = svd.singularValues();
  if (s.size() == 0 || s(0) == 0.0) return 0.0;
  return s(s.size() - 1) / s(0);
}

std::vector<std::size_t> null_direction_columns(const Eigen::MatrixXd& r) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(r, Eigen::ComputeFullV);
  const Eigen::VectorXd v = svd.matrixV().col(r.cols() - 1);
  const double vmax = v.cwiseAbs().maxCoeff();
  std::vector<std::size_t> cols;
  for (Eigen::Index j = 0; j < v.size(); ++j) {
    if (std::abs(v(j)) > 1e-3 * vmax) cols.push_back(static_cast<std::size_t>(j));
  }
  return cols;
}

std::string join_columns(const std::vector<std::size_t>& cols) {
  std::string s;
  for (auto c : cols) {
    if (!s.empty()) s += ", ";
    s += std::to_string(c);
  }
  return s;
}

OlsFit finish_fit(const Eigen::MatrixXd& design, const Eigen::VectorXd& response,
                  Eigen::VectorXd coefficients) {
  OlsFit fit;
  fit.residuals = response - design * coefficients;
  fit.coefficients = std::move(coefficients);
  fit.rss = fit.residuals.squaredNorm();
  fit.m = static_cast<std::size_t>(response.size());
  fit.k = static_cast<std::size_t>(design.cols());
  fit.sigma2_mle = fit.rss / static_cast<double>(fit.m);
  fit.response_ss = response.squaredNorm();
  return fit;
}

}  // namespace

OlsFit ols_fit(const Eigen::MatrixXd& design, const Eigen::VectorXd& response) {
  const auto k = design.cols();
  if (k == 0) throw ValidationError("design has no columns");
  if (design.rows() != response.size()) throw ValidationError("design/response row mismatch");
  if (design.rows() < k) {
    throw ValidationError("design has fewer rows (" + std::to_string(design.rows()) +
                          ") than columns (" + std::to_string(k) + ")");
  }
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(design);
  const Eigen::MatrixXd r = qr.matrixQR().topLeftCorner(k, k).triangularView<Eigen::Upper>();
  if (singular_ratio(r) < kRankTolerance) {
    const auto cols = null_direction_columns(r);
    throw RankDeficientError("rank-deficient design; dependent columns: " + join_columns(cols), cols);
  }
  const Eigen::VectorXd qty = qr.householderQ().transpose() * response;
  Eigen::VectorXd beta = r.triangularView<Eigen::Upper>().solve(qty.head(k));
  return finish_fit(design, response, std::move(beta));
}

NestedOrderFits::NestedOrderFits(const TimeSeriesMatrix& ts, std::size_t target,
                                 std::span<const std::size_t> variables, std::size_t p_max,
                                 std::size_t window_start)
    : n_vars_(variables.size()), p_max_(p_max) {
  if (variables.empty()) throw ValidationError("no predictor variables");
  if (p_max == 0) throw ValidationError("p_max must be at least 1");
  if (target >= ts.cols()) throw ValidationError("target index out of range");
  for (auto v : variables) {
    if (v >= ts.cols()) throw ValidationError("predictor index out of range");
  }
  if (window_start < p_max) throw ValidationError("response window starts before p_max");
  if (ts.rows() <= window_start) {
    throw ValidationError("series of length " + std::to_string(ts.rows()) +
                          " is too short for lag " + std::to_string(window_start));
  }
  const auto m = static_cast<Eigen::Index>(ts.rows() - window_start);
  const auto k_max = static_cast<Eigen::Index>(n_vars_ * p_max);
  if (m < k_max) {
    throw ValidationError("insufficient samples: " + std::to_string(m) + " rows for " +
                          std::to_string(k_max) + " coefficients");
  }
  response_ = ts.column(target).segment(static_cast<Eigen::Index>(window_start), m);
  design_.resize(m, k_max);
  for (std::size_t lag = 1; lag <= p_max; ++lag) {
    for (std::size_t v = 0; v < n_vars_; ++v) {
      design_.col(static_cast<Eigen::Index>((lag - 1) * n_vars_ + v)) =
          ts.column(variables[v]).segment(static_cast<Eigen::Index>(window_start - lag), m);
    }
  }
  qr_.compute(design_);
  qty_ = qr_.householderQ().transpose() * response_;
  // Dropping columns never shrinks the smallest singular value, so one check
  // on the widest design covers every order.
  const Eigen::MatrixXd r = qr_.matrixQR().topLeftCorner(k_max, k_max).triangularView<Eigen::Upper>();
  full_rank_all_orders_ = singular_ratio(r) >= kRankTolerance;
}

void NestedOrderFits::check_rank(std::size_t order) const {
  if (order == 0 || order > p_max_) throw ValidationError("order outside 1..p_max");
  if (full_rank_all_orders_) return;
  const auto k = static_cast<Eigen::Index>(order * n_vars_);
  const Eigen::MatrixXd r = qr_.matrixQR().topLeftCorner(k, k).triangularView<Eigen::Upper>();
  if (singular_ratio(r) >= kRankTolerance) return;
  std::vector<std::size_t> cols;
  for (auto j : null_direction_columns(r)) {
    const std::size_t var = j % n_vars_;
    const std::size_t lag = j / n_vars_ + 1;
    cols.push_back(var * order + lag - 1);
  }
  std::sort(cols.begin(), cols.end());
  throw RankDeficientError("rank-deficient design at order " + std::to_string(order) +
                               "; dependent columns: " + join_columns(cols),
                           cols);
}

double NestedOrderFits::rss(std::size_t order) const {
  check_rank(order);
  const auto k = static_cast<Eigen::Index>(order * n_vars_);
  return qty_.tail(qty_.size() - k).squaredNorm();
}

OlsFit NestedOrderFits::fit(std::size_t order) const {
  check_rank(order);
  const auto k = static_cast<Eigen::Index>(order * n_vars_);
  const Eigen::VectorXd lag_major = qr_.matrixQR()
                                        .topLeftCorner(k, k)
                                        .triangularView<Eigen::Upper>()
                                        .solve(qty_.head(k));
  const Eigen::Index n = static_cast<Eigen::Index>(order);
  const Eigen::Index nv = static_cast<Eigen::Index>(n_vars_);
  Eigen::VectorXd beta(k);
  Eigen::MatrixXd design(design_.rows(), k);
  for (Eigen::Index lag = 0; lag < n; ++lag) {
    for (Eigen::Index v = 0; v < nv; ++v) {
      beta(v * n + lag) = lag_major(lag * nv + v);
      design.col(v * n + lag) = design_.col(lag * nv + v);
    }
  }
  return finish_fit(design, response_, std::move(beta));
}

ResidualCovariance residual_covariance(const OlsFit& fit_x, const OlsFit& fit_y) {
  if (fit_x.residuals.size() != fit_y.residuals.size()) {
    throw ValidationError("residual vectors differ in length");
  }
  if (fit_x.residuals.size() == 0) throw ValidationError("empty residual vectors");
  const double m = static_cast<double>(fit_x.residuals.size());
  ResidualCovariance cov;
  cov.matrix(0, 0) = fit_x.residuals.squaredNorm() / m;
  cov.matrix(1, 1) = fit_y.residuals.squaredNorm() / m;
  cov.matrix(0, 1) = cov.matrix(1, 0) = fit_x.residuals.dot(fit_y.residuals) / m;
  return cov;
}

Eigen::MatrixXd companion_matrix(std::span<const Eigen::MatrixXd> lag_coefficients) {
  if (lag_coefficients.empty()) throw ValidationError("no lag coefficient matrices");
  const Eigen::Index d = lag_coefficients.front().rows();
  const auto p = static_cast<Eigen::Index>(lag_coefficients.size());
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(d * p, d * p);
  for (Eigen::Index l = 0; l < p; ++l) {
    const auto& a = lag_coefficients[static_cast<std::size_t>(l)];
    if (a.rows() != d || a.cols() != d) throw ValidationError("lag matrices must be square and equal size");
    c.block(0, l * d, d, d) = a;
  }
  if (p > 1) c.bottomLeftCorner(d * (p - 1), d * (p - 1)).setIdentity();
  return c;
}

double spectral_radius(const Eigen::MatrixXd& companion) {
  if (companion.size() == 0) return 0.0;
  Eigen::EigenSolver<Eigen::MatrixXd> es(companion, false);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

double ar_spectral_radius(std::span<const double> coefficients) {
  std::vector<Eigen::MatrixXd> lags;
  for (double a : coefficients) lags.push_back(Eigen::MatrixXd::Constant(1, 1, a));
  return spectral_radius(companion_matrix(lags));
}

NormalityTest jarque_bera(const Eigen::VectorXd& residuals) {
  const double n = static_cast<double>(residuals.size());
  if (residuals.size() < 3) throw ValidationError("need at least 3 residuals");
  const Eigen::ArrayXd c = residuals.array() - residuals.mean();
  const double m2 = c.square().sum() / n;
  if (m2 == 0.0) throw DegenerateFitError("constant residuals");
  const double skew = (c.cube().sum() / n) / std::pow(m2, 1.5);
  const double kurt = (c.square().square().sum() / n) / (m2 * m2);
  NormalityTest out;
  out.statistic = n / 6.0 * (skew * skew + (kurt - 3.0) * (kurt - 3.0) / 4.0);
  out.p_value = std::exp(-0.5 * out.statistic);
  return out;
}

}  // namespace granger
