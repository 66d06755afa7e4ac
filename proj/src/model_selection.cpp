#include "granger/model_selection.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "granger/errors.hpp"

namespace granger {

double gaussian_loglik(double rss, std::size_t m) {
  if (m == 0) throw ValidationError("loglik needs m >= 1");
  if (!(rss >= 0.0)) throw ValidationError("negative residual sum of squares");
  if (rss == 0.0) return std::numeric_limits<double>::infinity();
  const double md = static_cast<double>(m);
  return -0.5 * md * (std::log(2.0 * std::numbers::pi * rss / md) + 1.0);
}

double aic(double loglik, double k) { return -2.0 * loglik + 2.0 * k; }

double bic(double loglik, double k, double n) { return -2.0 * loglik + k * std::log(n); }

double parameter_cost(double xi, double delta, ParamCost rule) {
  double magnitude = std::abs(xi);
  if (rule == ParamCost::kPrecisionFloor) magnitude = std::max(magnitude, 1.0);
  if (magnitude <= delta) return 0.0;
  return std::log(magnitude / delta);
}

CodeLength mdl_code_length(const OlsFit& fit, std::size_t series_length, const MdlOptions& options) {
  if (fit.m == 0) throw ValidationError("code length needs m >= 1");
  if (series_length < fit.m) throw ValidationError("series length smaller than fitted rows");
  if (fit.rss <= 1e-24 * fit.response_ss) throw DegenerateFitError("degenerate noiseless fit: residual variance is zero");
  const double delta = options.delta.value_or(1.0 / std::sqrt(static_cast<double>(series_length)));
  if (!(delta > 0.0)) throw ValidationError("precision delta must be positive");

  const double m = static_cast<double>(fit.m);
  const double sigma2 = fit.rss / m;
  CodeLength cl;
  cl.precision_delta = delta;
  cl.data_term = m * std::log(std::sqrt(2.0 * std::numbers::pi * sigma2)) + fit.rss / (2.0 * sigma2);

  auto charge = [&](double xi) {
    const double c = parameter_cost(xi, delta, options.param_cost);
    if (c > 0.0) {
      cl.param_term += c;
      ++cl.n_params_counted;
    }
  };
  charge(sigma2);
  for (Eigen::Index i = 0; i < fit.coefficients.size(); ++i) charge(fit.coefficients(i));

  cl.order_term = std::log(static_cast<double>(fit.k) + 1.0);
  cl.total = cl.data_term + cl.param_term + cl.order_term;
  return cl;
}

std::string to_string(Criterion c) {
  switch (c) {
    case Criterion::kAic: return "aic";
    case Criterion::kBic: return "bic";
    case Criterion::kMdl: return "mdl";
  }
  return "?";
}

Criterion criterion_from_string(const std::string& s) {
  if (s == "aic" || s == "AIC") return Criterion::kAic;
  if (s == "bic" || s == "BIC") return Criterion::kBic;
  if (s == "mdl" || s == "MDL") return Criterion::kMdl;
  throw ValidationError("unknown criterion '" + s + "'");
}

double criterion_value(const OlsFit& fit, Criterion criterion, std::size_t series_length,
                       const MdlOptions& mdl) {
  switch (criterion) {
    case Criterion::kAic:
      return aic(gaussian_loglik(fit.rss, fit.m), static_cast<double>(fit.k + 1));
    case Criterion::kBic:
      return bic(gaussian_loglik(fit.rss, fit.m), static_cast<double>(fit.k + 1),
                 static_cast<double>(fit.m));
    case Criterion::kMdl:
      return mdl_code_length(fit, series_length, mdl).total;
  }
  throw ValidationError("unknown criterion");
}

std::size_t argmin_first(std::span<const double> values) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] < values[best]) best = i;
  }
  return best;
}

CriterionScore select_order(const NestedOrderFits& fits, Criterion criterion,
                            std::size_t series_length, const MdlOptions& mdl) {
  CriterionScore score;
  score.criterion = criterion;
  for (std::size_t n = 1; n <= fits.p_max(); ++n) {
    score.curve.push_back(criterion_value(fits.fit(n), criterion, series_length, mdl));
  }
  const std::size_t best = argmin_first(score.curve);
  score.order = best + 1;
  score.value = score.curve[best];
  return score;
}

CriterionScore select_order(const TimeSeriesMatrix& ts, std::size_t target,
                            std::span<const std::size_t> variables, Criterion criterion,
                            std::size_t p_max, const MdlOptions& mdl) {
  if (p_max == 0) throw ValidationError("p_max must be at least 1");
  if (ts.rows() <= p_max) {
    throw ValidationError("insufficient samples: " + std::to_string(ts.rows()) +
                          " rows for p_max " + std::to_string(p_max));
  }
  const NestedOrderFits fits(ts, target, variables, p_max, p_max);
  return select_order(fits, criterion, ts.rows(), mdl);
}

}  // namespace granger
