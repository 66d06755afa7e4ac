#ifndef GRANGER_MODEL_SELECTION_HPP
#define GRANGER_MODEL_SELECTION_HPP

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "granger/regression.hpp"
#include "granger/timeseries.hpp"

namespace granger {

/// Maximized Gaussian log-likelihood -(m/2)(ln(2 pi rss/m) + 1).
/// rss == 0 gives +infinity (perfect fit); rss < 0 throws ValidationError.
double gaussian_loglik(double rss, std::size_t m);

double aic(double loglik, double k);
double bic(double loglik, double k, double n);

/// How each parameter xi is charged in the parameter part of the code.
enum class ParamCost {
  /// max(0, ln(|xi| / delta)): terms below the precision are dropped.
  kClamped,
  /// max(0, ln(max(|xi|, 1) / delta)): a parameter is described by its
  /// magnitude and at least ln(1/delta) nats of precision. Agrees with
  /// kClamped whenever |xi| >= 1.
  kPrecisionFloor,
};

struct MdlOptions {
  /// Parameter precision; defaults to 1/sqrt(N) with N the series length.
  std::optional<double> delta;
  ParamCost param_cost = ParamCost::kPrecisionFloor;
};

/// Two-part code length of a Gaussian linear regression, in nats.
struct CodeLength {
  double total = 0.0;
  double data_term = 0.0;   ///< m ln(sqrt(2 pi) sigma) + rss / (2 sigma^2)
  double param_term = 0.0;  ///< sum over {sigma^2} and coefficients
  double order_term = 0.0;  ///< ln(k + 1)
  double precision_delta = 0.0;
  std::size_t n_params_counted = 0;  ///< terms with a positive contribution
};

/// Per-parameter cost under `rule`.
double parameter_cost(double xi, double delta, ParamCost rule);

/// Throws DegenerateFitError when rss == 0, ValidationError when
/// series_length < fit.m or delta <= 0.
CodeLength mdl_code_length(const OlsFit& fit, std::size_t series_length,
                           const MdlOptions& options = {});

enum class Criterion { kAic, kBic, kMdl };

std::string to_string(Criterion c);
Criterion criterion_from_string(const std::string& s);

/// Criterion value of one fit. AIC/BIC count the noise variance as a
/// parameter (k + 1) and use the fitted row count as sample size.
double criterion_value(const OlsFit& fit, Criterion criterion, std::size_t series_length,
                       const MdlOptions& mdl = {});

struct CriterionScore {
  Criterion criterion = Criterion::kMdl;
  double value = 0.0;
  std::size_t order = 0;
  /// Criterion value at orders 1..p_max (index 0 is order 1).
  std::vector<double> curve;
};

/// Index of the minimum of `values`; ties go to the lowest index.
std::size_t argmin_first(std::span<const double> values);

/// Searches the shared lag order n = 1..p_max of the model
/// target ~ lags 1..n of each of `variables`, all fit on the common response
/// window starting at row p_max. Ties resolve to the smaller order.
CriterionScore select_order(const TimeSeriesMatrix& ts, std::size_t target,
                            std::span<const std::size_t> variables, Criterion criterion,
                            std::size_t p_max, const MdlOptions& mdl = {});

/// Same search over precomputed nested fits.
CriterionScore select_order(const NestedOrderFits& fits, Criterion criterion,
                            std::size_t series_length, const MdlOptions& mdl = {});

}  // namespace granger

#endif  // GRANGER_MODEL_SELECTION_HPP
