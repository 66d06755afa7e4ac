#ifndef GRANGER_CAUSALITY_HPP
#define GRANGER_CAUSALITY_HPP

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "granger/model_selection.hpp"
#include "granger/regression.hpp"
#include "granger/timeseries.hpp"

namespace granger {

/// CDF of the F(d1, d2) distribution via the regularized incomplete beta.
double f_cdf(double x, double d1, double d2);
/// Upper tail 1 - f_cdf, computed without cancellation.
double f_sf(double x, double d1, double d2);

struct FTestResult {
  double f_value = 0.0;
  std::size_t dof_num = 0;
  std::size_t dof_den = 0;
  double p_value = 1.0;
  bool significant = false;  ///< p_value < alpha
  double rss_restricted = 0.0;
  double rss_unrestricted = 0.0;
};

/// Extra sum-of-squares test. F is floored at 0 when round-off leaves
/// rss_unrestricted marginally above rss_restricted.
FTestResult extra_sum_of_squares_test(double rss_restricted, double rss_unrestricted,
                                      std::size_t dof_num, std::size_t dof_den, double alpha);

/// Does y Granger-cause x? Restricted: x on its own p lags. Unrestricted: plus
/// q lags of y. Both fits share the response window starting at
/// `window_start` (default max(p, q)); dof = (q, m - p - q - 1).
FTestResult f_test_gc(const TimeSeriesMatrix& ts, std::size_t x, std::size_t y, std::size_t p,
                      std::size_t q, double alpha,
                      std::optional<std::size_t> window_start = std::nullopt);

/// ln(var(u) / var(v)) for a restricted/unrestricted pair on the same rows.
double log_variance_ratio(const OlsFit& restricted, const OlsFit& unrestricted);

struct MdlSearch {
  std::size_t p_max = 10;
  MdlOptions code;
  /// Response window start; defaults to p_max.
  std::optional<std::size_t> window_start;
};

/// Shortest code length over shared orders 1..p_max for target ~ variables.
struct BestCode {
  CodeLength length;
  std::size_t order = 0;
  double rss = 0.0;
};

BestCode best_code_length(const TimeSeriesMatrix& ts, std::size_t target,
                          std::span<const std::size_t> variables, const MdlSearch& search);

/// Code-length saving of adding y to the model of x: L_X - L_{X+Y}.
struct MdlCausality {
  double f_nats = 0.0;
  CodeLength restricted_len;
  CodeLength unrestricted_len;
  std::size_t restricted_order = 0;
  std::size_t unrestricted_order = 0;
  bool causal = false;  ///< f_nats > 0 strictly
};

MdlCausality mdl_gc(const TimeSeriesMatrix& ts, std::size_t x, std::size_t y,
                    const MdlSearch& search = {});

/// L_{X+Z} - L_{X+Y+Z}. Always evaluated; infer_network applies the gate that
/// only asks this question after mdl_gc(x, y) came out causal. An empty `z`
/// reduces to mdl_gc.
MdlCausality conditional_mdl_gc(const TimeSeriesMatrix& ts, std::size_t x, std::size_t y,
                                std::span<const std::size_t> z, const MdlSearch& search = {});

/// Joint form min(L_{X+Y}, L_{X+Z}) - L_{X+Y+Z} with all three code lengths
/// kept so either single-predictor reading can be applied by the caller.
struct JointMdlCausality {
  BestCode with_y;
  BestCode with_z;
  BestCode with_yz;
  double f_joint = 0.0;
  bool both_direct = false;  ///< f_joint > 0
};

JointMdlCausality joint_mdl_gc(const TimeSeriesMatrix& ts, std::size_t x, std::size_t y,
                               std::span<const std::size_t> z, const MdlSearch& search = {});

enum class Method { kFTest, kMdl };

std::string to_string(Method m);
Method method_from_string(const std::string& s);

/// Order of the full VAR over every variable, windowed at p_max. AIC and BIC
/// score m ln det(residual covariance) plus the penalty on n V^2
/// coefficients; MDL sums the per-equation code lengths.
std::size_t select_var_order(const TimeSeriesMatrix& ts, Criterion criterion, std::size_t p_max,
                             const MdlOptions& mdl = {});

struct NetworkParams {
  Method method = Method::kMdl;
  /// Significance level of the F-test path.
  double alpha = 0.05;
  std::size_t p_max = 10;
  /// VAR order criterion of the F-test path, applied once to the whole system.
  Criterion order_criterion = Criterion::kAic;
  MdlOptions mdl;
  /// Evaluate node pairs in descending order; the result must not change.
  bool reverse_pair_order = false;

  void check() const;
};

/// Directed graph over the variables of a recording. Matrices are indexed
/// (from, to).
struct CausalGraph {
  std::vector<std::string> nodes;
  Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> adjacency;
  /// Evidence of the deciding stage: f_nats for MDL, the F statistic for the
  /// F-test. NaN where no test ran.
  Eigen::MatrixXd weight;
  /// ln(var(u)/var(v)) of the deciding comparison (reported, never thresholded).
  Eigen::MatrixXd log_variance_ratio;
  Method method = Method::kMdl;
  NetworkParams params;

  std::size_t n_nodes() const noexcept { return nodes.size(); }
  bool has_edge(std::size_t from, std::size_t to) const {
    return adjacency(static_cast<Eigen::Index>(from), static_cast<Eigen::Index>(to));
  }
  std::size_t edge_count() const { return static_cast<std::size_t>(adjacency.count()); }
};

/// Builds an empty graph with the given node labels.
CausalGraph empty_graph(std::vector<std::string> nodes, Method method = Method::kMdl,
                        NetworkParams params = {});

/// For every ordered pair j -> i: a pairwise test, then (with more than two
/// variables) a test conditional on every remaining variable. An edge needs
/// both. All fits share the response window starting at row p_max. MDL
/// searches orders per model; the F-test uses one select_var_order order.
CausalGraph infer_network(const TimeSeriesMatrix& ts, const NetworkParams& params = {});

/// |edges(a) intersect edges(b)| / |edges(a) union edges(b)|; 1 when both are
/// empty. ValidationError on a node-count mismatch.
double similarity(const CausalGraph& a, const CausalGraph& b);

}  // namespace granger

#endif  // GRANGER_CAUSALITY_HPP
