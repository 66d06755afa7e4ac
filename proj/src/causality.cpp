#include "granger/causality.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <numeric>

#include <boost/math/special_functions/beta.hpp>

#include "granger/errors.hpp"

namespace granger {

namespace {

void check_dof(double d1, double d2) {
  if (!(d1 >= 1.0) || !(d2 >= 1.0) || !std::isfinite(d1) || !std::isfinite(d2)) {
    throw ValidationError("F distribution needs degrees of freedom >= 1");
  }
}

}  // namespace

double f_cdf(double x, double d1, double d2) {
  check_dof(d1, d2);
  if (std::isnan(x)) throw ValidationError("F cdf of NaN");
  if (x <= 0.0) return 0.0;
  if (std::isinf(x)) return 1.0;
  const double z = d1 * x / (d1 * x + d2);
  return boost::math::ibeta(d1 / 2.0, d2 / 2.0, z);
}

double f_sf(double x, double d1, double d2) {
  check_dof(d1, d2);
  if (std::isnan(x)) throw ValidationError("F survival of NaN");
  if (x <= 0.0) return 1.0;
  if (std::isinf(x)) return 0.0;
  const double z = d1 * x / (d1 * x + d2);
  return boost::math::ibetac(d1 / 2.0, d2 / 2.0, z);
}

FTestResult extra_sum_of_squares_test(double rss_restricted, double rss_unrestricted,
                                      std::size_t dof_num, std::size_t dof_den, double alpha) {
  if (dof_num == 0 || dof_den == 0) throw ValidationError("F test needs positive degrees of freedom");
  if (!(alpha > 0.0 && alpha < 1.0)) throw ValidationError("alpha must lie in (0, 1)");
  FTestResult r;
  r.dof_num = dof_num;
  r.dof_den = dof_den;
  r.rss_restricted = rss_restricted;
  r.rss_unrestricted = rss_unrestricted;
  if (rss_unrestricted <= 0.0) {
    throw DegenerateFitError("unrestricted model fits exactly; F statistic undefined");
  }
  const double num = std::max(0.0, rss_restricted - rss_unrestricted) / static_cast<double>(dof_num);
  r.f_value = num / (rss_unrestricted / static_cast<double>(dof_den));
  r.p_value = f_sf(r.f_value, static_cast<double>(dof_num), static_cast<double>(dof_den));
  r.significant = r.p_value < alpha;
  return r;
}

FTestResult f_test_gc(const TimeSeriesMatrix& ts, std::size_t x, std::size_t y, std::size_t p,
                      std::size_t q, double alpha, std::optional<std::size_t> window_start) {
  if (p == 0 || q == 0) throw ValidationError("F test orders must be at least 1");
  if (x == y) throw ValidationError("cause and effect must be different variables");
  const std::size_t start = window_start.value_or(std::max(p, q));
  const LagSpec restricted{x, {{x, p}}};
  const LagSpec unrestricted{x, {{x, p}, {y, q}}};
  const Design dr = build_design(ts, restricted, start);
  const Design du = build_design(ts, unrestricted, start);
  const OlsFit fr = ols_fit(dr.matrix, dr.response);
  const OlsFit fu = ols_fit(du.matrix, du.response);
  if (fu.m <= p + q + 1) throw ValidationError("too few samples for the F test");
  return extra_sum_of_squares_test(fr.rss, fu.rss, q, fu.m - p - q - 1, alpha);
}

double log_variance_ratio(const OlsFit& restricted, const OlsFit& unrestricted) {
  if (restricted.m != unrestricted.m) throw ValidationError("fits use different sample windows");
  return std::log(restricted.rss / unrestricted.rss);
}

namespace {

std::size_t window_of(const MdlSearch& s) { return s.window_start.value_or(s.p_max); }

BestCode best_from_fits(const NestedOrderFits& fits, std::size_t series_length,
                        const MdlOptions& code) {
  BestCode best;
  best.length.total = std::numeric_limits<double>::infinity();
  for (std::size_t n = 1; n <= fits.p_max(); ++n) {
    const OlsFit f = fits.fit(n);
    const CodeLength cl = mdl_code_length(f, series_length, code);
    if (cl.total < best.length.total) {
      best.length = cl;
      best.order = n;
      best.rss = f.rss;
    }
  }
  return best;
}

// Target first, then the others ascending: a canonical column order, so the
// same variable set always produces bit-identical fits.
std::vector<std::size_t> canonical_set(std::size_t target, std::vector<std::size_t> others) {
  std::sort(others.begin(), others.end());
  others.erase(std::unique(others.begin(), others.end()), others.end());
  others.erase(std::remove(others.begin(), others.end(), target), others.end());
  others.insert(others.begin(), target);
  return others;
}

void check_pair(const TimeSeriesMatrix& ts, std::size_t x, std::size_t y) {
  if (x >= ts.cols() || y >= ts.cols()) throw ValidationError("variable index out of range");
  if (x == y) throw ValidationError("cause and effect must be different variables");
}

MdlCausality make_mdl_causality(const BestCode& restricted, const BestCode& unrestricted) {
  MdlCausality r;
  r.restricted_len = restricted.length;
  r.unrestricted_len = unrestricted.length;
  r.restricted_order = restricted.order;
  r.unrestricted_order = unrestricted.order;
  r.f_nats = restricted.length.total - unrestricted.length.total;
  r.causal = r.f_nats > 0.0;
  return r;
}

}  // namespace

BestCode best_code_length(const TimeSeriesMatrix& ts, std::size_t target,
                          std::span<const std::size_t> variables, const MdlSearch& search) {
  const NestedOrderFits fits(ts, target, variables, search.p_max, window_of(search));
  return best_from_fits(fits, ts.rows(), search.code);
}

MdlCausality mdl_gc(const TimeSeriesMatrix& ts, std::size_t x, std::size_t y,
                    const MdlSearch& search) {
  return conditional_mdl_gc(ts, x, y, {}, search);
}

MdlCausality conditional_mdl_gc(const TimeSeriesMatrix& ts, std::size_t x, std::size_t y,
                                std::span<const std::size_t> z, const MdlSearch& search) {
  check_pair(ts, x, y);
  for (auto v : z) {
    if (v == x || v == y) throw ValidationError("conditioning set must exclude x and y");
    if (v >= ts.cols()) throw ValidationError("variable index out of range");
  }
  std::vector<std::size_t> zs(z.begin(), z.end());
  const auto restricted_vars = canonical_set(x, zs);
  zs.push_back(y);
  const auto unrestricted_vars = canonical_set(x, zs);
  return make_mdl_causality(best_code_length(ts, x, restricted_vars, search),
                            best_code_length(ts, x, unrestricted_vars, search));
}

JointMdlCausality joint_mdl_gc(const TimeSeriesMatrix& ts, std::size_t x, std::size_t y,
                               std::span<const std::size_t> z, const MdlSearch& search) {
  check_pair(ts, x, y);
  if (z.empty()) throw ValidationError("joint form needs a non-empty Z");
  std::vector<std::size_t> zs(z.begin(), z.end());
  for (auto v : zs) {
    if (v == x || v == y) throw ValidationError("conditioning set must exclude x and y");
  }
  JointMdlCausality r;
  r.with_y = best_code_length(ts, x, canonical_set(x, {y}), search);
  r.with_z = best_code_length(ts, x, canonical_set(x, zs), search);
  zs.push_back(y);
  r.with_yz = best_code_length(ts, x, canonical_set(x, zs), search);
  r.f_joint = std::min(r.with_y.length.total, r.with_z.length.total) - r.with_yz.length.total;
  r.both_direct = r.f_joint > 0.0;
  return r;
}

std::string to_string(Method m) { return m == Method::kMdl ? "mdl" : "ftest"; }

Method method_from_string(const std::string& s) {
  if (s == "mdl" || s == "MDL") return Method::kMdl;
  if (s == "ftest" || s == "F_TEST" || s == "f_test") return Method::kFTest;
  throw ValidationError("unknown method '" + s + "'");
}

void NetworkParams::check() const {
  if (p_max == 0) throw ValidationError("p_max must be at least 1");
  if (!(alpha > 0.0 && alpha < 1.0)) throw ValidationError("alpha must lie in (0, 1)");
}

CausalGraph empty_graph(std::vector<std::string> nodes, Method method, NetworkParams params) {
  CausalGraph g;
  const auto n = static_cast<Eigen::Index>(nodes.size());
  g.nodes = std::move(nodes);
  g.adjacency = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>::Constant(n, n, false);
  g.weight = Eigen::MatrixXd::Constant(n, n, std::numeric_limits<double>::quiet_NaN());
  g.log_variance_ratio = g.weight;
  g.method = method;
  g.params = params;
  return g;
}

namespace {

struct Evidence {
  bool edge = false;
  double weight = std::numeric_limits<double>::quiet_NaN();
  double log_var_ratio = std::numeric_limits<double>::quiet_NaN();
};

// Every model fitted for one target, keyed by its canonical variable set.
class TargetModels {
 public:
  TargetModels(const TimeSeriesMatrix& ts, std::size_t target, const NetworkParams& params)
      : ts_(ts), target_(target), params_(params) {}

  const NestedOrderFits& fits(const std::vector<std::size_t>& vars) {
    auto it = fits_.find(vars);
    if (it == fits_.end()) {
      it = fits_.emplace(vars, std::make_unique<NestedOrderFits>(ts_, target_, vars, params_.p_max,
                                                                 params_.p_max))
               .first;
    }
    return *it->second;
  }

  const BestCode& best_code(const std::vector<std::size_t>& vars) {
    auto it = codes_.find(vars);
    if (it == codes_.end()) {
      it = codes_.emplace(vars, best_from_fits(fits(vars), ts_.rows(), params_.mdl)).first;
    }
    return it->second;
  }

 private:
  const TimeSeriesMatrix& ts_;
  std::size_t target_;
  const NetworkParams& params_;
  std::map<std::vector<std::size_t>, std::unique_ptr<NestedOrderFits>> fits_;
  std::map<std::vector<std::size_t>, BestCode> codes_;
};

Evidence mdl_stage(TargetModels& models, const std::vector<std::size_t>& restricted,
                   const std::vector<std::size_t>& unrestricted) {
  const BestCode& r = models.best_code(restricted);
  const BestCode& u = models.best_code(unrestricted);
  Evidence e;
  e.weight = r.length.total - u.length.total;
  e.edge = e.weight > 0.0;
  e.log_var_ratio = std::log(r.rss / u.rss);
  return e;
}

// Both models use the VAR order chosen beforehand for the whole system.
Evidence ftest_stage(TargetModels& models, const std::vector<std::size_t>& restricted,
                     const std::vector<std::size_t>& unrestricted, std::size_t n, double alpha) {
  const NestedOrderFits& fu = models.fits(unrestricted);
  const double rss_u = fu.rss(n);
  const double rss_r = models.fits(restricted).rss(n);
  const std::size_t k_u = n * unrestricted.size();
  const std::size_t m = fu.window_rows();
  if (m <= k_u + 1) throw ValidationError("too few samples for the F test");
  const FTestResult t = extra_sum_of_squares_test(rss_r, rss_u, n, m - k_u - 1, alpha);
  Evidence e;
  e.edge = t.significant;
  e.weight = t.f_value;
  e.log_var_ratio = std::log(rss_r / rss_u);
  return e;
}

}  // namespace

std::size_t select_var_order(const TimeSeriesMatrix& ts, Criterion criterion, std::size_t p_max,
                             const MdlOptions& mdl) {
  const std::size_t v = ts.cols();
  if (v == 0) throw ValidationError("no variables");
  if (p_max == 0) throw ValidationError("p_max must be at least 1");
  std::vector<std::size_t> all(v);
  std::iota(all.begin(), all.end(), 0);
  std::vector<std::unique_ptr<NestedOrderFits>> equations;
  for (std::size_t t = 0; t < v; ++t) {
    equations.push_back(std::make_unique<NestedOrderFits>(ts, t, canonical_set(t, all), p_max, p_max));
  }
  const std::size_t m = equations.front()->window_rows();
  const double md = static_cast<double>(m);
  std::vector<double> curve;
  for (std::size_t n = 1; n <= p_max; ++n) {
    if (criterion == Criterion::kMdl) {
      double total = 0.0;
      for (const auto& eq : equations) total += mdl_code_length(eq->fit(n), ts.rows(), mdl).total;
      curve.push_back(total);
      continue;
    }
    Eigen::MatrixXd residuals(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(v));
    for (std::size_t t = 0; t < v; ++t) residuals.col(static_cast<Eigen::Index>(t)) = equations[t]->fit(n).residuals;
    const Eigen::MatrixXd cov = residuals.transpose() * residuals / md;
    const double log_det = Eigen::LLT<Eigen::MatrixXd>(cov).matrixLLT().diagonal().array().log().sum() * 2.0;
    const double k = static_cast<double>(n * v * v);
    curve.push_back(md * log_det + (criterion == Criterion::kAic ? 2.0 : std::log(md)) * k);
  }
  return argmin_first(curve) + 1;
}

CausalGraph infer_network(const TimeSeriesMatrix& ts, const NetworkParams& params) {
  params.check();
  const std::size_t n = ts.cols();
  if (n < 2) throw ValidationError("network inference needs at least two variables");
  if (ts.rows() <= params.p_max + 1) {
    throw ValidationError("insufficient samples for p_max " + std::to_string(params.p_max));
  }
  CausalGraph g = empty_graph(ts.labels(), params.method, params);
  const std::size_t var_order = params.method == Method::kFTest
                                    ? select_var_order(ts, params.order_criterion, params.p_max, params.mdl)
                                    : 0;

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  if (params.reverse_pair_order) std::reverse(order.begin(), order.end());

  for (std::size_t to : order) {
    TargetModels models(ts, to, params);
    std::vector<std::size_t> all;
    for (std::size_t v = 0; v < n; ++v) all.push_back(v);
    const auto self = canonical_set(to, {});
    const auto everything = canonical_set(to, all);

    for (std::size_t from : order) {
      if (from == to) continue;
      const auto pair = canonical_set(to, {from});
      auto stage = [&](const std::vector<std::size_t>& r, const std::vector<std::size_t>& u) {
        return params.method == Method::kMdl ? mdl_stage(models, r, u)
                                             : ftest_stage(models, r, u, var_order, params.alpha);
      };
      Evidence e = stage(self, pair);
      if (e.edge && n > 2) {
        std::vector<std::size_t> rest;
        for (std::size_t v = 0; v < n; ++v) {
          if (v != to && v != from) rest.push_back(v);
        }
        e = stage(canonical_set(to, rest), everything);
      }
      const auto f = static_cast<Eigen::Index>(from);
      const auto t = static_cast<Eigen::Index>(to);
      g.adjacency(f, t) = e.edge;
      g.weight(f, t) = e.weight;
      g.log_variance_ratio(f, t) = e.log_var_ratio;
    }
  }
  return g;
}

double similarity(const CausalGraph& a, const CausalGraph& b) {
  if (a.n_nodes() != b.n_nodes()) {
    throw ValidationError("graphs have different node counts (" + std::to_string(a.n_nodes()) +
                          " vs " + std::to_string(b.n_nodes()) + ")");
  }
  const auto inter = (a.adjacency && b.adjacency).count();
  const auto uni = (a.adjacency || b.adjacency).count();
  if (uni == 0) return 1.0;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

}  // namespace granger
