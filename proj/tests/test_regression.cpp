#include <doctest.h>

#include <cmath>
#include <random>

#include "granger/errors.hpp"
#include "granger/regression.hpp"
#include "granger/simulation.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace granger;

namespace {

oracle::Matrix to_rows(const Eigen::MatrixXd& m) {
  oracle::Matrix out(static_cast<std::size_t>(m.rows()), std::vector<double>(static_cast<std::size_t>(m.cols())));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) out[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = m(i, j);
  }
  return out;
}

std::vector<double> to_vec(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

TimeSeriesMatrix column(std::initializer_list<double> xs) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(xs.size()), 1);
  Eigen::Index i = 0;
  for (double x : xs) m(i++, 0) = x;
  return TimeSeriesMatrix(m);
}

}  // namespace

TEST_CASE("build_design lays out lags predictor by predictor") {
  const TimeSeriesMatrix x = column({1, 2, 3, 4});
  const Design d = build_design(x, LagSpec{0, {{0, 2}}});
  REQUIRE(d.response.size() == 2);
  CHECK(d.response(0) == 3);
  CHECK(d.response(1) == 4);
  Eigen::MatrixXd expected(2, 2);
  expected << 2, 1, 3, 2;
  CHECK(d.matrix == expected);

  CHECK_THROWS_AS(build_design(x, LagSpec{0, {{0, 0}}}), ValidationError);
  CHECK_THROWS_AS(build_design(x, LagSpec{0, {{0, 4}}}), ValidationError);
  CHECK_THROWS_AS(build_design(x, LagSpec{0, {{0, 1}, {0, 2}}}), ValidationError);

  Eigen::MatrixXd two(5, 2);
  two << 1, 10, 2, 20, 3, 30, 4, 40, 5, 50;
  const Design d2 = build_design(TimeSeriesMatrix(two), LagSpec{0, {{1, 1}, {0, 2}}}, 3);
  REQUIRE(d2.response.size() == 2);
  CHECK(d2.response(0) == 4);
  CHECK(d2.matrix(0, 0) == 30);
  CHECK(d2.matrix(0, 1) == 3);
  CHECK(d2.matrix(0, 2) == 2);
}

TEST_CASE("3-node node 2 regression recovers its generator") {
  const TimeSeriesMatrix ts = simulate(testing::three_node(0.2, 300), 11);
  const Design d = build_design(ts, LagSpec{1, {{1, 1}, {0, 1}}});
  const OlsFit fit = ols_fit(d.matrix, d.response);
  CHECK(std::abs(fit.coefficients(0) - 0.2) < 0.05);
  CHECK(std::abs(fit.coefficients(1) - 0.8) < 0.05);
  const auto ref = oracle::normal_equations(to_rows(d.matrix), to_vec(d.response));
  CHECK(std::abs(ref[0] - fit.coefficients(0)) < 1e-9);
  CHECK(std::abs(ref[1] - fit.coefficients(1)) < 1e-9);
}

TEST_CASE("3-node node 1 at 10k samples") {
  const TimeSeriesMatrix ts = simulate(testing::three_node(0.25, 10000), 4);
  const Design d = build_design(ts, LagSpec{0, {{0, 2}}});
  const OlsFit fit = ols_fit(d.matrix, d.response);
  CHECK(std::abs(fit.coefficients(0) - 1.5) < 0.02);
  CHECK(std::abs(fit.coefficients(1) + 0.9) < 0.02);
  const auto ref = oracle::normal_equations(to_rows(d.matrix), to_vec(d.response));
  CHECK(std::abs(ref[0] - fit.coefficients(0)) < 1e-8);
  CHECK(std::abs(ref[1] - fit.coefficients(1)) < 1e-8);
}

TEST_CASE("ols_fit on an exact recurrence") {
  const Design d = build_design(column({1, 0.5, 0.25, 0.125}), LagSpec{0, {{0, 1}}});
  const OlsFit fit = ols_fit(d.matrix, d.response);
  CHECK(fit.coefficients(0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(fit.rss <= 1e-20);
  CHECK(fit.m == 3);
  CHECK(fit.k == 1);
}

TEST_CASE("rank-deficient designs name the dependent columns") {
  std::mt19937_64 rng(3);
  Eigen::MatrixXd x = testing::gaussian_matrix(rng, 50, 3);
  x.col(2) = x.col(0);
  const Eigen::VectorXd y = testing::gaussian_matrix(rng, 50, 1).col(0);
  try {
    ols_fit(x, y);
    FAIL("expected a rank error");
  } catch (const RankDeficientError& e) {
    CHECK(e.columns() == std::vector<std::size_t>{0, 2});
  }
  CHECK_THROWS_AS(ols_fit(x.topRows(2), y.head(2)), ValidationError);
}

TEST_CASE("ols_fit agrees with the normal-equations oracle") {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> cols(1, 8);
  for (int trial = 0; trial < 100; ++trial) {
    const Eigen::Index k = cols(rng);
    const Eigen::Index n = 20 + 10 * k;
    const Eigen::MatrixXd x = testing::gaussian_matrix(rng, n, k);
    const Eigen::VectorXd y = testing::gaussian_matrix(rng, n, 1).col(0);
    const OlsFit fit = ols_fit(x, y);
    const auto ref = oracle::normal_equations(to_rows(x), to_vec(y));
    for (Eigen::Index j = 0; j < k; ++j) {
      const double scale = std::max(std::abs(ref[static_cast<std::size_t>(j)]), 1e-3);
      CHECK(std::abs(fit.coefficients(j) - ref[static_cast<std::size_t>(j)]) / scale < 1e-8);
    }
  }
}

TEST_CASE("fit invariants on random designs") {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 50; ++trial) {
    const Eigen::MatrixXd x = testing::gaussian_matrix(rng, 80, 5);
    const Eigen::VectorXd y = testing::gaussian_matrix(rng, 80, 1).col(0) + x.col(1) * 0.3;
    const OlsFit fit = ols_fit(x, y);

    CHECK(fit.residuals.size() == 80);
    CHECK(std::abs(fit.rss - fit.residuals.squaredNorm()) <= 1e-10 * fit.rss);
    CHECK(fit.sigma2_mle == doctest::Approx(fit.rss / 80.0));
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
      CHECK(std::abs(fit.residuals.dot(x.col(j))) <= 1e-6 * fit.residuals.norm() * x.col(j).norm());
    }

    // Nested monotonicity: more columns never raise rss.
    const OlsFit smaller = ols_fit(x.leftCols(3), y);
    CHECK(fit.rss <= smaller.rss * (1.0 + 1e-9));

    // Projection idempotence.
    const Eigen::VectorXd fitted = y - fit.residuals;
    CHECK(ols_fit(x, fitted).rss <= 1e-12 * fitted.squaredNorm());

    // Permutation equivariance.
    Eigen::MatrixXd perm(80, 5);
    const int order[] = {3, 0, 4, 1, 2};
    for (int j = 0; j < 5; ++j) perm.col(j) = x.col(order[j]);
    const OlsFit pf = ols_fit(perm, y);
    CHECK(pf.rss == doctest::Approx(fit.rss).epsilon(1e-12));
    for (int j = 0; j < 5; ++j) CHECK(pf.coefficients(j) == doctest::Approx(fit.coefficients(order[j])).epsilon(1e-9));
  }
}

TEST_CASE("nested order fits match direct fits on the shared window") {
  const TimeSeriesMatrix ts = simulate(builtin_3node(), 8);
  const std::size_t vars[] = {1, 0, 2};
  const NestedOrderFits nested(ts, 1, vars, 6, 6);
  CHECK(nested.window_rows() == 294);
  for (std::size_t order = 1; order <= 6; ++order) {
    const LagSpec spec{1, {{1, order}, {0, order}, {2, order}}};
    const Design d = build_design(ts, spec, 6);
    const OlsFit direct = ols_fit(d.matrix, d.response);
    const OlsFit fast = nested.fit(order);
    CHECK(fast.rss == doctest::Approx(direct.rss).epsilon(1e-10));
    CHECK(nested.rss(order) == doctest::Approx(direct.rss).epsilon(1e-10));
    REQUIRE(fast.coefficients.size() == direct.coefficients.size());
    CHECK((fast.coefficients - direct.coefficients).cwiseAbs().maxCoeff() < 1e-10);
  }
  CHECK_THROWS_AS(nested.fit(0), ValidationError);
  CHECK_THROWS_AS(nested.fit(7), ValidationError);
}

TEST_CASE("nested order fits report rank problems per order") {
  Eigen::MatrixXd v(40, 2);
  std::mt19937_64 rng(1);
  v.col(0) = testing::gaussian_matrix(rng, 40, 1).col(0);
  v.col(1) = v.col(0);
  const TimeSeriesMatrix ts(v);
  const std::size_t vars[] = {0, 1};
  const NestedOrderFits nested(ts, 0, vars, 2, 2);
  CHECK_THROWS_AS(nested.fit(1), RankDeficientError);
}

TEST_CASE("residual covariance") {
  OlsFit a;
  OlsFit b;
  a.residuals = Eigen::Vector2d(1, -1);
  b.residuals = Eigen::Vector2d(1, -1);
  CHECK(residual_covariance(a, b).matrix == Eigen::Matrix2d::Ones());
  a.residuals = Eigen::Vector2d(2, -2);
  b.residuals = Eigen::Vector2d(-2, 2);
  const Eigen::Matrix2d c = residual_covariance(a, b).matrix;
  CHECK(c(0, 1) == -4.0);
  CHECK(c(1, 0) == -4.0);
  b.residuals = Eigen::Vector3d(1, 2, 3);
  CHECK_THROWS_AS(residual_covariance(a, b), ValidationError);

  std::mt19937_64 rng(9);
  const Eigen::MatrixXd noise = testing::gaussian_matrix(rng, 100000, 2);
  a.residuals = noise.col(0);
  b.residuals = noise.col(1);
  CHECK(std::abs(residual_covariance(a, b).matrix(0, 1)) < 0.02);
}

TEST_CASE("spectral radius of AR companions") {
  CHECK(ar_spectral_radius(std::vector<double>{0.5}) == doctest::Approx(0.5));
  CHECK(ar_spectral_radius(std::vector<double>{1.0}) == doctest::Approx(1.0));
  // z^2 - 1.5 z + 0.9 has complex roots with |z|^2 = 0.9.
  CHECK(ar_spectral_radius(std::vector<double>{1.5, -0.9}) == doctest::Approx(std::sqrt(0.9)).epsilon(1e-12));
}

TEST_CASE("both built-in generators are stable") {
  for (const NetworkSpec& spec : {builtin_3node(), builtin_5node()}) {
    const auto n = static_cast<Eigen::Index>(spec.n_nodes);
    std::vector<Eigen::MatrixXd> lags(spec.max_lag(), Eigen::MatrixXd::Zero(n, n));
    for (const auto& c : spec.coefficients) {
      lags[c.lag - 1](static_cast<Eigen::Index>(c.target), static_cast<Eigen::Index>(c.source)) = c.value;
    }
    CHECK(spectral_radius(companion_matrix(lags)) < 1.0);
  }
}

TEST_CASE("Jarque-Bera separates Gaussian from uniform residuals") {
  std::mt19937_64 rng(5);
  const Eigen::VectorXd g = testing::gaussian_matrix(rng, 5000, 1).col(0);
  CHECK(jarque_bera(g).p_value > 0.01);
  std::uniform_real_distribution<double> u(-1, 1);
  Eigen::VectorXd flat(5000);
  for (auto& v : flat) v = u(rng);
  CHECK(jarque_bera(flat).p_value < 1e-6);
  CHECK_THROWS_AS(jarque_bera(Eigen::VectorXd::Ones(10)), DegenerateFitError);
}
