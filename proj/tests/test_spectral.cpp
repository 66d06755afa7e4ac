#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "granger/errors.hpp"
#include "granger/simulation.hpp"
#include "granger/spectral.hpp"
#include "support.hpp"

using namespace granger;

namespace {

constexpr double kPi = std::numbers::pi;

BivariateVar make_var(std::vector<Eigen::Matrix2d> lags, double sx, double sy, double cxy) {
  BivariateVar m;
  m.order = lags.size();
  m.lag_polynomial = std::move(lags);
  m.noise_cov.matrix << sx, cxy, cxy, sy;
  return m;
}

Eigen::Matrix2d mat(double a, double b, double c, double d) {
  Eigen::Matrix2d m;
  m << a, b, c, d;
  return m;
}

BivariateVar random_stable_var(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-0.3, 0.3);
  std::vector<Eigen::Matrix2d> lags;
  for (int l = 0; l < 3; ++l) lags.push_back(mat(u(rng), u(rng), u(rng), u(rng)));
  return make_var(lags, 1.0 + u(rng), 0.8 + u(rng), u(rng));
}

NetworkSpec decoupled_pair(std::size_t kept) {
  NetworkSpec s;
  s.n_nodes = 2;
  s.coefficients = {{0, 0, 1, 1.5}, {0, 0, 2, -0.9}, {1, 1, 1, 0.6}};
  s.noise_variances.assign(2, NoiseRange{0.25, 0.25});
  s.burn_in = 700;
  s.total_len = 700 + kept;
  s.initial_values.assign(2, 1.0);
  return s;
}

// Three-node network truncated to its first two nodes, which form a closed
// bivariate system.
TimeSeriesMatrix pair12(std::uint64_t seed, std::size_t kept = 300) {
  const TimeSeriesMatrix ts = demeaned(simulate(testing::three_node(0.25, kept), seed));
  return TimeSeriesMatrix(ts.values().leftCols(2));
}

}  // namespace

TEST_CASE("decoupled true models have zero causality everywhere") {
  const BivariateVar m = make_var({mat(-1.5, 0, 0, -0.6), mat(0.9, 0, 0, 0)}, 0.25, 0.4, 0.0);
  for (int i = 0; i <= 200; ++i) {
    const double omega = kPi * (i + 0.5) / 201.0;
    CHECK(spectral_causality_at(m, omega) == 0.0);
    CHECK(spectral_causality_at(m.swapped(), omega) == 0.0);
  }
  CHECK(integrated_spectral_causality(m) == 0.0);
}

TEST_CASE("transfer matrix identities") {
  const BivariateVar white = make_var({}, 1.0, 2.0, 0.0);
  const auto d0 = transfer_matrix(white, 0.0);
  REQUIRE(d0);
  CHECK((*d0 - Eigen::Matrix2cd::Identity()).norm() == 0.0);

  const BivariateVar uncorrelated = make_var({mat(-0.5, 0.2, -0.3, 0.1)}, 1.0, 2.0, 0.0);
  CHECK(normalization_matrix(uncorrelated) == Eigen::Matrix2d::Identity());
  const auto d1 = transfer_matrix(uncorrelated, 0.7);
  REQUIRE(d1);
  CHECK((*d1 - lag_polynomial_at(uncorrelated, 0.7).inverse()).norm() < 1e-14);

  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> omega(0.0, kPi);
  for (int trial = 0; trial < 10; ++trial) {
    const BivariateVar m = random_stable_var(rng);
    const Eigen::Matrix2cd p = normalization_matrix(m).cast<std::complex<double>>();
    for (int i = 0; i < 64; ++i) {
      const double w = omega(rng);
      const auto d = transfer_matrix(m, w);
      REQUIRE(d);
      CHECK((*d * (p * lag_polynomial_at(m, w)) - Eigen::Matrix2cd::Identity()).cwiseAbs().maxCoeff() <= 1e-10);
    }
  }
}

TEST_CASE("singular transfer is reported per frequency") {
  // A(e^{-i omega}) = I - e^{-i omega} I vanishes at omega = 0.
  const BivariateVar unit_root = make_var({mat(-1, 0, 0, -1)}, 1.0, 1.0, 0.0);
  CHECK_FALSE(transfer_matrix(unit_root, 0.0));
  CHECK(std::isnan(spectral_causality_at(unit_root, 0.0)));
  const double freqs[] = {0.25};
  const SpectralCausality sc = geweke_spectrum(unit_root, freqs);
  CHECK_FALSE(sc.singular[0]);
}

TEST_CASE("spectra are Hermitian and causality is nonnegative") {
  std::mt19937_64 rng(9);
  const std::vector<double> grid = default_frequency_grid(std::nullopt);
  for (int trial = 0; trial < 30; ++trial) {
    const BivariateVar m = random_stable_var(rng);
    const SpectralCausality sc = geweke_spectrum(m, grid);
    REQUIRE(sc.spectra.size() == grid.size());
    CHECK(sc.f_x_to_y.size() == grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const Eigen::Matrix2cd& s = sc.spectra[i];
      CHECK((s - s.adjoint()).cwiseAbs().maxCoeff() <= 1e-8);
      CHECK(s(0, 0).real() >= -1e-10);
      CHECK(s(1, 1).real() >= -1e-10);
      CHECK(sc.f_y_to_x[i] >= -1e-8);
      CHECK(sc.f_x_to_y[i] >= -1e-8);
    }
  }
}

TEST_CASE("the spectrum of x decomposes into intrinsic and causal parts") {
  std::mt19937_64 rng(13);
  const BivariateVar m = random_stable_var(rng);
  const double freqs[] = {0.1};
  const SpectralCausality sc = geweke_spectrum(m, freqs);
  const auto d = transfer_matrix(m, 2.0 * kPi * 0.1);
  REQUIRE(d);
  const Eigen::Matrix2d& c = m.noise_cov.matrix;
  const double gamma_prime = c(1, 1) - c(0, 1) * c(0, 1) / c(0, 0);
  const double intrinsic = std::norm((*d)(0, 0)) * c(0, 0);
  const double causal = std::norm((*d)(0, 1)) * gamma_prime;
  CHECK(sc.spectra[0](0, 0).real() == doctest::Approx(intrinsic + causal).epsilon(1e-12));
  CHECK(sc.f_y_to_x[0] == doctest::Approx(std::log(sc.spectra[0](0, 0).real() / intrinsic)).epsilon(1e-12));
}

TEST_CASE("frequency grids") {
  CHECK(parse_frequency_grid("1:30,50,100").size() == 32);
  CHECK(parse_frequency_grid("2:10:4") == std::vector<double>{2, 6, 10});
  CHECK(parse_frequency_grid("0.5, 7") == std::vector<double>{0.5, 7});
  CHECK_THROWS_AS(parse_frequency_grid("1:x"), ValidationError);
  CHECK_THROWS_AS(parse_frequency_grid(""), ValidationError);

  CHECK(default_frequency_grid(200.0).size() == 32);
  CHECK(default_frequency_grid(200.0).back() == 100.0);
  CHECK(default_frequency_grid(80.0).size() == 30);
  const std::vector<double> plain = default_frequency_grid(std::nullopt);
  CHECK(plain.size() == 64);
  CHECK(plain.front() > 0.0);
  CHECK(plain.back() < 0.5);
}

TEST_CASE("refining the grid keeps shared values") {
  std::mt19937_64 rng(21);
  const BivariateVar m = random_stable_var(rng);
  const std::vector<double> coarse = parse_frequency_grid("1:30");
  const std::vector<double> fine = parse_frequency_grid("1:30,0.5,1.5,2.5,45");
  const SpectralCausality a = geweke_spectrum(m, coarse, 200.0);
  const SpectralCausality b = geweke_spectrum(m, fine, 200.0);
  for (std::size_t i = 0; i < coarse.size(); ++i) {
    CHECK(a.f_y_to_x[i] == b.f_y_to_x[i]);
    CHECK(a.f_x_to_y[i] == b.f_x_to_y[i]);
  }
}

TEST_CASE("spectrum input validation") {
  const BivariateVar m = make_var({mat(-0.5, 0, 0, -0.5)}, 1.0, 1.0, 0.0);
  const double above[] = {101.0};
  const double zero[] = {0.0};
  CHECK_THROWS_AS(geweke_spectrum(m, above, 200.0), ValidationError);
  CHECK_THROWS_AS(geweke_spectrum(m, zero, 200.0), ValidationError);
  CHECK_THROWS_AS(geweke_spectrum(m, zero, -1.0), ValidationError);
  const TimeSeriesMatrix ts = pair12(1);
  CHECK_THROWS_AS(fit_bivariate_var(ts, 0, 0, 2), ValidationError);
  CHECK_THROWS_AS(fit_bivariate_var(ts, 0, 1, 0), ValidationError);
  CHECK_THROWS_AS(fit_bivariate_var(TimeSeriesMatrix(ts.values().topRows(10)), 0, 1, 8), Error);
}

TEST_CASE("fitted coefficients recover the generator") {
  const TimeSeriesMatrix dec = demeaned(simulate(decoupled_pair(10000), 3));
  const BivariateVar d = fit_bivariate_var(dec, 0, 1, 2);
  for (const auto& a : d.lag_polynomial) {
    CHECK(std::abs(a(0, 1)) <= 0.03);
    CHECK(std::abs(a(1, 0)) <= 0.03);
  }

  const BivariateVar m = fit_bivariate_var(pair12(4, 10000), 0, 1, 2);
  const Eigen::Matrix2d truth1 = mat(-1.5, 0.0, -0.8, -0.2);
  const Eigen::Matrix2d truth2 = mat(0.9, 0.0, 0.0, 0.0);
  CHECK((m.lag_polynomial[0] - truth1).cwiseAbs().maxCoeff() <= 0.05);
  CHECK((m.lag_polynomial[1] - truth2).cwiseAbs().maxCoeff() <= 0.05);
  CHECK(m.stability_radius() < 1.0);

  const BivariateVar s = m.swapped().swapped();
  CHECK(s.lag_polynomial[0] == m.lag_polynomial[0]);
  CHECK(s.noise_cov.matrix == m.noise_cov.matrix);
}

TEST_CASE("node 1 drives node 2 across 1-30 Hz") {
  const std::vector<double> band = parse_frequency_grid("1:30");
  int forward = 0;
  int backward = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const TimeSeriesMatrix ts = TimeSeriesMatrix(demeaned(simulate(builtin_3node(), seed)).values().leftCols(2));
    const std::size_t order = select_bivariate_order(ts, 0, 1, 10);
    // x = node 2, y = node 1, so f_y_to_x is 1 -> 2.
    const SpectralCausality sc = geweke_spectrum(fit_bivariate_var(ts, 1, 0, order), band, 200.0);
    forward += *std::min_element(sc.f_y_to_x.begin(), sc.f_y_to_x.end()) > 0.05;
    backward += *std::max_element(sc.f_x_to_y.begin(), sc.f_x_to_y.end()) < 0.02;
  }
  MESSAGE("f_{1->2} > 0.05 in " << forward << "/100, f_{2->1} < 0.02 in " << backward << "/100");
  CHECK(forward >= 90);
  CHECK(backward >= 90);
}

TEST_CASE("integrated causality matches the time-domain log variance ratio") {
  for (std::uint64_t seed : {5u, 6u, 7u}) {
    const TimeSeriesMatrix ts = pair12(seed, 10000);
    const std::size_t window = 30;
    const BivariateVar m = fit_bivariate_var(ts, 1, 0, 2, window);
    REQUIRE(m.stability_radius() < 1.0);
    const Design r = build_design(ts, LagSpec{1, {{1, 30}}}, window);
    const double var_r = ols_fit(r.matrix, r.response).rss;
    const Design u = build_design(ts, LagSpec{1, {{1, 2}, {0, 2}}}, window);
    const double var_u = ols_fit(u.matrix, u.response).rss;
    const double time_domain = std::log(var_r / var_u);
    REQUIRE(time_domain > 0.1);
    CHECK(std::abs(integrated_spectral_causality(m) - time_domain) <= 0.05 * time_domain);
  }
}

TEST_CASE("white-noise pairs show little spectral causality") {
  const std::size_t m = 300;
  const std::vector<double> grid = default_frequency_grid(std::nullopt);
  std::vector<double> values;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const TimeSeriesMatrix ts = testing::white_noise(seed + 1000, m, 2);
    const std::size_t order = select_bivariate_order(ts, 0, 1, 10);
    const SpectralCausality sc = geweke_spectrum(fit_bivariate_var(ts, 0, 1, order), grid);
    values.insert(values.end(), sc.f_y_to_x.begin(), sc.f_y_to_x.end());
    values.insert(values.end(), sc.f_x_to_y.begin(), sc.f_x_to_y.end());
  }
  std::sort(values.begin(), values.end());
  const double p95 = values[values.size() * 95 / 100];
  MESSAGE("95th percentile " << p95 << " vs bound " << 3.0 / static_cast<double>(m));
  CHECK(p95 < 3.0 / static_cast<double>(m));
}

TEST_CASE("spectral csv") {
  const BivariateVar unit_root = make_var({mat(-1, 0, 0, -1)}, 1.0, 1.0, 0.0);
  const double freqs[] = {0.5};
  const SpectralCausality sc = geweke_spectrum(unit_root, freqs);
  std::ostringstream out;
  write_spectral_csv(out, sc);
  CHECK(out.str().rfind("frequency_hz,f_y_to_x,f_x_to_y\n", 0) == 0);
  CHECK(out.str().find("0.5,") != std::string::npos);
}
