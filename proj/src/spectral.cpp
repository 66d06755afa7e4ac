#include "granger/spectral.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>

#include "granger/errors.hpp"

namespace granger {

double BivariateVar::stability_radius() const {
  std::vector<Eigen::MatrixXd> regression;
  for (const auto& a : lag_polynomial) regression.emplace_back(-a);
  if (regression.empty()) return 0.0;
  return spectral_radius(companion_matrix(regression));
}

BivariateVar BivariateVar::swapped() const {
  Eigen::Matrix2d perm;
  perm << 0, 1, 1, 0;
  BivariateVar out;
  out.order = order;
  for (const auto& a : lag_polynomial) out.lag_polynomial.emplace_back(perm * a * perm);
  out.noise_cov.matrix = perm * noise_cov.matrix * perm;
  return out;
}

BivariateVar fit_bivariate_var(const TimeSeriesMatrix& ts, std::size_t x, std::size_t y,
                               std::size_t order, std::optional<std::size_t> window_start) {
  if (order == 0) throw ValidationError("VAR order must be at least 1");
  if (x >= ts.cols() || y >= ts.cols()) throw ValidationError("variable index out of range");
  if (x == y) throw ValidationError("spectral causality needs two different variables");
  const std::size_t start = window_start.value_or(order);
  const LagSpec sx{x, {{x, order}, {y, order}}};
  const LagSpec sy{y, {{x, order}, {y, order}}};
  const Design dx = build_design(ts, sx, start);
  const Design dy = build_design(ts, sy, start);
  const OlsFit fx = ols_fit(dx.matrix, dx.response);
  const OlsFit fy = ols_fit(dy.matrix, dy.response);

  BivariateVar model;
  model.order = order;
  const auto n = static_cast<Eigen::Index>(order);
  for (Eigen::Index l = 0; l < n; ++l) {
    Eigen::Matrix2d a;
    a << -fx.coefficients(l), -fx.coefficients(n + l), -fy.coefficients(l), -fy.coefficients(n + l);
    model.lag_polynomial.push_back(a);
  }
  model.noise_cov = residual_covariance(fx, fy);
  return model;
}

std::size_t select_bivariate_order(const TimeSeriesMatrix& ts, std::size_t x, std::size_t y,
                                   std::size_t p_max, const MdlOptions& mdl) {
  if (x == y) throw ValidationError("spectral causality needs two different variables");
  const std::size_t vx[] = {x, y};
  const std::size_t vy[] = {y, x};
  const NestedOrderFits fx(ts, x, vx, p_max, p_max);
  const NestedOrderFits fy(ts, y, vy, p_max, p_max);
  std::vector<double> totals;
  for (std::size_t n = 1; n <= p_max; ++n) {
    totals.push_back(mdl_code_length(fx.fit(n), ts.rows(), mdl).total +
                     mdl_code_length(fy.fit(n), ts.rows(), mdl).total);
  }
  return argmin_first(totals) + 1;
}

Eigen::Matrix2cd lag_polynomial_at(const BivariateVar& model, double omega) {
  Eigen::Matrix2cd a = Eigen::Matrix2cd::Identity();
  for (std::size_t l = 0; l < model.lag_polynomial.size(); ++l) {
    const std::complex<double> z = std::polar(1.0, -omega * static_cast<double>(l + 1));
    a += model.lag_polynomial[l].cast<std::complex<double>>() * z;
  }
  return a;
}

Eigen::Matrix2d normalization_matrix(const BivariateVar& model) {
  const double var_x = model.noise_cov.matrix(0, 0);
  if (!(var_x > 0.0)) throw NumericalError("x noise variance must be positive");
  Eigen::Matrix2d p = Eigen::Matrix2d::Identity();
  p(1, 0) = -model.noise_cov.matrix(0, 1) / var_x;
  return p;
}

std::optional<Eigen::Matrix2cd> transfer_matrix(const BivariateVar& model, double omega) {
  const Eigen::Matrix2cd pa = normalization_matrix(model).cast<std::complex<double>>() *
                              lag_polynomial_at(model, omega);
  Eigen::JacobiSVD<Eigen::Matrix2cd> svd(pa);
  const auto& s = svd.singularValues();
  if (!(s(1) > 0.0) || s(0) / s(1) >= 1e12) return std::nullopt;
  return pa.inverse();
}

namespace {

struct DirectionalResult {
  double f = std::numeric_limits<double>::quiet_NaN();
  Eigen::Matrix2cd spectrum = Eigen::Matrix2cd::Constant(
      std::complex<double>(std::numeric_limits<double>::quiet_NaN(), 0.0));
  bool singular = true;
};

// Causality from the second variable to the first, with the spectral matrix.
DirectionalResult directional(const BivariateVar& model, double omega) {
  DirectionalResult r;
  const auto d = transfer_matrix(model, omega);
  if (!d) return r;
  const double sigma = model.noise_cov.matrix(0, 0);
  const double upsilon = model.noise_cov.matrix(0, 1);
  const double gamma_prime = model.noise_cov.matrix(1, 1) - upsilon * upsilon / sigma;
  Eigen::Matrix2cd normalized_cov = Eigen::Matrix2cd::Zero();
  normalized_cov(0, 0) = sigma;
  normalized_cov(1, 1) = gamma_prime;
  r.spectrum = (*d) * normalized_cov * d->adjoint();

  const std::complex<double> d11 = (*d)(0, 0);
  const std::complex<double> d12 = (*d)(0, 1);
  const double intrinsic = (d11 * sigma * std::conj(d11)).real();
  const double causal = (d12 * gamma_prime * std::conj(d12)).real();
  r.f = std::log((intrinsic + causal) / intrinsic);
  r.singular = false;
  return r;
}

}  // namespace

double spectral_causality_at(const BivariateVar& model, double omega) {
  return directional(model, omega).f;
}

SpectralCausality geweke_spectrum(const BivariateVar& model, std::span<const double> frequencies_hz,
                                  double sample_rate_hz) {
  if (!(sample_rate_hz > 0.0)) throw ValidationError("sample rate must be positive");
  const double nyquist = sample_rate_hz / 2.0;
  const BivariateVar reversed = model.swapped();
  SpectralCausality out;
  out.sample_rate_hz = sample_rate_hz;
  for (double f : frequencies_hz) {
    if (!(f > 0.0) || f > nyquist * (1.0 + 1e-12)) {
      throw ValidationError("frequency " + std::to_string(f) + " Hz outside (0, " +
                            std::to_string(nyquist) + "]");
    }
    const double omega = 2.0 * std::numbers::pi * f / sample_rate_hz;
    const DirectionalResult yx = directional(model, omega);
    const DirectionalResult xy = directional(reversed, omega);
    out.frequencies_hz.push_back(f);
    out.f_y_to_x.push_back(yx.f);
    out.f_x_to_y.push_back(xy.f);
    out.spectra.push_back(yx.spectrum);
    out.singular.push_back(yx.singular || xy.singular);
  }
  return out;
}

double integrated_spectral_causality(const BivariateVar& model, std::size_t points) {
  if (points == 0) throw ValidationError("need at least one integration point");
  double sum = 0.0;
  for (std::size_t i = 0; i < points; ++i) {
    const double omega = std::numbers::pi * (static_cast<double>(i) + 0.5) / static_cast<double>(points);
    sum += spectral_causality_at(model, omega);
  }
  return sum / static_cast<double>(points);
}

std::vector<double> default_frequency_grid(std::optional<double> sample_rate_hz) {
  std::vector<double> grid;
  if (sample_rate_hz) {
    const double nyquist = *sample_rate_hz / 2.0;
    for (int f = 1; f <= 30; ++f) {
      if (f <= nyquist) grid.push_back(f);
    }
    for (double f : {50.0, 100.0}) {
      if (f <= nyquist) grid.push_back(f);
    }
    return grid;
  }
  for (int i = 1; i <= 64; ++i) grid.push_back(0.5 * static_cast<double>(i) / 65.0);
  return grid;
}

namespace {

double parse_number(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) {
    throw ValidationError("bad frequency '" + std::string(s) + "'");
  }
  return v;
}

}  // namespace

std::vector<double> parse_frequency_grid(const std::string& text) {
  std::vector<double> grid;
  std::string_view rest = text;
  while (!rest.empty()) {
    const auto comma = rest.find(',');
    const std::string_view item = rest.substr(0, comma);
    rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
    const auto c1 = item.find(':');
    if (c1 == std::string_view::npos) {
      grid.push_back(parse_number(item));
      continue;
    }
    const auto c2 = item.find(':', c1 + 1);
    const double lo = parse_number(item.substr(0, c1));
    const double hi = parse_number(item.substr(c1 + 1, c2 == std::string_view::npos ? c2 : c2 - c1 - 1));
    const double step = c2 == std::string_view::npos ? 1.0 : parse_number(item.substr(c2 + 1));
    if (!(step > 0.0) || hi < lo) throw ValidationError("bad frequency range '" + std::string(item) + "'");
    const auto count = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
    for (std::size_t i = 0; i < count; ++i) grid.push_back(lo + step * static_cast<double>(i));
  }
  if (grid.empty()) throw ValidationError("empty frequency grid");
  return grid;
}

void write_spectral_csv(std::ostream& out, const SpectralCausality& sc) {
  out << "frequency_hz,f_y_to_x,f_x_to_y\n";
  char buf[64];
  auto put = [&](double v) {
    if (std::isnan(v)) {
      out << "NaN";
      return;
    }
    const auto r = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
    out.write(buf, r.ptr - buf);
  };
  for (std::size_t i = 0; i < sc.frequencies_hz.size(); ++i) {
    put(sc.frequencies_hz[i]);
    out << ',';
    put(sc.f_y_to_x[i]);
    out << ',';
    put(sc.f_x_to_y[i]);
    out << '\n';
  }
}

}  // namespace granger
