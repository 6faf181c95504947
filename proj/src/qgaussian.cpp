#include "qfisher/qgaussian.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <fmt/format.h>

namespace qfisher {

namespace bm = boost::math;

QGaussianParams::QGaussianParams(double q, double alpha, double gamma, int dim)
    : q_(q), alpha_(alpha), gamma_(gamma), dim_(dim) {
  if (!(q > 0.0) || !std::isfinite(q)) throw std::invalid_argument(fmt::format("q must be > 0, got {}", q));
  if (!(alpha > 1.0) || !std::isfinite(alpha)) {
    throw std::invalid_argument(fmt::format("alpha must be > 1, got {}", alpha));
  }
  if (!(gamma > 0.0) || !std::isfinite(gamma)) {
    throw std::invalid_argument(fmt::format("gamma must be > 0, got {}", gamma));
  }
  if (dim < 1) throw std::invalid_argument(fmt::format("dimension must be >= 1, got {}", dim));
  if (q < 1.0 && !(alpha / (1.0 - q) > dim)) {
    throw std::invalid_argument(fmt::format(
        "q-Gaussian with q = {} is not integrable: tail exponent alpha/(1-q) = {} must exceed n = {}", q,
        alpha / (1.0 - q), dim));
  }
}

double QGaussianParams::support_radius() const noexcept {
  if (!compact()) return std::numeric_limits<double>::infinity();
  return std::pow((q_ - 1.0) * gamma_, -1.0 / alpha_);
}

double profile(const QGaussianParams& p, double r) {
  const double ra = std::pow(r, p.alpha());
  if (p.exponential()) return std::exp(-p.gamma() * ra);
  const double z = -(p.q() - 1.0) * p.gamma() * ra;
  if (z <= -1.0) return 0.0;
  return std::exp(std::log1p(z) / (p.q() - 1.0));
}

double radial_power_integral(const QGaussianParams& p, double power, double s) {
  const int n = p.dim();
  const double alpha = p.alpha();
  const double a = (n + s) / alpha;
  if (!(power > 0.0)) throw std::invalid_argument("power must be positive");
  if (!(a > 0.0)) throw DivergenceError("radial integral diverges at the origin");
  const double lead = unit_sphere_area(n) / alpha;
  if (p.exponential()) {
    return lead * std::pow(power * p.gamma(), -a) * std::tgamma(a);
  }
  const double q = p.q();
  if (q > 1.0) {
    return lead * std::pow((q - 1.0) * p.gamma(), -a) * bm::beta(a, power / (q - 1.0) + 1.0);
  }
  const double b = power / (1.0 - q) - a;
  if (!(b > 0.0)) {
    throw DivergenceError(fmt::format(
        "integral of |x|^{} G^{} diverges: needs {}/(1-q) = {} > (n+s)/alpha = {}", s, power, power,
        power / (1.0 - q), a));
  }
  return lead * std::pow((1.0 - q) * p.gamma(), -a) * bm::beta(a, b);
}

double normalization(const QGaussianParams& p) { return radial_power_integral(p, 1.0, 0.0); }

namespace {

double radial_quadrature(const QGaussianParams& p, double s) {
  const int n = p.dim();
  auto integrand = [&](double r) {
    const double u = r > 0.0 ? profile(p, r) : 0.0;
    return u > 0.0 ? std::pow(r, n - 1 + s) * u : 0.0;
  };
  double value = 0.0;
  if (p.compact()) {
    bm::quadrature::tanh_sinh<double> rule;
    value = rule.integrate(integrand, 0.0, p.support_radius());
  } else {
    bm::quadrature::exp_sinh<double> rule;
    value = rule.integrate(integrand, 0.0, std::numeric_limits<double>::infinity());
  }
  return unit_sphere_area(n) * value;
}

}  // namespace

double normalization_quadrature(const QGaussianParams& p) { return radial_quadrature(p, 0.0); }

double pdf_radial(const QGaussianParams& p, double r) { return profile(p, r) / normalization(p); }

double pdf(const QGaussianParams& p, std::span<const double> x) {
  double r2 = 0.0;
  for (double v : x) r2 += v * v;
  return pdf_radial(p, std::sqrt(r2));
}

double moment_alpha(const QGaussianParams& p) {
  if (p.q() < 1.0 && !(p.alpha() / (1.0 - p.q()) > p.dim() + p.alpha())) {
    throw DivergenceError(fmt::format(
        "E[|X|^alpha] diverges for q = {}: needs alpha/(1-q) = {} > n + alpha = {}", p.q(),
        p.alpha() / (1.0 - p.q()), p.dim() + p.alpha()));
  }
  return radial_power_integral(p, 1.0, p.alpha()) / normalization(p);
}

double moment_alpha_quadrature(const QGaussianParams& p) {
  return radial_quadrature(p, p.alpha()) / normalization_quadrature(p);
}

double information_generating(const QGaussianParams& p, double q) {
  return radial_power_integral(p, q, 0.0) / std::pow(normalization(p), q);
}

double shannon_entropy_exponential(const QGaussianParams& p) {
  if (!p.exponential()) throw std::invalid_argument("closed-form Shannon entropy needs q = 1");
  // ln G = −ln Z − γ r^α
  return std::log(normalization(p)) + p.gamma() * moment_alpha(p);
}

double radial_cdf(const QGaussianParams& p, double r) {
  if (r <= 0.0) return 0.0;
  const double a = p.dim() / p.alpha();
  const double ra = std::pow(r, p.alpha());
  if (p.exponential()) return bm::gamma_p(a, p.gamma() * ra);
  const double q = p.q();
  if (q > 1.0) {
    const double s = (q - 1.0) * p.gamma() * ra;
    if (s >= 1.0) return 1.0;
    return bm::ibeta(a, 1.0 / (q - 1.0) + 1.0, s);
  }
  const double s = (1.0 - q) * p.gamma() * ra;
  return bm::ibeta(a, 1.0 / (1.0 - q) - a, s / (1.0 + s));
}

namespace {

// Radius r with P(‖X‖ ≤ r) = F, from the exact incomplete Beta/Gamma inverse.
// `upper_tail` = 1 − F, passed separately to keep precision near F = 1.
double radial_quantile(const QGaussianParams& p, double F, double upper_tail) {
  if (F <= 0.0) return 0.0;
  const double a = p.dim() / p.alpha();
  const double inv_alpha = 1.0 / p.alpha();
  if (p.exponential()) {
    const double y = upper_tail < 0.5 ? bm::gamma_q_inv(a, upper_tail) : bm::gamma_p_inv(a, F);
    return std::pow(y / p.gamma(), inv_alpha);
  }
  const double q = p.q();
  if (q > 1.0) {
    if (upper_tail <= 0.0) return p.support_radius();
    const double b = 1.0 / (q - 1.0) + 1.0;
    const double s = upper_tail < 0.5 ? bm::ibetac_inv(a, b, upper_tail) : bm::ibeta_inv(a, b, F);
    return std::pow(s / ((q - 1.0) * p.gamma()), inv_alpha);
  }
  const double b = 1.0 / (1.0 - q) - a;
  const double z = upper_tail < 0.5 ? bm::ibetac_inv(a, b, upper_tail) : bm::ibeta_inv(a, b, F);
  const double s = z / (1.0 - z);
  return std::pow(s / ((1.0 - q) * p.gamma()), inv_alpha);
}

}  // namespace

double truncation_radius(const QGaussianParams& p, double tail_mass) {
  if (p.compact()) return p.support_radius();
  if (!(tail_mass > 0.0 && tail_mass < 1.0)) throw std::invalid_argument("tail mass must lie in (0, 1)");
  return radial_quantile(p, 1.0 - tail_mass, tail_mass);
}

GridDensity symmetric_grid(int dim, double extent, std::size_t nodes,
                           const std::function<double(double)>& radial_profile) {
  if (!(extent > 0.0) || !std::isfinite(extent)) throw std::invalid_argument("grid extent must be positive");
  if (dim == 1) {
    return GridDensity::from_function({Axis{-extent, extent, nodes}},
                                      [&](std::span<const double> x) { return radial_profile(std::abs(x[0])); });
  }
  if (dim == 2) {
    return GridDensity::from_function(
        {Axis{-extent, extent, nodes}, Axis{-extent, extent, nodes}},
        [&](std::span<const double> x) { return radial_profile(std::hypot(x[0], x[1])); });
  }
  return GridDensity::radial_from_function(dim, Axis{0.0, extent, nodes}, radial_profile);
}

GridDensity to_grid(const QGaussianParams& p, std::size_t nodes, double tail_mass) {
  const double z = normalization(p);
  return symmetric_grid(p.dim(), truncation_radius(p, tail_mass), nodes,
                        [&](double r) { return profile(p, r) / z; });
}

RadialSampler::RadialSampler(const QGaussianParams& p) : dim_(p.dim()) {
  constexpr double kTail = 1e-12;
  std::vector<double> F(kKnots);
  std::vector<double> r(kKnots);
  // Knots cluster at both ends of [0, 1], where the quantile function is steep.
  for (std::size_t i = 0; i < kKnots; ++i) {
    const double theta = std::numbers::pi * static_cast<double>(i) / static_cast<double>(kKnots - 1);
    F[i] = 0.5 * (1.0 - std::cos(theta));
  }
  F.back() = p.compact() ? 1.0 : 1.0 - kTail;
  for (std::size_t i = 0; i < kKnots; ++i) {
    const double upper = i + 1 == kKnots ? (p.compact() ? 0.0 : kTail) : 0.5 * (1.0 + std::cos(
        std::numbers::pi * static_cast<double>(i) / static_cast<double>(kKnots - 1)));
    r[i] = radial_quantile(p, F[i], upper);
  }
  quantile_ = MonotoneCubic(std::move(F), std::move(r));
}

PointSet sample(const QGaussianParams& p, std::uint64_t seed, std::size_t count) {
  PointSet out;
  out.dim = p.dim();
  if (count == 0) return out;
  const RadialSampler sampler(p);
  std::mt19937_64 rng(seed);
  out.coords.resize(count * static_cast<std::size_t>(p.dim()));
  for (std::size_t i = 0; i < count; ++i) {
    sampler.draw(rng, std::span<double>(out.coords.data() + i * p.dim(), static_cast<std::size_t>(p.dim())));
  }
  return out;
}

// ---------------------------------------------------------------------------

DiffusionParams::DiffusionParams(double m, double beta, int dim) : m_(m), beta_(beta), dim_(dim) {
  if (!(beta > 1.0) || !std::isfinite(beta)) throw std::invalid_argument(fmt::format("beta must be > 1, got {}", beta));
  if (!(m > 0.0) || !std::isfinite(m)) throw std::invalid_argument(fmt::format("m must be > 0, got {}", m));
  if (dim < 1) throw std::invalid_argument("dimension must be >= 1");
  if (!(delta() > 0.0)) {
    throw std::invalid_argument(fmt::format(
        "no Barenblatt solution: delta = n(beta-1)m + beta - n = {} must be > 0 "
        "(equivalently m(beta-1) + beta/n - 1 > 0)",
        delta()));
  }
}

double DiffusionParams::q() const noexcept {
  const double mb = m_ * (beta_ - 1.0);
  if (std::abs(mb - 1.0) < 1e-12) return 1.0;
  return m_ + 1.0 - 1.0 / (beta_ - 1.0);
}

double DiffusionParams::delta() const noexcept {
  return dim_ * (beta_ - 1.0) * m_ + beta_ - dim_;
}

double DiffusionParams::k() const noexcept {
  return (m_ * (beta_ - 1.0) - 1.0) / (m_ * beta_) * std::pow(1.0 / delta(), 1.0 / (beta_ - 1.0));
}

double DiffusionParams::exponential_rate() const noexcept {
  return (beta_ - 1.0) * (beta_ - 1.0) / std::pow(beta_, alpha());
}

double barenblatt(const DiffusionParams& d, double C, double x_norm, double t) {
  if (!(t > 0.0)) throw std::invalid_argument(fmt::format("Barenblatt profile needs t > 0, got {}", t));
  const double delta = d.delta();
  const double xi = x_norm * std::pow(t, -1.0 / delta);
  const double xi_a = std::pow(xi, d.alpha());
  const double amplitude = std::pow(t, -d.dim() / delta);
  if (d.exponential()) return amplitude * C * std::exp(-d.exponential_rate() * xi_a);
  const double base = C - d.k() * xi_a;
  if (base <= 0.0) return 0.0;
  return amplitude * std::pow(base, 1.0 / (d.q() - 1.0));
}

double barenblatt(const DiffusionParams& d, double C, std::span<const double> x, double t) {
  double r2 = 0.0;
  for (double v : x) r2 += v * v;
  return barenblatt(d, C, std::sqrt(r2), t);
}

QGaussianParams barenblatt_as_qgaussian(const DiffusionParams& d, double C, double t) {
  if (!(t > 0.0)) throw std::invalid_argument("Barenblatt profile needs t > 0");
  const double time_scale = std::pow(t, -d.alpha() / d.delta());
  if (d.exponential()) return {1.0, d.alpha(), d.exponential_rate() * time_scale, d.dim()};
  const double q = d.q();
  return {q, d.alpha(), d.k() / (C * (q - 1.0)) * time_scale, d.dim()};
}

double barenblatt_mass(const DiffusionParams& d, double C) {
  if (!(C > 0.0)) throw std::invalid_argument("Barenblatt constant C must be positive");
  // B(ξ) = C^{1/(q−1)} u_γ(ξ) with (q−1)γ = k/C, or C·u_γ at q = 1.
  const QGaussianParams g = barenblatt_as_qgaussian(d, C, 1.0);
  const double amplitude = d.exponential() ? C : std::pow(C, 1.0 / (d.q() - 1.0));
  return amplitude * normalization(g);
}

double barenblatt_mass_constant(const DiffusionParams& d) {
  try {
    return find_root_positive([&](double C) { return barenblatt_mass(d, C) - 1.0; }, 1.0, 1e-15);
  } catch (const NumericalError& e) {
    throw NumericalError(std::string("Barenblatt mass constant: ") + e.what());
  }
}

}  // namespace qfisher
