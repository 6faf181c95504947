#include "qfisher/inequalities.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>

#include <fmt/format.h>

#include "qfisher/estimation.hpp"
#include "qfisher/info_measures.hpp"

namespace qfisher {

void PerturbationSpec::validate() const {
  if (count == 0) throw std::invalid_argument("perturbation family needs count >= 1");
  if (amplitude_levels == 0) throw std::invalid_argument("perturbation family needs amplitude_levels >= 1");
  if (!(amplitude_min > 0.0) || !(amplitude_max >= amplitude_min) || amplitude_max >= 1.0) {
    throw std::invalid_argument(
        fmt::format("amplitudes must satisfy 0 < min <= max < 1, got [{}, {}]", amplitude_min, amplitude_max));
  }
  if (nodes < 3) throw std::invalid_argument("perturbation grids need at least 3 nodes");
}

double PerturbationSpec::amplitude(std::size_t level) const {
  if (amplitude_levels == 1) return amplitude_min;
  const double s = static_cast<double>(level) / static_cast<double>(amplitude_levels - 1);
  return amplitude_min * std::pow(amplitude_max / amplitude_min, s);
}

namespace {

constexpr int kModes = 4;

struct Shape {
  std::array<double, kModes> cos_coef{};
  std::array<double, kModes> sin_coef{};
};

Shape random_shape(std::uint64_t seed, std::size_t index, bool even_only) {
  std::mt19937_64 rng(seed * 0x9E3779B97F4A7C15ULL + index + 1);
  std::normal_distribution<double> normal(0.0, 1.0);
  Shape s;
  for (int k = 0; k < kModes; ++k) {
    s.cos_coef[k] = normal(rng);
    s.sin_coef[k] = even_only ? 0.0 : normal(rng);
  }
  return s;
}

double shape_value(const Shape& s, double u) {
  if (std::abs(u) >= 1.0) return 0.0;
  const double window = std::pow(1.0 - u * u, 3);
  double sum = 0.0;
  for (int k = 0; k < kModes; ++k) {
    const double arg = (k + 1) * std::numbers::pi * u;
    sum += s.cos_coef[k] * std::cos(arg) + s.sin_coef[k] * std::sin(arg);
  }
  return window * sum;
}

double perturbation_width(const QGaussianParams& G) {
  return G.compact() ? 0.8 * G.support_radius() : 3.0 * std::pow(G.gamma(), -1.0 / G.alpha());
}

// Coordinate fed to the shape: signed x in one dimension, ‖x‖ otherwise.
double shape_coordinate(const GridDensity& g, std::size_t i) {
  if (g.dim() == 1 && g.geometry() == Geometry::cartesian) return g.coordinates(i)[0];
  return g.norm(i);
}

double log_ratio_root(const std::function<double(double)>& value, double target, double guess) {
  return find_root_positive([&](double x) { return std::log(value(x) / target); }, guess, 1e-15);
}

double entropy_power_closed(const QGaussianParams& G, double q) {
  const double n = G.dim();
  if (std::abs(q - 1.0) < kShannonThreshold) return std::exp(2.0 / n * shannon_entropy_exponential(G));
  return std::pow(information_generating(G, q), 2.0 / n / (1.0 - q));
}

void summarize_family(VerificationReport& r, const PerturbationSpec& spec,
                      const std::vector<PerturbedDensity>& family, double value_g, const std::vector<double>& values,
                      const Tolerances& tol) {
  double worst = std::numeric_limits<double>::infinity();
  double min_value = std::numeric_limits<double>::infinity();
  std::size_t argmin = 0;
  std::vector<double> gaps(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    gaps[i] = (values[i] - value_g) / std::abs(value_g);
    if (gaps[i] < worst) {
      worst = gaps[i];
      argmin = i;
    }
    min_value = std::min(min_value, values[i]);
  }
  r.set("value_G", value_g);
  r.set("min_perturbed", min_value);
  r.set("worst_gap", worst);
  r.set("members", static_cast<double>(values.size()));
  r.set("argmin_amplitude", family[argmin].amplitude);
  r.set("argmin_at_smallest_amplitude", family[argmin].level == 0 ? 1.0 : 0.0);

  // Exponent of gap ∝ amplitude^p, fitted per shape over its levels.
  double p_min = std::numeric_limits<double>::infinity();
  double p_max = -std::numeric_limits<double>::infinity();
  std::size_t fitted = 0;
  const std::size_t shapes = (family.size() + spec.amplitude_levels - 1) / spec.amplitude_levels;
  for (std::size_t s = 0; s < shapes; ++s) {
    std::vector<double> la, lg;
    bool usable = true;
    for (std::size_t i = 0; i < family.size(); ++i) {
      if (family[i].shape != s) continue;
      if (!(gaps[i] > 0.0)) usable = false;
      la.push_back(std::log(family[i].amplitude));
      lg.push_back(std::log(std::max(gaps[i], std::numeric_limits<double>::min())));
    }
    if (!usable || la.size() < 3) continue;
    const double p = fit_slope(la, lg);
    p_min = std::min(p_min, p);
    p_max = std::max(p_max, p);
    ++fitted;
  }
  r.set("gap_exponent_min", fitted ? p_min : std::numeric_limits<double>::quiet_NaN());
  r.set("gap_exponent_max", fitted ? p_max : std::numeric_limits<double>::quiet_NaN());
  r.set("gap_exponent_shapes", static_cast<double>(fitted));

  if (!std::isfinite(value_g) || !std::isfinite(min_value)) {
    r.fail("non-finite functional value in the family");
  } else if (worst < -tol.inequality_slack) {
    r.fail(fmt::format("member with amplitude {} falls below the q-Gaussian value (relative gap {})",
                       family[argmin].amplitude, worst));
  }
}

}  // namespace

std::vector<PerturbedDensity> perturbation_family(const QGaussianParams& G, const PerturbationSpec& spec) {
  spec.validate();
  const GridDensity base = to_grid(G, spec.nodes);
  const double width = perturbation_width(G);
  const bool even_only = base.dim() != 1 || base.geometry() != Geometry::cartesian;
  const auto v = base.values();

  std::vector<PerturbedDensity> out;
  out.reserve(spec.count);
  std::vector<double> bump(base.size());
  std::size_t current_shape = std::numeric_limits<std::size_t>::max();
  for (std::size_t i = 0; i < spec.count; ++i) {
    const std::size_t shape = i / spec.amplitude_levels;
    const std::size_t level = i % spec.amplitude_levels;
    if (shape != current_shape) {
      const Shape s = random_shape(spec.seed, shape, even_only);
      double peak = 0.0;
      for (std::size_t j = 0; j < base.size(); ++j) {
        bump[j] = shape_value(s, shape_coordinate(base, j) / width);
        peak = std::max(peak, std::abs(bump[j]));
      }
      if (!(peak > 0.0)) throw NumericalError("perturbation shape vanishes on the grid");
      for (double& b : bump) b /= peak;
      current_shape = shape;
    }
    const double a = spec.amplitude(level);
    std::vector<double> values(base.size());
    for (std::size_t j = 0; j < base.size(); ++j) values[j] = v[j] * (1.0 + a * bump[j]);
    out.push_back({shape, level, a, normalize(base.with_values(std::move(values)))});
  }
  return out;
}

GridDensity restore_moment(const GridDensity& f, double alpha, double target) {
  if (!(target > 0.0)) throw std::invalid_argument("target moment must be > 0");
  const double m = radial_moment(f, alpha);
  return f.dilated(std::pow(target / m, 1.0 / alpha));
}

GridDensity restore_entropy_power(const GridDensity& f, double q, double target) {
  if (!(target > 0.0)) throw std::invalid_argument("target entropy power must be > 0");
  return f.dilated(std::sqrt(target / entropy_power(f, q)));
}

bool stam_hypothesis(double q, double beta, int dim) {
  const double n = dim;
  const double alpha = beta / (beta - 1.0);
  return q > std::max((n - 1.0) / n, n / (n + alpha));
}

double stam_product(const GridDensity& f, double q, double beta) {
  return std::pow(i_fisher(f, q, beta), 1.0 / beta) * std::sqrt(entropy_power(f, q));
}

VerificationReport stam_ratio(const GridDensity& f, double q, double beta, const Tolerances& tol,
                              std::size_t reference_nodes) {
  if (!(beta > 1.0)) throw std::invalid_argument("beta must be > 1");
  if (!stam_hypothesis(q, beta, f.dim())) {
    throw std::invalid_argument(fmt::format(
        "Stam inequality needs q > max((n-1)/n, n/(n+alpha)); got q = {}, beta = {}, n = {}", q, beta, f.dim()));
  }
  const double alpha = beta / (beta - 1.0);
  const double gamma = beta == 2.0 ? 1.0 : gamma_for_moment(q, alpha, f.dim(), radial_moment(f, alpha));
  const QGaussianParams G(q, alpha, gamma, f.dim());
  const double product_f = stam_product(f, q, beta);
  const double product_g = stam_product(to_grid(G, reference_nodes), q, beta);

  VerificationReport r("stam_ratio");
  r.set("q", q);
  r.set("beta", beta);
  r.set("reference_gamma", gamma);
  r.set("product_f", product_f);
  r.set("product_G", product_g);
  r.set("ratio", product_f / product_g);
  r.set("gap", product_f / product_g - 1.0);
  if (!std::isfinite(r.at("ratio"))) {
    r.fail("Stam ratio is not finite");
  } else if (r.at("ratio") < 1.0 - tol.inequality_slack) {
    r.fail(fmt::format("Stam inequality violated: ratio {}", r.at("ratio")));
  }
  return r;
}

double stam_scaling_exponent(const GridDensity& f, double q, double beta, std::span<const double> factors) {
  if (factors.size() < 2) throw std::invalid_argument("scaling fit needs at least two factors");
  std::vector<double> lc, lp;
  for (double c : factors) {
    lc.push_back(std::log(c));
    lp.push_back(std::log(stam_product(f.dilated(c), q, beta)));
  }
  return fit_slope(lc, lp);
}

double gamma_for_moment(double q, double alpha, int dim, double target_moment) {
  if (!(target_moment > 0.0)) throw std::invalid_argument("target moment must be > 0");
  return log_ratio_root([&](double g) { return moment_alpha(QGaussianParams(q, alpha, g, dim)); }, target_moment,
                        1.0);
}

double gamma_for_entropy_power(double q, double alpha, int dim, double target_power) {
  if (!(target_power > 0.0)) throw std::invalid_argument("target entropy power must be > 0");
  return log_ratio_root([&](double g) { return entropy_power_closed(QGaussianParams(q, alpha, g, dim), q); },
                        target_power, 1.0);
}

VerificationReport stam_family(double q, double beta, int dim, const PerturbationSpec& spec,
                               const Tolerances& tol) {
  if (!stam_hypothesis(q, beta, dim)) {
    throw std::invalid_argument(fmt::format("Stam family outside the hypothesis range (q = {}, beta = {}, n = {})",
                                            q, beta, dim));
  }
  const double alpha = beta / (beta - 1.0);
  const QGaussianParams G(q, alpha, 1.0, dim);
  const auto family = perturbation_family(G, spec);
  std::vector<double> values;
  values.reserve(family.size());
  for (const auto& member : family) values.push_back(stam_product(member.density, q, beta));
  VerificationReport r("stam_family");
  r.set("q", q);
  r.set("beta", beta);
  summarize_family(r, spec, family, stam_product(to_grid(G, spec.nodes), q, beta), values, tol);
  return r;
}

VerificationReport min_fisher_fixed_moment(double q, double beta, int dim, double target_moment,
                                           const PerturbationSpec& spec, const Tolerances& tol) {
  const double alpha = beta / (beta - 1.0);
  const QGaussianParams G(q, alpha, gamma_for_moment(q, alpha, dim, target_moment), dim);
  const auto family = perturbation_family(G, spec);
  std::vector<double> values;
  double restore_err = 0.0;
  for (const auto& member : family) {
    const GridDensity f = restore_moment(member.density, alpha, target_moment);
    restore_err = std::max(restore_err, std::abs(radial_moment(f, alpha) / target_moment - 1.0));
    values.push_back(i_fisher(f, q, beta));
  }
  const GridDensity g = to_grid(G, spec.nodes);
  VerificationReport r("min_fisher_fixed_moment");
  r.set("q", q);
  r.set("beta", beta);
  r.set("gamma", G.gamma());
  r.set("target_moment", target_moment);
  r.set("moment_G", radial_moment(g, alpha));
  r.set("constraint_error", restore_err);
  summarize_family(r, spec, family, i_fisher(g, q, beta), values, tol);
  return r;
}

VerificationReport min_fisher_fixed_entropy(double q, double beta, int dim, double target_power,
                                            const PerturbationSpec& spec, const Tolerances& tol) {
  const double alpha = beta / (beta - 1.0);
  const QGaussianParams G(q, alpha, gamma_for_entropy_power(q, alpha, dim, target_power), dim);
  const auto family = perturbation_family(G, spec);
  std::vector<double> values;
  double restore_err = 0.0;
  for (const auto& member : family) {
    const GridDensity f = restore_entropy_power(member.density, q, target_power);
    restore_err = std::max(restore_err, std::abs(entropy_power(f, q) / target_power - 1.0));
    values.push_back(i_fisher(f, q, beta));
  }
  const GridDensity g = to_grid(G, spec.nodes);
  VerificationReport r("min_fisher_fixed_entropy");
  r.set("q", q);
  r.set("beta", beta);
  r.set("gamma", G.gamma());
  r.set("target_entropy_power", target_power);
  r.set("entropy_power_G", entropy_power(g, q));
  r.set("constraint_error", restore_err);
  summarize_family(r, spec, family, i_fisher(g, q, beta), values, tol);
  return r;
}

VerificationReport qcr_family(double q, double alpha, int dim, const PerturbationSpec& spec,
                              const Tolerances& tol) {
  const QGaussianParams G(q, alpha, 1.0, dim);
  const auto family = perturbation_family(G, spec);
  std::vector<double> values;
  for (const auto& member : family) values.push_back(qcr_product(member.density, q, alpha, tol).at("product"));
  const auto at_g = qcr_product(to_grid(G, spec.nodes), q, alpha, tol);
  VerificationReport r("qcr_family");
  r.set("q", q);
  r.set("alpha", alpha);
  r.set("product_G", at_g.at("product"));
  r.set("bound", dim);
  summarize_family(r, spec, family, at_g.at("product"), values, tol);
  if (r.at("min_perturbed") < dim * (1.0 - tol.inequality_slack)) {
    r.fail(fmt::format("q-Cramer-Rao product {} below the bound {}", r.at("min_perturbed"), dim));
  }
  return r;
}

}  // namespace qfisher
