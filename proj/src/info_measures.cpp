#include "qfisher/info_measures.hpp"

#include <cmath>
#include <stdexcept>

#include <fmt/format.h>

namespace qfisher {

void InfoIndices::validate() const {
  if (!(q > 0.0)) throw std::invalid_argument(fmt::format("q must be > 0, got {}", q));
  if (!(beta > 1.0)) throw std::invalid_argument(fmt::format("beta must be > 1, got {}", beta));
  if (dim < 1) throw std::invalid_argument("dimension must be >= 1");
}

double m_q(const GridDensity& f, double q) {
  if (q < 0.0 || !std::isfinite(q)) throw std::invalid_argument(fmt::format("M_q needs q >= 0, got {}", q));
  const auto v = f.values();
  std::vector<double> integrand(f.size(), 0.0);
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (f.in_support(i)) integrand[i] = std::pow(v[i], q);
  }
  return integrate(f, integrand);
}

double shannon_entropy(const GridDensity& f) {
  const auto v = f.values();
  std::vector<double> integrand(f.size(), 0.0);
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (f.in_support(i)) integrand[i] = -v[i] * std::log(v[i]);
  }
  return integrate(f, integrand);
}

double tsallis_entropy(const GridDensity& f, double q) {
  if (std::abs(q - 1.0) < kShannonThreshold) return shannon_entropy(f);
  return (m_q(f, q) - 1.0) / (1.0 - q);
}

double renyi_entropy(const GridDensity& f, double q) {
  if (std::abs(q - 1.0) < kShannonThreshold) return shannon_entropy(f);
  return std::log(m_q(f, q)) / (1.0 - q);
}

double entropy_power(const GridDensity& f, double q) {
  const double n = f.dim();
  if (std::abs(q - 1.0) < kShannonThreshold) return std::exp(2.0 / n * shannon_entropy(f));
  const double mq = m_q(f, q);
  const double direct = std::pow(mq, 2.0 / n / (1.0 - q));
  const double via_renyi = std::exp(2.0 / n * std::log(mq) / (1.0 - q));
  if (std::abs(direct - via_renyi) > 1e-10 * std::abs(direct)) {
    throw NumericalError(fmt::format("entropy power: M_q form {} and Renyi form {} disagree", direct, via_renyi));
  }
  return direct;
}

double fisher_integral(const GridDensity& f, double q, double beta, double dual_norm_p) {
  if (!(beta > 1.0)) throw std::invalid_argument(fmt::format("beta must be > 1, got {}", beta));
  if (!(q > 0.0)) throw std::invalid_argument(fmt::format("q must be > 0, got {}", q));
  const auto grad = gradient_norm(f, dual_norm_p);
  const auto v = f.values();
  // f^{β(q−1)+1} (|∇f|/f)^β written as one power of f to avoid 0/0 at the
  // support boundary.
  const double exponent = beta * (q - 1.0) + 1.0 - beta;
  std::vector<double> integrand(f.size(), 0.0);
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (!f.in_support(i) || grad[i] == 0.0) continue;
    integrand[i] = std::pow(v[i], exponent) * std::pow(grad[i], beta);
  }
  return integrate(f, integrand);
}

double phi_fisher(const GridDensity& f, double q, double beta) { return fisher_integral(f, q, beta, 2.0); }

double i_fisher(const GridDensity& f, double q, double beta) {
  return phi_fisher(f, q, beta) / std::pow(m_q(f, q), beta);
}

FisherEstimate phi_fisher_refined(const std::function<GridDensity(int level)>& make_grid, double q,
                                  double beta) {
  FisherEstimate est;
  for (int level = 0; level < 3; ++level) est.trace[level] = phi_fisher(make_grid(level), q, beta);
  const auto& v = est.trace;
  est.value = v[2];
  const double d1 = v[1] - v[0];
  const double d2 = v[2] - v[1];
  // Convergent values settle (increments shrink at the rule's order); a
  // boundary singularity keeps them growing, either geometrically (ratio
  // test) or by non-shrinking increments (power/log blow-up).
  const bool ratio_growth = v[0] > 0.0 && v[1] / v[0] > 1.5 && v[2] / v[1] > 1.5;
  const bool increments_persist = d1 > 0.0 && d2 >= 0.9 * d1 && d2 > 1e-3 * std::abs(v[2]);
  est.divergent = ratio_growth || increments_persist || !std::isfinite(v[2]);
  return est;
}

namespace {

GridDensity power_normalized(const GridDensity& f, double power) {
  const auto v = f.values();
  std::vector<double> out(f.size(), 0.0);
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (f.in_support(i)) out[i] = std::pow(v[i], power);
  }
  return normalize(f.with_values(std::move(out)));
}

// Mass of g that sits on the outermost layer of nodes, times the grid
// extent: a proxy for how much of g lies beyond the grid.
double edge_mass_fraction(const GridDensity& g) {
  const auto v = g.values();
  const auto& axes = g.axes();
  double edge = 0.0;
  if (g.geometry() == Geometry::radial) {
    const double R = axes[0].upper;
    edge = v.back() * unit_sphere_area(g.dim()) * std::pow(R, g.dim() - 1) * R;
  } else if (axes.size() == 1) {
    edge = std::max(v.front(), v.back()) * axes[0].length();
  } else {
    double vmax = 0.0;
    const std::size_t n0 = axes[0].count, n1 = axes[1].count;
    for (std::size_t i = 0; i < n0; ++i) {
      for (std::size_t j = 0; j < n1; ++j) {
        if (i == 0 || j == 0 || i + 1 == n0 || j + 1 == n1) vmax = std::max(vmax, v[i * n1 + j]);
      }
    }
    edge = vmax * axes[0].length() * axes[1].length();
  }
  return edge;
}

}  // namespace

GridDensity escort(const GridDensity& f, double q) {
  if (!(q > 0.0)) throw std::invalid_argument("escort order q must be > 0");
  if (q == 1.0) return f;
  GridDensity g = power_normalized(f, 1.0 / q);
  // A density that fills its box (e.g. uniform) keeps its boundary mass
  // under the escort; a truncated heavy tail gains a lot of it.
  const double edge = edge_mass_fraction(g);
  if (edge > 1e-6 && edge > 10.0 * edge_mass_fraction(f)) {
    throw DivergenceError(fmt::format(
        "escort integral of order q = {} is not contained in the grid (edge mass proxy {}); "
        "the tail of f^(1/q) is too heavy",
        q, edge));
  }
  return g;
}

GridDensity escort_inverse(const GridDensity& g, double q) {
  if (!(q > 0.0)) throw std::invalid_argument("escort order q must be > 0");
  if (q == 1.0) return g;
  return power_normalized(g, q);
}

}  // namespace qfisher
