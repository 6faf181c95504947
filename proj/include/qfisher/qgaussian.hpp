#pragma once

// Generalized q-Gaussians G(x) ∝ (1 − (q−1)γ‖x‖^α)_+^{1/(q−1)} (and the
// stretched exponential exp(−γ‖x‖^α) at q = 1), plus the Barenblatt
// self-similar solutions of ∂f/∂t = div(|∇f^m|^{β−2} ∇f^m).

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <vector>

#include "qfisher/grid.hpp"
#include "qfisher/numerics.hpp"

namespace qfisher {

class QGaussianParams {
 public:
  /// Requires q > 0, α > 1, γ > 0, n ≥ 1 and, for q < 1, α/(1−q) > n so
  /// that the density is integrable. Throws std::invalid_argument otherwise.
  QGaussianParams(double q, double alpha, double gamma, int dim);

  double q() const noexcept { return q_; }
  double alpha() const noexcept { return alpha_; }
  double gamma() const noexcept { return gamma_; }
  int dim() const noexcept { return dim_; }

  /// q = 1 is stored exactly and selects the exp(−γ‖x‖^α) branch.
  bool exponential() const noexcept { return q_ == 1.0; }
  bool compact() const noexcept { return q_ > 1.0; }
  /// ((q−1)γ)^{−1/α} for q > 1, +inf otherwise.
  double support_radius() const noexcept;

  QGaussianParams with_gamma(double gamma) const { return {q_, alpha_, gamma, dim_}; }

 private:
  double q_;
  double alpha_;
  double gamma_;
  int dim_;
};

/// Unnormalized radial profile u(r) = (1 − (q−1)γ r^α)_+^{1/(q−1)}.
double profile(const QGaussianParams& p, double r);

/// ∫_{R^n} ‖x‖^s u(x)^power dx in closed form (Beta/Gamma functions).
/// Throws DivergenceError when the integral is infinite.
double radial_power_integral(const QGaussianParams& p, double power, double s = 0.0);

/// Z = ∫ u dx, closed form.
double normalization(const QGaussianParams& p);
/// Same integral by adaptive double-exponential quadrature (independent path).
double normalization_quadrature(const QGaussianParams& p);

double pdf(const QGaussianParams& p, std::span<const double> x);
double pdf_radial(const QGaussianParams& p, double r);

/// E[‖X‖^α], closed form; DivergenceError when α/(1−q) ≤ n+α for q < 1.
double moment_alpha(const QGaussianParams& p);
double moment_alpha_quadrature(const QGaussianParams& p);

/// M_q[G] = ∫ G^q dx of the normalized density, closed form.
double information_generating(const QGaussianParams& p, double q);
/// Shannon entropy −∫ G ln G, closed form (q = 1 branch only).
double shannon_entropy_exponential(const QGaussianParams& p);

/// P(‖X‖ ≤ r).
double radial_cdf(const QGaussianParams& p, double r);

/// Radius beyond which the probability mass is `tail_mass` (support radius for q > 1).
double truncation_radius(const QGaussianParams& p, double tail_mass);

/// Sample on a symmetric grid of half-width `truncation_radius(p, tail_mass)`:
/// Cartesian for n ≤ 2 (`nodes` per axis), radial for n > 2. The grid is
/// uniform, so heavy tails (q < 1) need a larger `tail_mass` or more nodes.
GridDensity to_grid(const QGaussianParams& p, std::size_t nodes, double tail_mass = 1e-13);

/// Grid shape used by `to_grid` for an arbitrary radial profile.
GridDensity symmetric_grid(int dim, double extent, std::size_t nodes,
                           const std::function<double(double)>& radial_profile);

/// Points in R^n stored row-major.
struct PointSet {
  int dim = 1;
  std::vector<double> coords;

  std::size_t size() const noexcept { return coords.size() / static_cast<std::size_t>(dim); }
  std::span<const double> operator[](std::size_t i) const noexcept {
    return {coords.data() + i * static_cast<std::size_t>(dim), static_cast<std::size_t>(dim)};
  }
};

/// Inverse-CDF sampler: ‖X‖ from a 4096-knot monotone-cubic table of the
/// radial quantile function, direction uniform on the sphere.
class RadialSampler {
 public:
  static constexpr std::size_t kKnots = 4096;

  explicit RadialSampler(const QGaussianParams& p);

  double radius(double u) const { return quantile_(u); }
  /// Writes one draw into `out` (size n).
  template <class Rng>
  void draw(Rng& rng, std::span<double> out) const;

  int dim() const noexcept { return dim_; }

 private:
  int dim_;
  MonotoneCubic quantile_;
};

/// `count` i.i.d. draws from G, deterministic given `seed`.
PointSet sample(const QGaussianParams& p, std::uint64_t seed, std::size_t count);

// ---------------------------------------------------------------------------
// Doubly nonlinear diffusion parameters and Barenblatt profiles.

class DiffusionParams {
 public:
  /// Throws unless β > 1, n ≥ 1 and δ = n(β−1)m + β − n > 0.
  DiffusionParams(double m, double beta, int dim);

  double m() const noexcept { return m_; }
  double beta() const noexcept { return beta_; }
  int dim() const noexcept { return dim_; }
  /// Hölder conjugate of β.
  double alpha() const noexcept { return beta_ / (beta_ - 1.0); }
  /// q = m + 1 − α/β; exactly 1 when m(β−1) = 1.
  double q() const noexcept;
  double delta() const noexcept;
  /// ((m(β−1)−1)/(mβ))·(1/δ)^{1/(β−1)}.
  double k() const noexcept;
  /// Rate (β−1)²/β^α of the exponential profile used when q = 1.
  double exponential_rate() const noexcept;
  bool exponential() const noexcept { return q() == 1.0; }

 private:
  double m_;
  double beta_;
  int dim_;
};

/// t^{−n/δ} B(x t^{−1/δ}) with B(ξ) = (C − k|ξ|^α)_+^{1/(q−1)}, or
/// C·exp(−rate·|ξ|^α) when q = 1. Throws for t ≤ 0.
double barenblatt(const DiffusionParams& d, double C, double x_norm, double t);
double barenblatt(const DiffusionParams& d, double C, std::span<const double> x, double t);

/// ∫ B(ξ) dξ for the free constant C.
double barenblatt_mass(const DiffusionParams& d, double C);

/// C with ∫ B = 1, by root finding on the monotone map C ↦ mass(C).
double barenblatt_mass_constant(const DiffusionParams& d);

/// The q-Gaussian that coincides with the unit-mass Barenblatt profile at time t.
QGaussianParams barenblatt_as_qgaussian(const DiffusionParams& d, double C, double t);

template <class Rng>
void RadialSampler::draw(Rng& rng, std::span<double> out) const {
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  const double r = quantile_(uniform(rng));
  if (dim_ == 1) {
    out[0] = uniform(rng) < 0.5 ? -r : r;
    return;
  }
  std::normal_distribution<double> normal(0.0, 1.0);
  double norm2 = 0.0;
  do {
    norm2 = 0.0;
    for (auto& v : out) {
      v = normal(rng);
      norm2 += v * v;
    }
  } while (norm2 == 0.0);
  const double scale = r / std::sqrt(norm2);
  for (auto& v : out) v *= scale;
}

}  // namespace qfisher
