#pragma once

// The generalized Stam inequality, the minimum-Fisher characterizations of
// q-Gaussians (fixed moment, fixed entropy power) and the families of
// perturbed densities used to probe them.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "qfisher/grid.hpp"
#include "qfisher/numerics.hpp"
#include "qfisher/qgaussian.hpp"
#include "qfisher/report.hpp"

namespace qfisher {

/// Member i of a family has shape i / amplitude_levels and amplitude level
/// i % amplitude_levels; amplitudes are geometric in [amplitude_min,
/// amplitude_max].
struct PerturbationSpec {
  std::size_t count = 50;
  std::uint64_t seed = 1;
  double amplitude_min = 0.01;
  double amplitude_max = 0.2;
  std::size_t amplitude_levels = 10;
  std::size_t nodes = 4001;

  void validate() const;
  double amplitude(std::size_t level) const;
};

struct PerturbedDensity {
  std::size_t shape = 0;
  std::size_t level = 0;
  double amplitude = 0.0;
  GridDensity density;
};

/// G·(1 + a·b_shape), renormalized, on the grid of G. Each shape b is a
/// random smooth bump with max|b| = 1 supported inside the bulk of G.
std::vector<PerturbedDensity> perturbation_family(const QGaussianParams& G, const PerturbationSpec& spec);

/// Dilates f so that E_f[‖X‖^α] = target.
GridDensity restore_moment(const GridDensity& f, double alpha, double target);
/// Dilates f so that N_q[f] = target.
GridDensity restore_entropy_power(const GridDensity& f, double q, double target);

/// Stam inequality holds for q > max((n−1)/n, n/(n+α)).
bool stam_hypothesis(double q, double beta, int dim);

/// I_{β,q}[f]^{1/β} · N_q[f]^{1/2}.
double stam_product(const GridDensity& f, double q, double beta);

/// Stam product of f relative to that of the q-Gaussian with α = β/(β−1)
/// (γ = 1 when β = 2, otherwise γ matching the α-moment of f). Throws
/// std::invalid_argument outside the hypothesis range.
VerificationReport stam_ratio(const GridDensity& f, double q, double beta, const Tolerances& tol = {},
                              std::size_t reference_nodes = 4001);

/// Log-log slope of the Stam product of f dilated by each factor (0 for an
/// invariant product).
double stam_scaling_exponent(const GridDensity& f, double q, double beta, std::span<const double> factors);

/// γ of the q-Gaussian with the given α-moment / entropy power.
double gamma_for_moment(double q, double alpha, int dim, double target_moment);
double gamma_for_entropy_power(double q, double alpha, int dim, double target_power);

/// Stam ratios over a perturbation family of the q-Gaussian.
VerificationReport stam_family(double q, double beta, int dim, const PerturbationSpec& spec,
                               const Tolerances& tol = {});

/// I_{β,q} over moment-matched perturbations of the q-Gaussian with
/// E[‖X‖^α] = target; the q-Gaussian must be the minimizer.
VerificationReport min_fisher_fixed_moment(double q, double beta, int dim, double target_moment,
                                           const PerturbationSpec& spec, const Tolerances& tol = {});

/// I_{β,q} over entropy-power-matched perturbations of the q-Gaussian with
/// N_q = target.
VerificationReport min_fisher_fixed_entropy(double q, double beta, int dim, double target_power,
                                            const PerturbationSpec& spec, const Tolerances& tol = {});

/// q-Cramér–Rao products over a perturbation family of the q-Gaussian with
/// index q and exponent α.
VerificationReport qcr_family(double q, double alpha, int dim, const PerturbationSpec& spec,
                              const Tolerances& tol = {});

}  // namespace qfisher
