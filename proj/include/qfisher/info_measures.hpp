#pragma once

// Scalar information functionals of a GridDensity: the information
// generating function M_q, Tsallis/Rényi/Shannon entropies, the entropy
// power N_q, the generalized Fisher informations φ_{β,q} and I_{β,q}, and
// the escort transform.

#include <array>
#include <functional>
#include <span>
#include <vector>

#include "qfisher/grid.hpp"

namespace qfisher {

/// |q − 1| below this uses the q = 1 (Shannon) branches.
inline constexpr double kShannonThreshold = 1e-6;

/// Entropic index, Fisher exponent and dimension; α is always derived as
/// the Hölder conjugate of β.
struct InfoIndices {
  double q = 1.0;
  double beta = 2.0;
  int dim = 1;

  double alpha() const noexcept { return beta / (beta - 1.0); }
  void validate() const;
};

/// M_q[f] = ∫ f^q over the support. Throws for q < 0.
double m_q(const GridDensity& f, double q);

/// −∫ f ln f.
double shannon_entropy(const GridDensity& f);

/// S_q = (M_q − 1)/(1 − q); Shannon entropy when |q − 1| < kShannonThreshold.
double tsallis_entropy(const GridDensity& f, double q);

/// H_q = ln(M_q)/(1 − q); Shannon entropy at q = 1.
double renyi_entropy(const GridDensity& f, double q);

/// N_q = M_q^{(2/n)/(1−q)}, cross-checked against exp((2/n) H_q).
double entropy_power(const GridDensity& f, double q);

/// ∫ f^{β(q−1)+1−β} ‖∇f‖_*^β over the support; ‖·‖_* is the dual p-norm
/// (Euclidean by default). Nodes with f = 0 contribute 0.
double fisher_integral(const GridDensity& f, double q, double beta, double dual_norm_p = 2.0);

/// φ_{β,q}[f] (Euclidean gradient norm).
double phi_fisher(const GridDensity& f, double q, double beta);

/// I_{β,q}[f] = φ_{β,q}[f] / M_q[f]^β.
double i_fisher(const GridDensity& f, double q, double beta);

/// φ_{β,q} of a density given as a function, evaluated at three successive
/// grid refinements to detect boundary blow-up.
struct FisherEstimate {
  double value = 0.0;
  bool divergent = false;
  std::array<double, 3> trace{};
};

/// `make_grid(level)` must sample the same density at refinement level
/// 0, 1, 2 (node spacing halved each time).
FisherEstimate phi_fisher_refined(const std::function<GridDensity(int level)>& make_grid, double q,
                                  double beta);

/// Escort of order q: f^{1/q} / ∫ f^{1/q}. Throws DivergenceError when the
/// escort puts far more mass on the grid boundary than f does (a tail that
/// the grid cannot contain).
GridDensity escort(const GridDensity& f, double q);

/// Inverse escort: g^q / ∫ g^q, so escort(escort_inverse(g, q), q) = g.
GridDensity escort_inverse(const GridDensity& g, double q);

}  // namespace qfisher
