#pragma once

// Explicit conservative finite-volume solver for the doubly nonlinear
// equation ∂f/∂t = div(|∇f^m|^{β−2} ∇f^m) on a 1-D grid (n = 1) or a radial
// grid (n ≥ 2), and the entropy-production identity checked along its
// trajectories.

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <vector>

#include "qfisher/grid.hpp"
#include "qfisher/numerics.hpp"
#include "qfisher/qgaussian.hpp"
#include "qfisher/report.hpp"

namespace qfisher {

struct DiffusionState {
  DiffusionParams params;
  double t = 0.0;
  GridDensity f;
  std::size_t step_count = 0;
  /// ∫ f dx at the start of the run (Simpson).
  double mass0 = 0.0;
  /// Σ V_i f_i at the start of the run; the scheme conserves it exactly.
  double scheme_mass0 = 0.0;
};

/// Checks that the grid geometry matches the parameters (Cartesian for
/// n = 1, radial with the same n otherwise).
DiffusionState make_state(const DiffusionParams& params, GridDensity f0, double t0);

/// Grid layout used by the solver: [−L, L] for n = 1, r ∈ [0, L] otherwise.
GridDensity diffusion_grid(int dim, double extent, std::size_t nodes,
                           const std::function<double(double)>& radial_profile);

/// Unit-mass Barenblatt profile at time t on a solver grid.
GridDensity barenblatt_grid(const DiffusionParams& params, double t, double extent, std::size_t nodes);

/// Largest explicit step: courant·h² / (n_eff · max D) with D the linearized
/// diffusivity (β−1)·m·f^{m−1}·|∇f^m|^{β−2}.
double stable_time_step(const DiffusionState& state, double courant = 0.25);

/// One explicit step of size dt. Throws NumericalError on a stability
/// violation (values below −1e−13, or drift of the conserved mass).
DiffusionState step(const DiffusionState& state, double dt);

struct TrajectoryRow {
  double t = 0.0;
  double mass = 0.0;
  double m_q = 0.0;
  double s_q = 0.0;
  double phi = 0.0;
  double i_fisher = 0.0;
};

struct TrajectoryLog {
  DiffusionParams params;
  std::vector<TrajectoryRow> rows;
};

struct EvolveOptions {
  /// Spacing of logged times; 0 picks (t_end − t)/200.
  double log_interval = 0.0;
  double courant = 0.25;
  std::size_t max_steps = 100'000'000;
};

struct EvolveResult {
  DiffusionState state;
  TrajectoryLog log;
};

/// Steps to t_end on an exactly uniform log grid, recording S_q, M_q,
/// φ_{β,q}, I_{β,q} and mass at every log time. Aborts (NumericalError) if
/// the solution reaches the domain boundary or mass drifts beyond 1e−6.
EvolveResult evolve(DiffusionState state, double t_end, const EvolveOptions& options = {});

TrajectoryRow measure(const DiffusionState& state);

/// Entropy production at one interior log time.
struct DeBruijnRow {
  double t = 0.0;
  /// Centered difference of S_q on the log grid.
  double dsdt_fd = 0.0;
  /// q·m^{β−1}·φ_{β,q}.
  double rhs_phi = 0.0;
  /// (m/q)^{β−1}·M_q^β·I_{β,q}, which is q^{−β} times the true production.
  double rhs_unscaled = 0.0;
  /// (m/q)^{β−1}·M_q^β·q^β·I_{β,q}.
  double rhs_fisher = 0.0;
  /// |dsdt_fd − rhs_phi| / |rhs_phi|.
  double rel_err = 0.0;
};

std::vector<DeBruijnRow> debruijn_check(const TrajectoryLog& log);

/// Summary over the rows: max/mid relative error against `tolerance`, and
/// the algebraic agreement of the two right-hand forms.
VerificationReport debruijn_summary(const TrajectoryLog& log, const std::vector<DeBruijnRow>& rows,
                                    double tolerance);

/// φ_{2,q} non-increasing and S_q non-decreasing along the log (per-row
/// slack). Requires β = 2 and q > 1 − 1/n.
VerificationReport phi_monotonicity_check(const TrajectoryLog& log, double slack = 1e-9);

/// CSV with header t,mass,M_q,S_q,phi,dSdt_fd,rhs_eq5,rel_err. The first and
/// last rows leave the derivative columns empty.
void write_trajectory_csv(std::ostream& out, const TrajectoryLog& log);

/// ∫|f − exact| / ∫|exact| with `exact` evaluated at each node's ‖x‖.
double relative_l1(const GridDensity& f, const std::function<double(double)>& exact);

}  // namespace qfisher
