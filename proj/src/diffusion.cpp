#include "qfisher/diffusion.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include <fmt/format.h>

#include "qfisher/info_measures.hpp"

namespace qfisher {

namespace {

constexpr double kClamp = 1e-13;
constexpr double kMassDrift = 1e-6;
constexpr double kRegularization = 1e-12;

// Control volumes V_i and face measures A_j (face j between nodes j, j+1).
struct Cells {
  std::vector<double> volume;
  std::vector<double> face;
  double h = 0.0;
};

Cells make_cells(const GridDensity& f) {
  const Axis& ax = f.axes()[0];
  const std::size_t n = ax.count;
  Cells c;
  c.h = ax.step();
  c.volume.assign(n, c.h);
  c.face.assign(n - 1, 1.0);
  if (f.geometry() == Geometry::radial) {
    const int d = f.dim();
    auto edge = [&](std::size_t i) {  // r_{i−1/2}, clipped to the domain
      if (i == 0) return 0.0;
      if (i == n) return ax.upper;
      return (static_cast<double>(i) - 0.5) * c.h;
    };
    for (std::size_t i = 0; i < n; ++i) {
      c.volume[i] = (std::pow(edge(i + 1), d) - std::pow(edge(i), d)) / d;
    }
    for (std::size_t j = 0; j + 1 < n; ++j) c.face[j] = std::pow((static_cast<double>(j) + 0.5) * c.h, d - 1);
  }
  return c;
}

double scheme_mass(const GridDensity& f, const Cells& cells) {
  const auto v = f.values();
  double sum = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) sum += cells.volume[i] * v[i];
  return sum;
}

// x^e with the exponents that occur for integer m and β = 2 or 3 done by
// multiplication; std::pow dominates the step cost otherwise.
double power(double x, double e) {
  if (e == 1.0) return x;
  if (e == 2.0) return x * x;
  if (e == 0.0) return 1.0;
  if (e == 0.5) return std::sqrt(x);
  return std::pow(x, e);
}

double flux(double du, double beta) {
  if (beta == 2.0) return du;
  if (beta > 2.0) return power(std::abs(du), beta - 2.0) * du;
  return std::pow(du * du + kRegularization * kRegularization, 0.5 * (beta - 2.0)) * du;
}

}  // namespace

GridDensity diffusion_grid(int dim, double extent, std::size_t nodes,
                           const std::function<double(double)>& radial_profile) {
  if (dim == 1) {
    return GridDensity::from_function({Axis{-extent, extent, nodes}},
                                      [&](std::span<const double> x) { return radial_profile(std::abs(x[0])); });
  }
  return GridDensity::radial_from_function(dim, Axis{0.0, extent, nodes}, radial_profile);
}

GridDensity barenblatt_grid(const DiffusionParams& params, double t, double extent, std::size_t nodes) {
  const double C = barenblatt_mass_constant(params);
  return diffusion_grid(params.dim(), extent, nodes,
                        [&](double r) { return barenblatt(params, C, r, t); });
}

DiffusionState make_state(const DiffusionParams& params, GridDensity f0, double t0) {
  if (f0.dim() != params.dim()) {
    throw std::invalid_argument(fmt::format("grid dimension {} does not match n = {}", f0.dim(), params.dim()));
  }
  if (params.dim() == 1 && f0.geometry() != Geometry::cartesian) {
    throw std::invalid_argument("1-D diffusion needs a Cartesian grid");
  }
  if (params.dim() > 1 && f0.geometry() != Geometry::radial) {
    throw std::invalid_argument("diffusion in n >= 2 dimensions runs on a radial grid");
  }
  DiffusionState s{params, t0, std::move(f0), 0, 0.0, 0.0};
  s.mass0 = integrate(s.f);
  s.scheme_mass0 = scheme_mass(s.f, make_cells(s.f));
  return s;
}

double stable_time_step(const DiffusionState& state, double courant) {
  const auto& p = state.params;
  const auto v = state.f.values();
  const Cells cells = make_cells(state.f);
  const double m = p.m();
  const double beta = p.beta();
  double d_max = 0.0;
  for (std::size_t j = 0; j + 1 < v.size(); ++j) {
    const double a = v[j];
    const double b = v[j + 1];
    if (a == 0.0 && b == 0.0) continue;
    const double du = (power(b, m) - power(a, m)) / cells.h;
    double fbar = std::max(a, b);
    if (m < 1.0 && std::min(a, b) > 0.0) fbar = std::min(a, b);
    double g = 1.0;
    if (beta > 2.0) g = power(std::abs(du), beta - 2.0);
    if (beta < 2.0) g = std::pow(du * du + kRegularization * kRegularization, 0.5 * (beta - 2.0));
    d_max = std::max(d_max, (beta - 1.0) * m * power(fbar, m - 1.0) * g);
  }
  if (d_max == 0.0) return std::numeric_limits<double>::infinity();
  const double n_eff = state.f.geometry() == Geometry::radial ? state.f.dim() : 1.0;
  return courant * cells.h * cells.h / (n_eff * d_max);
}

DiffusionState step(const DiffusionState& state, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("time step must be positive");
  const auto& p = state.params;
  const auto v = state.f.values();
  const std::size_t n = v.size();
  const Cells cells = make_cells(state.f);

  std::vector<double> u(n);
  for (std::size_t i = 0; i < n; ++i) u[i] = power(v[i], p.m());
  std::vector<double> face_flux(n - 1);
  for (std::size_t j = 0; j + 1 < n; ++j) {
    face_flux[j] = cells.face[j] * flux((u[j + 1] - u[j]) / cells.h, p.beta());
  }

  std::vector<double> next(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double right = i + 1 < n ? face_flux[i] : 0.0;
    const double left = i > 0 ? face_flux[i - 1] : 0.0;
    double value = v[i] + dt * (right - left) / cells.volume[i];
    if (value < 0.0) {
      if (value > -kClamp) {
        value = 0.0;
      } else {
        const auto c = state.f.coordinates(i);
        throw NumericalError(fmt::format(
            "stability violation at t = {}: value {} at node {} (x = {}) with dt = {}", state.t + dt, value, i,
            c[0], dt));
      }
    }
    next[i] = value;
  }

  DiffusionState out{p, state.t + dt, state.f.with_values(std::move(next)), state.step_count + 1, state.mass0,
                     state.scheme_mass0};
  const double drift = std::abs(scheme_mass(out.f, cells) - state.scheme_mass0);
  if (drift > kMassDrift) {
    throw NumericalError(fmt::format("stability violation at t = {}: conserved mass drifted by {}", out.t, drift));
  }
  return out;
}

TrajectoryRow measure(const DiffusionState& state) {
  const double q = state.params.q();
  const double beta = state.params.beta();
  TrajectoryRow row;
  row.t = state.t;
  row.mass = integrate(state.f);
  row.m_q = m_q(state.f, q);
  row.s_q = tsallis_entropy(state.f, q);
  row.phi = phi_fisher(state.f, q, beta);
  row.i_fisher = row.phi / std::pow(row.m_q, beta);
  return row;
}

namespace {

void check_boundary(const DiffusionState& s) {
  const auto v = s.f.values();
  const std::size_t n = v.size();
  const bool radial = s.f.geometry() == Geometry::radial;
  if (s.params.q() > 1.0) {
    const bool touched = v[n - 2] > 0.0 || (!radial && v[1] > 0.0);
    if (touched) {
      throw NumericalError(fmt::format("support reached the domain boundary at t = {}; enlarge the grid", s.t));
    }
    return;
  }
  const double extent = s.f.axes()[0].length();
  const double edge = radial ? v[n - 1] : std::max(v[0], v[n - 1]);
  if (edge * extent > 1e-10) {
    throw NumericalError(
        fmt::format("density tail reached the domain boundary at t = {} (edge value {}); enlarge the grid", s.t,
                    edge));
  }
}

}  // namespace

EvolveResult evolve(DiffusionState state, double t_end, const EvolveOptions& options) {
  if (!(t_end >= state.t)) throw std::invalid_argument("t_end must not precede the current time");
  TrajectoryLog log{state.params, {}};
  check_boundary(state);
  log.rows.push_back(measure(state));
  if (t_end == state.t) return {std::move(state), std::move(log)};

  const double t0 = state.t;
  const double span = t_end - t0;
  const double interval = options.log_interval > 0.0 ? options.log_interval : span / 200.0;
  const auto intervals = static_cast<std::size_t>(std::max(1.0, std::round(span / interval)));

  for (std::size_t k = 1; k <= intervals; ++k) {
    const double target = k == intervals ? t_end : t0 + span * static_cast<double>(k) / static_cast<double>(intervals);
    while (state.t < target) {
      const double remaining = target - state.t;
      const double dt_stable = stable_time_step(state, options.courant);
      double dt = remaining;
      if (dt_stable < remaining) dt = remaining / std::ceil(remaining / dt_stable);
      state = step(state, dt);
      if (target - state.t < 1e-12 * std::max(1.0, std::abs(target))) state.t = target;
      if (state.step_count > options.max_steps) {
        throw NumericalError(fmt::format("exceeded {} time steps at t = {}", options.max_steps, state.t));
      }
    }
    check_boundary(state);
    const TrajectoryRow row = measure(state);
    if (std::abs(row.mass - state.mass0) > kMassDrift) {
      throw NumericalError(fmt::format("mass drifted from {} to {} at t = {}", state.mass0, row.mass, row.t));
    }
    log.rows.push_back(row);
  }
  return {std::move(state), std::move(log)};
}

std::vector<DeBruijnRow> debruijn_check(const TrajectoryLog& log) {
  const auto& p = log.params;
  const double q = p.q();
  const double m = p.m();
  const double beta = p.beta();
  std::vector<DeBruijnRow> out;
  for (std::size_t i = 1; i + 1 < log.rows.size(); ++i) {
    const auto& prev = log.rows[i - 1];
    const auto& row = log.rows[i];
    const auto& next = log.rows[i + 1];
    DeBruijnRow r;
    r.t = row.t;
    r.dsdt_fd = (next.s_q - prev.s_q) / (next.t - prev.t);
    r.rhs_phi = q * std::pow(m, beta - 1.0) * row.phi;
    r.rhs_unscaled = std::pow(m / q, beta - 1.0) * std::pow(row.m_q, beta) * row.i_fisher;
    r.rhs_fisher = std::pow(q, beta) * r.rhs_unscaled;
    r.rel_err = std::abs(r.dsdt_fd - r.rhs_phi) / std::abs(r.rhs_phi);
    out.push_back(r);
  }
  return out;
}

VerificationReport debruijn_summary(const TrajectoryLog& log, const std::vector<DeBruijnRow>& rows,
                                    double tolerance) {
  VerificationReport rep("debruijn");
  if (rows.empty()) {
    rep.fail("need at least 3 logged rows");
    return rep;
  }
  const double q = log.params.q();
  const double beta = log.params.beta();
  double max_err = 0.0;
  double max_form_gap = 0.0;
  double max_unscaled_gap = 0.0;
  for (const auto& r : rows) {
    max_err = std::max(max_err, r.rel_err);
    max_form_gap = std::max(max_form_gap, std::abs(r.rhs_fisher - r.rhs_phi) / std::abs(r.rhs_phi));
    max_unscaled_gap = std::max(max_unscaled_gap, std::abs(r.rhs_unscaled / r.rhs_phi - std::pow(q, -beta)));
  }
  const auto& mid = rows[rows.size() / 2];
  rep.set("tolerance", tolerance);
  rep.set("max_rel_err", max_err);
  rep.set("mid_t", mid.t);
  rep.set("mid_rel_err", mid.rel_err);
  rep.set("max_form_gap", max_form_gap);
  rep.set("unscaled_form_ratio", rows.front().rhs_unscaled / rows.front().rhs_phi);
  rep.set("unscaled_form_ratio_deviation", max_unscaled_gap);
  if (max_err > tolerance) rep.fail(fmt::format("max relative error {} exceeds {}", max_err, tolerance));
  if (max_form_gap > 1e-10) rep.fail(fmt::format("phi-form and I-form disagree by {}", max_form_gap));
  if (q != 1.0) {
    rep.note(fmt::format("(m/q)^(beta-1) M_q^beta I without the q^beta factor equals q^-beta = {} times the "
                         "entropy production",
                         std::pow(q, -beta)));
  }
  return rep;
}

VerificationReport phi_monotonicity_check(const TrajectoryLog& log, double slack) {
  const auto& p = log.params;
  if (p.beta() != 2.0) throw std::invalid_argument("phi monotonicity is stated for beta = 2 trajectories");
  const double q = p.q();
  if (!(q > 1.0 - 1.0 / p.dim())) {
    throw std::invalid_argument(fmt::format("phi monotonicity needs q > 1 - 1/n, got q = {}", q));
  }
  VerificationReport rep("phi_monotonicity");
  double worst_phi = -std::numeric_limits<double>::infinity();
  double worst_s = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < log.rows.size(); ++i) {
    worst_phi = std::max(worst_phi, log.rows[i].phi - log.rows[i - 1].phi);
    worst_s = std::max(worst_s, log.rows[i - 1].s_q - log.rows[i].s_q);
  }
  rep.set("slack", slack);
  rep.set("max_phi_increase", worst_phi);
  rep.set("max_entropy_decrease", worst_s);
  if (worst_phi > slack) rep.fail(fmt::format("phi increased by {} between log rows", worst_phi));
  if (worst_s > slack) rep.fail(fmt::format("S_q decreased by {} between log rows", worst_s));
  return rep;
}

void write_trajectory_csv(std::ostream& out, const TrajectoryLog& log) {
  const auto rows = debruijn_check(log);
  out << "t,mass,M_q,S_q,phi,dSdt_fd,rhs_eq5,rel_err\n";
  for (std::size_t i = 0; i < log.rows.size(); ++i) {
    const auto& r = log.rows[i];
    out << fmt::format("{:.17g},{:.17g},{:.17g},{:.17g},{:.17g}", r.t, r.mass, r.m_q, r.s_q, r.phi);
    if (i > 0 && i + 1 < log.rows.size()) {
      const auto& d = rows[i - 1];
      out << fmt::format(",{:.17g},{:.17g},{:.17g}\n", d.dsdt_fd, d.rhs_phi, d.rel_err);
    } else {
      out << ",,,\n";
    }
  }
}

double relative_l1(const GridDensity& f, const std::function<double(double)>& exact) {
  std::vector<double> diff(f.size());
  std::vector<double> ref(f.size());
  const auto v = f.values();
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double e = exact(f.norm(i));
    diff[i] = std::abs(v[i] - e);
    ref[i] = std::abs(e);
  }
  return integrate(f, diff) / integrate(f, ref);
}

}  // namespace qfisher
