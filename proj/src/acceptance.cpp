#include "qfisher/acceptance.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <numbers>
#include <optional>
#include <random>
#include <thread>

#include <fmt/format.h>

#include "qfisher/diffusion.hpp"
#include "qfisher/estimation.hpp"
#include "qfisher/inequalities.hpp"
#include "qfisher/info_measures.hpp"

namespace qfisher {

unsigned thread_budget() {
  unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("QFISHER_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && v > 0) return std::min(hw, static_cast<unsigned>(v));
  }
  return hw;
}

namespace {

using Clock = std::chrono::steady_clock;

std::string verdict(bool ok) { return ok ? "PASS" : "FAIL"; }

// Runs `body` with exceptions turned into a failed result.
CriterionResult timed(int id, std::string name, const std::function<void(CriterionResult&)>& body) {
  CriterionResult r;
  r.id = id;
  r.name = std::move(name);
  const auto start = Clock::now();
  try {
    r.passed = true;
    body(r);
  } catch (const std::exception& e) {
    r.passed = false;
    r.detail += (r.detail.empty() ? "" : "; ") + std::string("error: ") + e.what();
  }
  r.seconds = std::chrono::duration<double>(Clock::now() - start).count();
  return r;
}

void append(CriterionResult& r, const std::string& text) { r.detail += (r.detail.empty() ? "" : "; ") + text; }

// Unit-mass Barenblatt evolution from t = 1 to t = 2 on a 1-D grid reaching
// 1.5 times the final support radius.
EvolveResult barenblatt_run(double m, double beta, std::size_t nodes, double log_interval) {
  const DiffusionParams params(m, beta, 1);
  const double C = barenblatt_mass_constant(params);
  const double extent = 1.5 * barenblatt_as_qgaussian(params, C, 2.0).support_radius();
  auto state = make_state(params, barenblatt_grid(params, 1.0, extent, nodes), 1.0);
  EvolveOptions opt;
  opt.log_interval = log_interval;
  return evolve(std::move(state), 2.0, opt);
}

struct Trajectories {
  std::optional<TrajectoryLog> heat;
  std::vector<TrajectoryLog> porous;
};

CriterionResult criterion1(Trajectories& out) {
  return timed(1, "heat equation de Bruijn identity", [&](CriterionResult& r) {
    const DiffusionParams params(1.0, 2.0, 1);
    const double sigma0 = 1.0;
    auto f0 = diffusion_grid(1, 12.0, 4001, [&](double x) {
      return std::exp(-0.5 * x * x / (sigma0 * sigma0)) / (std::sqrt(2.0 * std::numbers::pi) * sigma0);
    });
    EvolveOptions opt;
    opt.log_interval = 0.005;
    auto result = evolve(make_state(params, std::move(f0), 0.0), 0.5, opt);
    const auto rows = debruijn_check(result.log);
    double err_lhs = 0.0, err_rhs = 0.0;
    for (const auto& row : rows) {
      const double exact = 1.0 / (sigma0 * sigma0 + 2.0 * row.t);
      err_lhs = std::max(err_lhs, std::abs(row.dsdt_fd - exact) / exact);
      err_rhs = std::max(err_rhs, std::abs(row.rhs_phi - exact) / exact);
    }
    r.passed = err_lhs < 1e-2 && err_rhs < 1e-2;
    append(r, fmt::format("rows={} max_rel_err dH/dt={:.3e} fisher={:.3e} (tol 1e-2)", rows.size(), err_lhs,
                          err_rhs));
    out.heat = std::move(result.log);
  });
}

CriterionResult criterion2(Trajectories& out) {
  return timed(2, "porous medium extended de Bruijn identity", [&](CriterionResult& r) {
    // One refinement halves both the node spacing and the log-time spacing
    // that the entropy derivative is differenced on.
    const std::size_t grids[2] = {2001, 4001};
    const double intervals[2] = {0.02, 0.01};
    double errs[2];
    for (int k = 0; k < 2; ++k) {
      auto result = barenblatt_run(2.0, 2.0, grids[k], intervals[k]);
      const auto rows = debruijn_check(result.log);
      const auto summary = debruijn_summary(result.log, rows, 1e-2);
      errs[k] = summary.at("mid_rel_err");
      if (summary.at("max_form_gap") > 1e-10) {
        r.passed = false;
        append(r, "right-hand forms disagree");
      }
      out.porous.push_back(std::move(result.log));
    }
    const double ratio = errs[1] / errs[0];
    r.passed = r.passed && errs[1] < 1e-2 && ratio < 0.5;
    append(r, fmt::format("mid_rel_err (nodes {}, dt_log {})={:.3e} (nodes {}, dt_log {})={:.3e} "
                          "refinement_ratio={:.3f} (tol 1e-2, <0.5)",
                          grids[0], intervals[0], errs[0], grids[1], intervals[1], errs[1], ratio));
  });
}

CriterionResult criterion3() {
  return timed(3, "Barenblatt self-similarity", [&](CriterionResult& r) {
    const std::pair<double, double> cases[2] = {{2.0, 2.0}, {1.0, 3.0}};
    for (const auto& [m, beta] : cases) {
      const DiffusionParams params(m, beta, 1);
      const double C = barenblatt_mass_constant(params);
      auto result = barenblatt_run(m, beta, 2001, 0.1);
      const double err = relative_l1(result.state.f, [&](double x) { return barenblatt(params, C, x, 2.0); });
      r.passed = r.passed && err < 1e-2;
      append(r, fmt::format("(m,beta)=({},{}) L1_rel={:.3e}", m, beta, err));
    }
  });
}

CriterionResult criterion4(std::uint64_t seed) {
  return timed(4, "classical Cramer-Rao equality", [&](CriterionResult& r) {
    const double sigma = 1.0;
    const auto model = gaussian_location_model(1, sigma);
    const auto est = sample_mean_estimator(1, 2.0);
    const double theta = 0.5;
    const auto rep = crm_bound_scalar(model, est, theta);
    const double dl = std::abs(rep.at("lhs") - sigma);
    const double dr = std::abs(rep.at("rhs") - sigma);
    const std::array<double, 1> th{theta};
    const auto mc = mc_error_moment(model, est, th, 100000, seed);
    const double z = std::abs(mc.value - sigma) / mc.standard_error;
    r.passed = rep.passed && dl < 1e-6 && dr < 1e-6 && z <= 3.0;
    append(r, fmt::format("|lhs-sigma|={:.2e} |rhs-sigma|={:.2e} residual={:.2e} mc={:.6f} se={:.2e} z={:.2f}", dl,
                          dr, rep.at("equality_residual"), mc.value, mc.standard_error, z));
  });
}

CriterionResult criterion5(std::uint64_t seed) {
  return timed(5, "multivariate quadratic bound", [&](CriterionResult& r) {
    const auto est = sample_mean_estimator(3, 2.0);
    const auto scalar_model = gaussian_location_model(3, 1.0);
    const std::array<double, 1> th1{0.2};
    const auto rep1 = crm_bound_quadratic(scalar_model, est, th1);
    const auto vector_model = gaussian_vector_location_model(3, 1.0);
    const std::array<double, 3> th3{0.1, -0.2, 0.3};
    const auto rep3 = crm_bound_quadratic(vector_model, est, th3);
    double worst = 0.0;
    for (const auto* rep : {&rep1, &rep3}) {
      worst = std::max({worst, std::abs(rep->at("lhs") - 1.0 / 3.0), std::abs(rep->at("rhs") - 1.0 / 3.0)});
      r.passed = r.passed && rep->passed;
    }
    const double best = crm_bound_optimal_quadratic(vector_model, est, th3);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    double max_excess = -1.0;
    for (int k = 0; k < 20; ++k) {
      Eigen::MatrixXd B(3, 3);
      for (int i = 0; i < 9; ++i) B.data()[i] = normal(rng);
      const Eigen::MatrixXd A = B * B.transpose() + 0.1 * Eigen::MatrixXd::Identity(3, 3);
      max_excess = std::max(max_excess, crm_bound_general(vector_model, est, th3, A) / best - 1.0);
    }
    r.passed = r.passed && worst < 1e-6 && max_excess <= 1e-9;
    append(r, fmt::format("max|side-1/3|={:.2e} optimal={:.9f} max_random_excess={:.3e}", worst, best,
                          max_excess));
  });
}

CriterionResult criterion6(std::uint64_t seed) {
  return timed(6, "q-Cramer-Rao equality and perturbations", [&](CriterionResult& r) {
    const std::pair<double, double> points[3] = {{2.0, 2.0}, {1.5, 2.0}, {2.0, 3.0}};
    for (const auto& [q, alpha] : points) {
      const auto at_g = qcr_product(to_grid(QGaussianParams(q, alpha, 1.0, 1), 4001), q, alpha);
      const double dev = std::abs(at_g.at("product") - 1.0);
      PerturbationSpec spec;
      spec.count = 100;
      spec.seed = seed;
      const auto fam = qcr_family(q, alpha, 1, spec);
      const bool ok = dev < 1e-4 && fam.passed && fam.at("min_perturbed") > 1.0 &&
                      fam.at("argmin_at_smallest_amplitude") == 1.0;
      r.passed = r.passed && ok;
      append(r, fmt::format("(q,alpha)=({},{}) |product-1|={:.2e} min_perturbed={:.8f} argmin_amp={:.3g}", q, alpha,
                            dev, fam.at("min_perturbed"), fam.at("argmin_amplitude")));
    }
  });
}

CriterionResult criterion7(std::uint64_t seed) {
  return timed(7, "generalized Stam inequality", [&](CriterionResult& r) {
    const std::pair<double, double> points[2] = {{1.0, 2.0}, {2.0, 2.0}};
    for (const auto& [q, beta] : points) {
      const double alpha = beta / (beta - 1.0);
      const auto at_g = stam_ratio(to_grid(QGaussianParams(q, alpha, 0.7, 1), 4001), q, beta);
      const double dev = std::abs(at_g.at("ratio") - 1.0);
      PerturbationSpec spec;
      spec.seed = seed;
      const auto fam = stam_family(q, beta, 1, spec);
      const bool ok = stam_hypothesis(q, beta, 1) && dev < 1e-4 && fam.passed && fam.at("worst_gap") > 0.0;
      r.passed = r.passed && ok;
      append(r, fmt::format("(q,beta)=({},{}) |ratio-1|={:.2e} worst_gap={:.3e}", q, beta, dev, fam.at("worst_gap")));
    }
  });
}

CriterionResult criterion8(std::uint64_t seed) {
  return timed(8, "minimum-Fisher characterizations", [&](CriterionResult& r) {
    const std::pair<double, double> points[3] = {{2.0, 2.0}, {1.5, 2.0}, {2.0, 1.5}};
    for (const auto& [q, beta] : points) {
      PerturbationSpec spec;
      spec.seed = seed;
      const auto fm = min_fisher_fixed_moment(q, beta, 1, 1.0, spec);
      const auto fe = min_fisher_fixed_entropy(q, beta, 1, 1.0, spec);
      for (const auto* rep : {&fm, &fe}) {
        const double lo = rep->at("gap_exponent_min");
        const double hi = rep->at("gap_exponent_max");
        const bool all_fitted = rep->at("gap_exponent_shapes") == 5.0;
        const bool exponent_ok = all_fitted && lo >= 1.7 && hi <= 2.3;
        r.passed = r.passed && rep->passed && exponent_ok;
        append(r, fmt::format("{} (q,beta)=({},{}) minimality={} worst_gap={:.3e} exponent=[{:.3f},{:.3f}]{}",
                              rep == &fm ? "moment" : "entropy", q, beta, verdict(rep->passed),
                              rep->at("worst_gap"), lo, hi, exponent_ok ? "" : " outside [1.7,2.3]"));
      }
    }
  });
}

CriterionResult criterion9(const Trajectories& traj) {
  return timed(9, "entropy and Fisher monotonicity", [&](CriterionResult& r) {
    std::vector<const TrajectoryLog*> logs;
    if (traj.heat) logs.push_back(&*traj.heat);
    for (const auto& log : traj.porous) logs.push_back(&log);
    if (logs.size() != 3) {
      r.passed = false;
      append(r, "trajectories of criteria 1 and 2 are unavailable");
      return;
    }
    for (const auto* log : logs) {
      const auto rep = phi_monotonicity_check(*log, 1e-9);
      r.passed = r.passed && rep.passed;
      append(r, fmt::format("m={} max_phi_increase={:.3e} max_S_decrease={:.3e}", log->params.m(),
                            rep.at("max_phi_increase"), rep.at("max_entropy_decrease")));
    }
  });
}

}  // namespace

std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& options) {
  std::vector<CriterionResult> results(9);
  Trajectories traj;
  const std::uint64_t seed = options.seed;
  std::vector<std::function<void()>> tasks = {
      [&] { results[0] = criterion1(traj); },
      [&] {
        Trajectories local;
        results[1] = criterion2(local);
        traj.porous = std::move(local.porous);
      },
      [&] { results[2] = criterion3(); },
      [&] { results[3] = criterion4(seed); },
      [&] { results[4] = criterion5(seed); },
      [&] { results[5] = criterion6(seed); },
      [&] { results[6] = criterion7(seed); },
      [&] { results[7] = criterion8(seed); },
  };
  const unsigned workers = std::min<unsigned>(options.threads ? options.threads : thread_budget(),
                                              static_cast<unsigned>(tasks.size()));
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < tasks.size(); i = next++) tasks[i]();
  };
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
  }
  results[8] = criterion9(traj);
  return results;
}

std::string summary_table(const std::vector<CriterionResult>& results) {
  std::string out = fmt::format("{:<4} {:<44} {:<7} {}\n", "id", "criterion", "verdict", "detail");
  bool all = true;
  for (const auto& r : results) {
    out += fmt::format("C{:<3} {:<44} {:<7} {}\n", r.id, r.name, verdict(r.passed), r.detail);
    all = all && r.passed;
  }
  out += fmt::format("overall: {} ({} of {} criteria passed)\n", verdict(all),
                     std::count_if(results.begin(), results.end(), [](const auto& r) { return r.passed; }),
                     results.size());
  return out;
}

}  // namespace qfisher
