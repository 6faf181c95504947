#include "qfisher/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>
#include <numeric>
#include <stdexcept>

#include <fmt/format.h>
#include <fmt/ranges.h>

#include "qfisher/info_measures.hpp"

namespace qfisher {

namespace {

// Everything the bounds need at one quadrature node, evaluated once per θ.
struct NodeTable {
  int dim_x = 0;
  int dim_theta = 0;
  std::vector<double> x;       // row-major points
  std::vector<double> weight;  // quadrature weight
  std::vector<double> g;
  std::vector<double> f;
  std::vector<double> score;   // ψ_g, row-major; zero where g = 0

  std::size_t size() const noexcept { return weight.size(); }
  std::span<const double> point(std::size_t i) const {
    return {x.data() + i * static_cast<std::size_t>(dim_x), static_cast<std::size_t>(dim_x)};
  }
  std::span<const double> psi(std::size_t i) const {
    return {score.data() + i * static_cast<std::size_t>(dim_theta), static_cast<std::size_t>(dim_theta)};
  }
};

void check_theta(const ParametricModel& model, std::span<const double> theta) {
  if (static_cast<int>(theta.size()) != model.dim_theta) {
    throw std::invalid_argument(
        fmt::format("model '{}' has {} parameters, got {}", model.name, model.dim_theta, theta.size()));
  }
}

NodeTable tabulate(const ParametricModel& model, std::span<const double> theta) {
  check_theta(model, theta);
  NodeTable t;
  t.dim_x = model.dim_x;
  t.dim_theta = model.dim_theta;
  for_each_node(model.domain, [&](std::span<const double> x, double w) {
    const double gx = model.density_g(x, theta);
    const double fx = model.density_f(x, theta);
    if (!std::isfinite(gx) || !std::isfinite(fx)) {
      throw NumericalError(fmt::format("model '{}' is not finite at x = {}", model.name, fmt::join(x, ", ")));
    }
    t.x.insert(t.x.end(), x.begin(), x.end());
    t.weight.push_back(w);
    t.g.push_back(gx);
    t.f.push_back(fx);
    const auto grad = grad_theta_f(model, theta, x);
    for (double d : grad) t.score.push_back(gx > 0.0 ? d / gx : 0.0);
  });
  return t;
}

// Residual of the equality condition ψ = c·s (c > 0) in the g-weighted L¹
// sense, relative to E_g|ψ|. The optimal c is a weighted median of ψ/s.
struct EqualityFit {
  double residual = 0.0;
  double c = 0.0;
};

EqualityFit equality_fit(std::span<const double> w, std::span<const double> psi, std::span<const double> s) {
  double norm = 0.0;
  std::vector<std::pair<double, double>> ratios;  // (ψ/s, w|s|)
  for (std::size_t i = 0; i < w.size(); ++i) {
    norm += w[i] * std::abs(psi[i]);
    if (s[i] != 0.0 && w[i] > 0.0) ratios.emplace_back(psi[i] / s[i], w[i] * std::abs(s[i]));
  }
  EqualityFit fit;
  if (norm <= 0.0) return fit;
  if (!ratios.empty()) {
    std::sort(ratios.begin(), ratios.end());
    const double total = std::accumulate(ratios.begin(), ratios.end(), 0.0,
                                         [](double acc, const auto& r) { return acc + r.second; });
    double running = 0.0;
    for (const auto& [ratio, weight] : ratios) {
      running += weight;
      if (running >= 0.5 * total) {
        fit.c = std::max(ratio, 0.0);
        break;
      }
    }
  }
  double residual = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) residual += w[i] * std::abs(psi[i] - fit.c * s[i]);
  fit.residual = residual / norm;
  return fit;
}

double target_at(const EstimatorSpec& est, std::span<const double> theta) { return est.target(theta); }

std::vector<Axis> centered_box(int dim, double half_width, std::size_t nodes) {
  return std::vector<Axis>(static_cast<std::size_t>(dim), Axis{-half_width, half_width, nodes});
}

std::size_t default_nodes(int dim) {
  switch (dim) {
    case 1: return 801;
    case 2: return 201;
    default: return 81;
  }
}

double gaussian_product(std::span<const double> x, std::span<const double> mu, double sigma, bool scalar_mu) {
  double q = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = x[i] - (scalar_mu ? mu[0] : mu[i]);
    q += d * d;
  }
  const double n = static_cast<double>(x.size());
  return std::exp(-0.5 * q / (sigma * sigma)) / std::pow(std::sqrt(2.0 * std::numbers::pi) * sigma, n);
}

ParametricSampler gaussian_sampler(double sigma, bool scalar_mu) {
  return [sigma, scalar_mu](std::span<const double> theta, std::mt19937_64& rng, std::span<double> out) {
    std::normal_distribution<double> normal(0.0, sigma);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = (scalar_mu ? theta[0] : theta[i]) + normal(rng);
  };
}

// Room for location shifts up to one support radius (compact) or far inside
// the 1e−13 tail (heavy tails).
double qgaussian_extent(const QGaussianParams& g) {
  return g.compact() ? 2.0 * g.support_radius() : truncation_radius(g, 1e-13);
}

}  // namespace

void check_model(const ParametricModel& model, std::span<const std::vector<double>> probe_thetas,
                 double tolerance) {
  if (!model.density_f || !model.density_g) throw std::invalid_argument("model needs both densities f and g");
  if (model.dim_x < 1 || model.dim_theta < 1) throw std::invalid_argument("model dimensions must be >= 1");
  if (static_cast<int>(model.domain.size()) != model.dim_x) {
    throw std::invalid_argument("model domain must have one axis per x coordinate");
  }
  for (const auto& theta : probe_thetas) {
    check_theta(model, theta);
    double mass_f = 0.0, mass_g = 0.0;
    for_each_node(model.domain, [&](std::span<const double> x, double w) {
      mass_f += w * model.density_f(x, theta);
      mass_g += w * model.density_g(x, theta);
    });
    if (std::abs(mass_f - 1.0) > tolerance || std::abs(mass_g - 1.0) > tolerance) {
      throw std::invalid_argument(fmt::format("model '{}' at theta = ({}) is not normalized: int f = {}, int g = {}",
                                              model.name, fmt::join(theta, ", "), mass_f, mass_g));
    }
  }
}

ParametricModel gaussian_location_model(int dim, double sigma, std::size_t nodes_per_axis) {
  if (dim < 1 || !(sigma > 0.0)) throw std::invalid_argument("gaussian location model needs dim >= 1, sigma > 0");
  ParametricModel m;
  m.name = "gaussian_location";
  m.dim_x = dim;
  m.dim_theta = 1;
  m.density_f = [sigma](std::span<const double> x, std::span<const double> th) {
    return gaussian_product(x, th, sigma, true);
  };
  m.density_g = m.density_f;
  m.domain = centered_box(dim, 10.0 * sigma, nodes_per_axis ? nodes_per_axis : default_nodes(dim));
  m.sample_g = gaussian_sampler(sigma, true);
  return m;
}

ParametricModel gaussian_vector_location_model(int dim, double sigma, std::size_t nodes_per_axis) {
  auto m = gaussian_location_model(dim, sigma, nodes_per_axis);
  m.name = "gaussian_vector_location";
  m.dim_theta = dim;
  m.density_f = [sigma](std::span<const double> x, std::span<const double> th) {
    return gaussian_product(x, th, sigma, false);
  };
  m.density_g = m.density_f;
  m.sample_g = gaussian_sampler(sigma, false);
  return m;
}

ParametricModel gaussian_mean_scale_model(double sigma0, std::size_t nodes) {
  if (!(sigma0 > 0.0)) throw std::invalid_argument("sigma0 must be > 0");
  ParametricModel m;
  m.name = "gaussian_mean_scale";
  m.dim_x = 1;
  m.dim_theta = 2;
  m.density_f = [](std::span<const double> x, std::span<const double> th) {
    const double z = (x[0] - th[0]) / th[1];
    return std::exp(-0.5 * z * z) / (std::sqrt(2.0 * std::numbers::pi) * std::abs(th[1]));
  };
  m.density_g = m.density_f;
  m.domain = centered_box(1, 14.0 * sigma0, nodes);
  m.sample_g = [](std::span<const double> th, std::mt19937_64& rng, std::span<double> out) {
    std::normal_distribution<double> normal(th[0], th[1]);
    out[0] = normal(rng);
  };
  return m;
}

ParametricModel qgaussian_location_model(const QGaussianParams& g, std::size_t nodes) {
  if (g.dim() != 1) throw std::invalid_argument("q-Gaussian location model is one-dimensional");
  ParametricModel m;
  m.name = "qgaussian_location";
  m.dim_x = 1;
  m.dim_theta = 1;
  m.density_f = [g](std::span<const double> x, std::span<const double> th) {
    return pdf_radial(g, std::abs(x[0] - th[0]));
  };
  m.density_g = m.density_f;
  m.domain = centered_box(1, qgaussian_extent(g), nodes);
  auto sampler = std::make_shared<RadialSampler>(g);
  m.sample_g = [sampler](std::span<const double> th, std::mt19937_64& rng, std::span<double> out) {
    sampler->draw(rng, out);
    out[0] += th[0];
  };
  return m;
}

ParametricModel escort_pair_model(const QGaussianParams& g, double q, std::size_t nodes) {
  if (!(q > 0.0)) throw std::invalid_argument("escort order q must be > 0");
  auto m = qgaussian_location_model(g, nodes);
  m.name = "escort_pair";
  const double mq = information_generating(g, q);
  m.density_f = [g, q, mq](std::span<const double> x, std::span<const double> th) {
    const double v = pdf_radial(g, std::abs(x[0] - th[0]));
    return v > 0.0 ? std::pow(v, q) / mq : 0.0;
  };
  return m;
}

EstimatorSpec sample_mean_estimator(int dim, double alpha) {
  if (!(alpha > 1.0)) throw std::invalid_argument("alpha must be > 1");
  EstimatorSpec est;
  est.alpha = alpha;
  est.estimator = [dim](std::span<const double> x) {
    return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(dim);
  };
  est.target = [](std::span<const double> th) {
    return std::accumulate(th.begin(), th.end(), 0.0) / static_cast<double>(th.size());
  };
  return est;
}

std::vector<double> grad_theta_f(const ParametricModel& model, std::span<const double> theta,
                                 std::span<const double> x) {
  std::vector<double> th(theta.begin(), theta.end());
  std::vector<double> grad(theta.size());
  for (std::size_t i = 0; i < theta.size(); ++i) {
    const double h = model.dtheta * (1.0 + std::abs(theta[i]));
    th[i] = theta[i] + h;
    const double up = model.density_f(x, th);
    th[i] = theta[i] - h;
    const double down = model.density_f(x, th);
    th[i] = theta[i];
    grad[i] = (up - down) / (2.0 * h);
  }
  return grad;
}

std::vector<double> score_g(const ParametricModel& model, std::span<const double> theta,
                            std::span<const double> x) {
  check_theta(model, theta);
  const double gx = model.density_g(x, theta);
  auto grad = grad_theta_f(model, theta, x);
  if (gx <= 0.0) {
    for (double d : grad) {
      if (d != 0.0) {
        throw NumericalError(fmt::format("score of model '{}' is singular at x = ({}): g = 0 but grad f != 0",
                                         model.name, fmt::join(x, ", ")));
      }
    }
    return grad;
  }
  for (double& d : grad) d /= gx;
  return grad;
}

double eta(const ParametricModel& model, const EstimatorSpec& est, std::span<const double> theta) {
  check_theta(model, theta);
  double sum = 0.0;
  for_each_node(model.domain,
                [&](std::span<const double> x, double w) { sum += w * est.estimator(x) * model.density_f(x, theta); });
  return sum;
}

std::vector<double> eta_dot(const ParametricModel& model, const EstimatorSpec& est, std::span<const double> theta) {
  check_theta(model, theta);
  std::vector<double> out(theta.size(), 0.0);
  for_each_node(model.domain, [&](std::span<const double> x, double w) {
    const double tx = est.estimator(x);
    const auto grad = grad_theta_f(model, theta, x);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += w * tx * grad[i];
  });
  return out;
}

std::vector<double> score_mean(const ParametricModel& model, std::span<const double> theta) {
  const auto t = tabulate(model, theta);
  std::vector<double> out(theta.size(), 0.0);
  for (std::size_t i = 0; i < t.size(); ++i) {
    const auto psi = t.psi(i);
    for (std::size_t k = 0; k < out.size(); ++k) out[k] += t.weight[i] * t.g[i] * psi[k];
  }
  return out;
}

namespace {

// Shared pieces of the scalar and quadratic reports.
struct BoundInputs {
  NodeTable table;
  std::vector<double> error;  // T − h per node
  std::vector<double> eta_dot;
};

BoundInputs bound_inputs(const ParametricModel& model, const EstimatorSpec& est, std::span<const double> theta) {
  BoundInputs in;
  in.table = tabulate(model, theta);
  const double h = target_at(est, theta);
  in.eta_dot.assign(theta.size(), 0.0);
  in.error.resize(in.table.size());
  for (std::size_t i = 0; i < in.table.size(); ++i) {
    const double tx = est.estimator(in.table.point(i));
    in.error[i] = tx - h;
    // ∫ T ∇f = ∫ T g ψ on the support of g; ∇f vanishes off it for the
    // models accepted by score_g.
    const auto psi = in.table.psi(i);
    for (std::size_t k = 0; k < theta.size(); ++k) in.eta_dot[k] += in.table.weight[i] * tx * in.table.g[i] * psi[k];
  }
  return in;
}

void check_score_mean(VerificationReport& r, const NodeTable& t, const Tolerances& tol) {
  double worst = 0.0, scale = 0.0;
  for (int k = 0; k < t.dim_theta; ++k) {
    double mean = 0.0, abs_mean = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) {
      const double v = t.weight[i] * t.g[i] * t.psi(i)[static_cast<std::size_t>(k)];
      mean += v;
      abs_mean += std::abs(v);
    }
    worst = std::max(worst, std::abs(mean));
    scale = std::max(scale, abs_mean);
  }
  r.set("score_mean", worst);
  if (worst > tol.identity_rel_quadrature * std::max(1.0, scale)) {
    r.fail(fmt::format("score mean {} is not zero within {}", worst, tol.identity_rel_quadrature));
  }
}

void require_finite(VerificationReport& r, std::string_view key) {
  if (!std::isfinite(r.at(key))) r.fail(fmt::format("{} is not finite (divergent moment)", key));
}

}  // namespace

VerificationReport crm_bound_scalar(const ParametricModel& model, const EstimatorSpec& est, double theta,
                                    const Tolerances& tol) {
  if (model.dim_theta != 1) throw std::invalid_argument("scalar bound needs a one-parameter model");
  const double alpha = est.alpha, beta = est.beta();
  const std::array<double, 1> th{theta};
  const auto in = bound_inputs(model, est, th);
  const auto& t = in.table;

  double err_moment = 0.0, score_moment = 0.0;
  std::vector<double> w(t.size()), psi(t.size()), s(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double e = in.error[i];
    w[i] = t.weight[i] * t.g[i];
    psi[i] = t.psi(i)[0];
    s[i] = e == 0.0 ? 0.0 : std::copysign(std::pow(std::abs(e), alpha - 1.0), e);
    err_moment += w[i] * std::pow(std::abs(e), alpha);
    score_moment += w[i] * std::pow(std::abs(psi[i]), beta);
  }
  // Orient ψ so that the equality direction has c > 0.
  if (in.eta_dot[0] < 0.0) {
    for (double& v : psi) v = -v;
  }
  const auto fit = equality_fit(w, psi, s);

  VerificationReport r("crm_bound_scalar");
  r.set("alpha", alpha);
  r.set("beta", beta);
  r.set("theta", theta);
  r.set("lhs", std::pow(err_moment, 1.0 / alpha));
  r.set("rhs", std::abs(in.eta_dot[0]) / std::pow(score_moment, 1.0 / beta));
  r.set("gap", r.at("lhs") - r.at("rhs"));
  r.set("eta_dot", in.eta_dot[0]);
  r.set("equality_residual", fit.residual);
  r.set("c_opt", fit.c);
  require_finite(r, "lhs");
  require_finite(r, "rhs");
  check_score_mean(r, t, tol);
  if (r.passed && r.at("lhs") < r.at("rhs") - tol.inequality_slack * std::max(1.0, r.at("rhs"))) {
    r.fail(fmt::format("bound violated: lhs {} < rhs {}", r.at("lhs"), r.at("rhs")));
  }
  return r;
}

namespace {

Eigen::MatrixXd fisher_from_table(const NodeTable& t) {
  const auto k = static_cast<Eigen::Index>(t.dim_theta);
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(k, k);
  for (std::size_t i = 0; i < t.size(); ++i) {
    const auto psi = t.psi(i);
    const Eigen::Map<const Eigen::VectorXd> v(psi.data(), k);
    J.noalias() += (t.weight[i] * t.g[i]) * v * v.transpose();
  }
  return J;
}

Eigen::MatrixXd checked_inverse(const Eigen::MatrixXd& J) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(J);
  const auto& ev = eig.eigenvalues();
  const double largest = ev.cwiseAbs().maxCoeff();
  if (!(largest > 0.0) || ev.minCoeff() <= 1e-12 * largest) {
    const Eigen::VectorXd null = eig.eigenvectors().col(0);
    throw NumericalError(fmt::format("g-Fisher matrix is singular (eigenvalue {}); null direction ({})",
                                     ev.minCoeff(), fmt::join(null.data(), null.data() + null.size(), ", ")));
  }
  return eig.eigenvectors() * ev.cwiseInverse().asDiagonal() * eig.eigenvectors().transpose();
}

}  // namespace

Eigen::MatrixXd fisher_matrix_g(const ParametricModel& model, std::span<const double> theta) {
  return fisher_from_table(tabulate(model, theta));
}

VerificationReport crm_bound_quadratic(const ParametricModel& model, const EstimatorSpec& est,
                                       std::span<const double> theta, const Tolerances& tol) {
  const auto in = bound_inputs(model, est, theta);
  const auto& t = in.table;
  const auto k = static_cast<Eigen::Index>(theta.size());
  const Eigen::MatrixXd J = fisher_from_table(t);
  const Eigen::MatrixXd Jinv = checked_inverse(J);
  const Eigen::Map<const Eigen::VectorXd> ed(in.eta_dot.data(), k);
  const Eigen::VectorXd a = Jinv * ed;

  double err_moment = 0.0;
  std::vector<double> w(t.size()), proj(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) {
    w[i] = t.weight[i] * t.g[i];
    err_moment += w[i] * in.error[i] * in.error[i];
    const auto psi = t.psi(i);
    proj[i] = a.dot(Eigen::Map<const Eigen::VectorXd>(psi.data(), k));
  }
  const auto fit = equality_fit(w, proj, in.error);

  VerificationReport r("crm_bound_quadratic");
  r.set("lhs", err_moment);
  r.set("rhs", ed.dot(a));
  r.set("gap", r.at("lhs") - r.at("rhs"));
  r.set("fisher_min_eigenvalue", Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(J).eigenvalues().minCoeff());
  r.set("equality_residual", fit.residual);
  r.set("c_opt", fit.c);
  require_finite(r, "lhs");
  require_finite(r, "rhs");
  check_score_mean(r, t, tol);
  if (r.passed && r.at("lhs") < r.at("rhs") - tol.inequality_slack * std::max(1.0, r.at("rhs"))) {
    r.fail(fmt::format("bound violated: lhs {} < rhs {}", r.at("lhs"), r.at("rhs")));
  }
  return r;
}

namespace {

double general_objective(const BoundInputs& in, const EstimatorSpec& est, const Eigen::MatrixXd& A) {
  const auto k = static_cast<Eigen::Index>(in.eta_dot.size());
  const Eigen::Map<const Eigen::VectorXd> ed(in.eta_dot.data(), k);
  const Eigen::VectorXd a = A * ed;
  const double beta = est.beta();
  double moment = 0.0;
  for (std::size_t i = 0; i < in.table.size(); ++i) {
    const auto psi = in.table.psi(i);
    const double p = a.dot(Eigen::Map<const Eigen::VectorXd>(psi.data(), k));
    moment += in.table.weight[i] * in.table.g[i] * std::pow(std::abs(p), beta);
  }
  return ed.dot(a) / std::pow(moment, 1.0 / beta);
}

}  // namespace

double crm_bound_general(const ParametricModel& model, const EstimatorSpec& est, std::span<const double> theta,
                         const Eigen::MatrixXd& A) {
  const auto k = static_cast<Eigen::Index>(model.dim_theta);
  if (A.rows() != k || A.cols() != k) throw std::invalid_argument(fmt::format("A must be {0}x{0}", k));
  if (!A.isApprox(A.transpose(), 1e-12) || Eigen::LLT<Eigen::MatrixXd>(A).info() != Eigen::Success) {
    throw std::invalid_argument("A must be symmetric positive definite");
  }
  return general_objective(bound_inputs(model, est, theta), est, A);
}

double crm_bound_optimal_quadratic(const ParametricModel& model, const EstimatorSpec& est,
                                   std::span<const double> theta) {
  const auto in = bound_inputs(model, est, theta);
  return general_objective(in, est, checked_inverse(fisher_from_table(in.table)));
}

MonteCarloEstimate mc_error_moment(const ParametricModel& model, const EstimatorSpec& est,
                                   std::span<const double> theta, std::size_t trials, std::uint64_t seed) {
  check_theta(model, theta);
  if (!model.sample_g) throw std::invalid_argument(fmt::format("model '{}' has no sampler for g", model.name));
  if (trials == 0) throw std::invalid_argument("Monte Carlo needs at least one trial");
  std::mt19937_64 rng(seed);
  const double h = target_at(est, theta);
  std::vector<double> x(static_cast<std::size_t>(model.dim_x));
  std::vector<double> errors(trials);
  for (auto& e : errors) {
    model.sample_g(theta, rng, x);
    e = std::pow(std::abs(est.estimator(x) - h), est.alpha);
  }
  const double n = static_cast<double>(trials);
  const double sum = std::accumulate(errors.begin(), errors.end(), 0.0);
  MonteCarloEstimate out;
  out.trials = trials;
  out.value = std::pow(sum / n, 1.0 / est.alpha);
  if (trials > 1) {
    // Jackknife over leave-one-out means of the plug-in (mean)^{1/α}.
    std::vector<double> loo(trials);
    for (std::size_t i = 0; i < trials; ++i) loo[i] = std::pow((sum - errors[i]) / (n - 1.0), 1.0 / est.alpha);
    const double loo_mean = std::accumulate(loo.begin(), loo.end(), 0.0) / n;
    double ss = 0.0;
    for (double v : loo) ss += (v - loo_mean) * (v - loo_mean);
    out.standard_error = std::sqrt((n - 1.0) / n * ss);
  }
  return out;
}

double location_bound_product(const GridDensity& f, const GridDensity& g, double alpha) {
  if (!(alpha > 1.0)) throw std::invalid_argument("alpha must be > 1");
  if (f.geometry() != Geometry::cartesian || g.geometry() != Geometry::cartesian || f.size() != g.size() ||
      f.dim() != g.dim()) {
    throw std::invalid_argument("location bound needs f and g on the same Cartesian grid");
  }
  const double beta = alpha / (alpha - 1.0);
  const auto grad = gradient(f);
  const auto gv = g.values();
  std::vector<double> err(g.size(), 0.0), score(g.size(), 0.0);
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (gv[i] <= 0.0) continue;
    const auto x = g.coordinates(i);
    double sx = 0.0, sg = 0.0;
    for (int d = 0; d < g.dim(); ++d) {
      sx += x[static_cast<std::size_t>(d)];
      sg += grad.components[static_cast<std::size_t>(d)][i];
    }
    err[i] = gv[i] * std::pow(std::abs(sx), alpha);
    score[i] = gv[i] * std::pow(std::abs(sg / gv[i]), beta);
  }
  return std::pow(integrate(g, err), 1.0 / alpha) * std::pow(integrate(g, score), 1.0 / beta);
}

VerificationReport qcr_product(const GridDensity& g_in, double q, double alpha, const Tolerances& tol,
                               double norm_p) {
  if (!(alpha > 1.0)) throw std::invalid_argument("alpha must be > 1");
  if (!(q > 0.0)) throw std::invalid_argument("q must be > 0");
  if (!(norm_p >= 1.0)) throw std::invalid_argument("norm p must be >= 1");
  const double beta = alpha / (alpha - 1.0);
  const double dual_p = norm_p == 1.0 ? INFINITY : (std::isinf(norm_p) ? 1.0 : norm_p / (norm_p - 1.0));
  VerificationReport r("qcr_product");

  GridDensity g = g_in;
  if (g.geometry() == Geometry::cartesian) {
    const auto mu = mean(g);
    double scale = 0.0;
    for (double m : mu) scale = std::max(scale, std::abs(m));
    if (scale > 1e-10 * std::max(1.0, g.axes()[0].length())) {
      std::vector<double> shift(mu.size());
      for (std::size_t i = 0; i < mu.size(); ++i) shift[i] = -mu[i];
      g = g.translated(shift);
      r.note(fmt::format("g was re-centered by ({})", fmt::join(shift, ", ")));
    }
  }

  struct Parts {
    double moment, mq, phi, fisher, base;
  };
  const auto evaluate = [&](const GridDensity& d) {
    const auto v = d.values();
    std::vector<double> moment_integrand(d.size());
    for (std::size_t i = 0; i < d.size(); ++i) moment_integrand[i] = v[i] * std::pow(d.norm(i, norm_p), alpha);
    Parts p{};
    p.moment = integrate(d, moment_integrand);
    p.mq = m_q(d, q);
    p.phi = fisher_integral(d, q, beta, dual_p);
    p.fisher = p.phi / std::pow(p.mq, beta);
    p.base = std::pow(p.moment, 1.0 / alpha) * std::pow(p.fisher, 1.0 / beta);
    return p;
  };
  const Parts fine = evaluate(g);
  const double moment = fine.moment, mq = fine.mq, phi = fine.phi, fisher = fine.fisher, base = fine.base;
  // Richardson estimate of the O(h²) grid error, from the same density on
  // every other node.
  double discretization = 0.0;
  bool coarsenable = true;
  for (const auto& a : g.axes()) coarsenable = coarsenable && a.count >= 9 && a.count % 2 == 1;
  if (coarsenable) discretization = q * std::abs(base - evaluate(g.coarsened()).base) / 3.0;
  const double n = g.dim();

  r.set("q", q);
  r.set("alpha", alpha);
  r.set("beta", beta);
  r.set("moment", moment);
  r.set("M_q", mq);
  r.set("phi", phi);
  r.set("I", fisher);
  r.set("product", q * base);
  r.set("bound", n);
  r.set("gap", q * base - n);
  r.set("product_qbeta", std::pow(q, beta) * base);
  r.set("qbeta_excess_factor", std::pow(q, beta - 1.0));
  r.set("discretization_error", discretization);
  require_finite(r, "product");
  if (r.passed && r.at("product") < n - tol.inequality_slack * n - discretization) {
    r.fail(fmt::format("q-Cramer-Rao bound violated: product {} < {}", r.at("product"), n));
  }
  return r;
}

}  // namespace qfisher
