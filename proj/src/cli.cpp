#include "qfisher/cli.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <memory>
#include <numbers>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "qfisher/acceptance.hpp"
#include "qfisher/diffusion.hpp"
#include "qfisher/estimation.hpp"
#include "qfisher/inequalities.hpp"
#include "qfisher/info_measures.hpp"

namespace qfisher::cli {

namespace {

using Json = nlohmann::ordered_json;

class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

std::string to_text(double v) { return fmt::format("{:.17g}", v); }
std::string to_text(const std::string& v) { return v; }
template <class T>
  requires std::is_integral_v<T>
std::string to_text(T v) {
  return fmt::format("{}", v);
}

// Options of one subcommand, remembered in declaration order so that the
// resolved configuration can be written into every report.
class Options {
 public:
  explicit Options(CLI::App* app) : app_(app) {}

  template <class T>
  CLI::Option* add(const std::string& key, T& var, const std::string& help) {
    entries_.emplace_back(key, [&var] { return to_text(var); });
    return app_->add_option("--" + key, var, help)->capture_default_str();
  }

  bool given(const std::string& key) const { return app_->get_option("--" + key)->count() > 0; }

  Json resolved() const {
    Json j = Json::object();
    for (const auto& [key, value] : entries_) j[key] = value();
    return j;
  }

  CLI::App* app() const { return app_; }

 private:
  CLI::App* app_;
  std::vector<std::pair<std::string, std::function<std::string()>>> entries_;
};

// Fills in whichever of α, β was not given; both given must be conjugate.
void holder_pair(const Options& o, double& alpha, double& beta, bool alpha_primary) {
  const bool a = o.given("alpha"), b = o.given("beta");
  if (a && b) {
    if (!(alpha > 1.0) || !(beta > 1.0) || std::abs(1.0 / alpha + 1.0 / beta - 1.0) > 1e-12) {
      throw UsageError(fmt::format("alpha = {} and beta = {} are not Hölder conjugates", alpha, beta));
    }
    return;
  }
  if (b || (!a && !alpha_primary)) {
    if (!(beta > 1.0)) throw UsageError(fmt::format("beta must be > 1, got {}", beta));
    alpha = beta / (beta - 1.0);
  } else {
    if (!(alpha > 1.0)) throw UsageError(fmt::format("alpha must be > 1, got {}", alpha));
    beta = alpha / (alpha - 1.0);
  }
}

struct Emitter {
  std::ostream& out;
  std::string path;

  void write(const std::string& text) const {
    if (path.empty()) {
      out << text;
      return;
    }
    std::ofstream file(path, std::ios::binary);
    if (!file) throw UsageError(fmt::format("cannot open output file '{}'", path));
    file << text;
  }
};

Json envelope(const std::string& command, const Options& o) {
  Json j;
  j["command"] = command;
  j["config"] = o.resolved();
  return j;
}

int finish(const Emitter& emit, Json j, bool passed) {
  j["verdict"] = passed ? "pass" : "fail";
  emit.write(j.dump(2) + "\n");
  return passed ? ok : verdict_failure;
}

PerturbationSpec perturbation_spec(std::size_t count, std::uint64_t seed, double amp_min, double amp_max,
                                   std::size_t levels, std::size_t nodes) {
  PerturbationSpec s;
  s.count = count;
  s.seed = seed;
  s.amplitude_min = amp_min;
  s.amplitude_max = amp_max;
  s.amplitude_levels = levels;
  s.nodes = nodes;
  s.validate();
  return s;
}

// Splits `--config FILE` out of the arguments and turns the file's
// key = value lines into flags for the keys not given explicitly.
std::vector<std::string> expand_config(const std::vector<std::string>& args, std::string& config_path,
                                       std::vector<std::string>& config_keys) {
  std::vector<std::string> rest;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config") {
      if (i + 1 >= args.size()) throw UsageError("--config needs a file name");
      config_path = args[++i];
    } else if (args[i].rfind("--config=", 0) == 0) {
      config_path = args[i].substr(9);
    } else {
      rest.push_back(args[i]);
    }
  }
  if (config_path.empty() || rest.empty()) return rest;

  std::ifstream file(config_path);
  if (!file) throw UsageError(fmt::format("cannot read config file '{}'", config_path));
  auto explicit_flag = [&](const std::string& key) {
    return std::any_of(rest.begin(), rest.end(), [&](const std::string& a) {
      return a == "--" + key || a.rfind("--" + key + "=", 0) == 0;
    });
  };
  std::vector<std::string> injected;
  std::string line;
  int line_no = 0;
  while (std::getline(file, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      if (b == std::string::npos) return std::string{};
      return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
    };
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw UsageError(fmt::format("{}:{}: expected key = value", config_path, line_no));
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw UsageError(fmt::format("{}:{}: empty key", config_path, line_no));
    config_keys.push_back(key);
    if (!explicit_flag(key)) {
      injected.push_back("--" + key);
      injected.push_back(value);
    }
  }
  // Keys given explicitly were skipped above, so order does not matter;
  // appending keeps any global options ahead of the subcommand intact.
  std::vector<std::string> out = rest;
  out.insert(out.end(), injected.begin(), injected.end());
  return out;
}

}  // namespace

int run(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Generalized q-entropies, (beta,q)-Fisher information and their inequalities", "qfisher"};
  app.require_subcommand(1);
  app.fallthrough();
  std::string output_path;
  app.add_option("--output,-o", output_path, "Write the report to this file instead of standard output");
  std::string config_help_placeholder;
  app.add_option("--config", config_help_placeholder, "Flat key = value file of defaults for subcommand flags");

  // Shared parameter storage; each subcommand registers what it uses.
  double q = 2.0, alpha = 2.0, beta = 2.0, gamma = 1.0, dist_q = 2.0, m = 2.0, sigma = 1.0, theta = 0.0;
  double t0 = 1.0, t_end = 2.0, extent = 0.0, log_interval = 0.0, courant = 0.25, sigma0 = 1.0;
  double lower = 0.0, upper = 1.0, target = 1.0, amp_min = 0.01, amp_max = 0.2, tolerance = 1e-2;
  int dim = 1;
  std::size_t nodes = 4001, model_nodes = 0, trials = 100000, perturbations = 50, levels = 10;
  std::uint64_t seed = 0;
  std::string density = "qgaussian", input, init = "barenblatt", model = "gaussian-location",
              constraint = "moment";

  std::vector<std::unique_ptr<Options>> all;
  auto sub = [&](const std::string& name, const std::string& help) {
    all.push_back(std::make_unique<Options>(app.add_subcommand(name, help)));
    return all.back().get();
  };

  auto* info = sub("info", "Entropies and Fisher informations of one density");
  info->add("density", density, "qgaussian, uniform or file")
      ->check(CLI::IsMember({"qgaussian", "uniform", "file"}));
  info->add("q", q, "Entropic index of the functionals");
  info->add("beta", beta, "Fisher exponent");
  info->add("alpha", alpha, "q-Gaussian exponent (Hölder conjugate of beta)");
  info->add("dist-q", dist_q, "Index of the q-Gaussian density");
  info->add("gamma", gamma, "Scale of the q-Gaussian density");
  info->add("n", dim, "Dimension");
  info->add("lower", lower, "Lower end of the uniform density (1-D)");
  info->add("upper", upper, "Upper end of the uniform density (1-D)");
  info->add("input", input, "Grid density JSON file (density = file)");
  info->add("nodes", nodes, "Nodes per axis");

  auto* diffuse = sub("diffuse", "Evolve the doubly nonlinear equation and check entropy production");
  diffuse->add("m", m, "Nonlinearity exponent m");
  diffuse->add("beta", beta, "Gradient exponent beta");
  diffuse->add("n", dim, "Dimension");
  diffuse->add("init", init, "barenblatt or gaussian")->check(CLI::IsMember({"barenblatt", "gaussian"}));
  diffuse->add("t0", t0, "Start time");
  diffuse->add("t-end", t_end, "End time");
  diffuse->add("sigma0", sigma0, "Standard deviation of the Gaussian start");
  diffuse->add("extent", extent, "Half-width (1-D) or radius of the grid; 0 picks one");
  diffuse->add("nodes", nodes, "Grid nodes");
  diffuse->add("log-interval", log_interval, "Spacing of logged times; 0 uses 1/200 of the run");
  diffuse->add("courant", courant, "Fraction of the stable explicit step");
  diffuse->add("tolerance", tolerance, "Relative tolerance of the entropy-production identity");

  auto* crbound = sub("crbound", "Generalized Cramér-Rao bound for a registered model");
  crbound->add("model", model, "gaussian-location, qgaussian-location or escort-pair")
      ->check(CLI::IsMember({"gaussian-location", "qgaussian-location", "escort-pair"}));
  crbound->add("alpha", alpha, "Error moment exponent");
  crbound->add("beta", beta, "Score moment exponent (Hölder conjugate of alpha)");
  crbound->add("q", q, "Escort order (escort-pair)");
  crbound->add("dist-q", dist_q, "Index of the q-Gaussian G (exponent 2)");
  crbound->add("gamma", gamma, "Scale of the q-Gaussian G");
  crbound->add("sigma", sigma, "Standard deviation (gaussian-location)");
  crbound->add("n", dim, "Dimension (gaussian-location)");
  crbound->add("theta", theta, "Parameter value");
  crbound->add("trials", trials, "Monte Carlo draws; 0 skips the Monte Carlo estimate");
  crbound->add("nodes", model_nodes, "Quadrature nodes per axis; 0 picks a default");
  crbound->add("seed", seed, "Random seed")->required();

  auto add_family = [&](Options* o) {
    o->add("n", dim, "Dimension");
    o->add("perturbations", perturbations, "Number of perturbed densities");
    o->add("amp-min", amp_min, "Smallest perturbation amplitude");
    o->add("amp-max", amp_max, "Largest perturbation amplitude");
    o->add("levels", levels, "Amplitude levels per perturbation shape");
    o->add("nodes", nodes, "Grid nodes per axis");
    o->add("seed", seed, "Random seed")->required();
  };

  auto* stam = sub("stam", "Generalized Stam inequality over perturbations of the q-Gaussian");
  stam->add("q", q, "Entropic index");
  stam->add("beta", beta, "Fisher exponent");
  stam->add("alpha", alpha, "Hölder conjugate of beta");
  add_family(stam);

  auto* minimize = sub("minimize", "Minimum Fisher information under a moment or entropy constraint");
  minimize->add("constraint", constraint, "moment or entropy")->check(CLI::IsMember({"moment", "entropy"}));
  minimize->add("target", target, "Constraint value (alpha-moment or entropy power)");
  minimize->add("q", q, "Entropic index");
  minimize->add("beta", beta, "Fisher exponent");
  minimize->add("alpha", alpha, "Hölder conjugate of beta");
  add_family(minimize);

  auto* qcr = sub("qcr", "q-Cramér-Rao product at the q-Gaussian and over perturbations");
  qcr->add("q", q, "Entropic index");
  qcr->add("alpha", alpha, "Moment exponent");
  qcr->add("beta", beta, "Fisher exponent (Hölder conjugate of alpha)");
  qcr->add("gamma", gamma, "Scale of the q-Gaussian");
  add_family(qcr);

  auto* reproduce = sub("reproduce", "Run the acceptance suite and print a summary table");
  reproduce->add("seed", seed, "Random seed")->required();

  try {
    std::string config_path;
    std::vector<std::string> config_keys;
    auto args = expand_config(raw_args, config_path, config_keys);
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
    for (const auto& key : config_keys) {
      for (const auto& o : all) {
        if (o->app()->parsed() && o->app()->get_option_no_throw("--" + key) == nullptr) {
          throw UsageError(fmt::format("unknown configuration key '{}' for subcommand '{}'", key,
                                       o->app()->get_name()));
        }
      }
    }
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? ok : usage_error;
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return usage_error;
  }

  const Emitter emit{out, output_path};
  try {
    if (info->app()->parsed()) {
      holder_pair(*info, alpha, beta, false);
      std::function<GridDensity(int)> make;
      if (density == "qgaussian") {
        const QGaussianParams G(dist_q, alpha, gamma, dim);
        make = [G, n0 = nodes](int level) { return to_grid(G, ((n0 - 1) << level) + 1); };
      } else if (density == "uniform") {
        if (dim != 1) throw UsageError("the uniform density is one-dimensional");
        if (!(upper > lower)) throw UsageError("uniform density needs upper > lower");
        make = [lo = lower, hi = upper, n0 = nodes](int level) {
          const Axis ax{lo, hi, ((n0 - 1) << level) + 1};
          return GridDensity({ax}, std::vector<double>(ax.count, 1.0 / (hi - lo)));
        };
      } else {
        if (input.empty()) throw UsageError("density = file needs --input");
        std::ifstream file(input);
        if (!file) throw UsageError(fmt::format("cannot read grid file '{}'", input));
        const GridDensity g = GridDensity::from_json(nlohmann::json::parse(file));
        make = [g](int) { return g; };
      }
      const GridDensity f = make(0);
      Json j = envelope("info", *info);
      Json r;
      r["M_q"] = m_q(f, q);
      r["S_q"] = tsallis_entropy(f, q);
      r["H_q"] = renyi_entropy(f, q);
      r["N_q"] = entropy_power(f, q);
      bool divergent = false;
      double phi = 0.0;
      if (density == "file") {
        phi = phi_fisher(f, q, beta);
        divergent = !std::isfinite(phi);
      } else {
        const auto est = phi_fisher_refined(make, q, beta);
        phi = phi_fisher(f, q, beta);
        divergent = est.divergent;
      }
      r["phi"] = divergent ? Json("inf") : Json(phi);
      r["I"] = divergent ? Json("inf") : Json(phi / std::pow(m_q(f, q), beta));
      r["divergence_flag"] = divergent;
      j["result"] = r;
      emit.write(j.dump(2) + "\n");
      return ok;
    }

    if (diffuse->app()->parsed()) {
      const DiffusionParams params(m, beta, dim);
      // A Gaussian start defaults to t = 0; a Barenblatt start needs t0 > 0.
      const double start = init == "gaussian" && !diffuse->given("t0") ? 0.0 : t0;
      if (!(t_end >= start)) throw UsageError("t-end must not precede the start time");
      GridDensity f0;
      if (init == "barenblatt") {
        if (!(t0 > 0.0)) throw UsageError("a Barenblatt start needs t0 > 0");
        const double C = barenblatt_mass_constant(params);
        const QGaussianParams at_end = barenblatt_as_qgaussian(params, C, t_end);
        const double L = extent > 0.0 ? extent
                                       : (at_end.compact() ? 1.5 * at_end.support_radius()
                                                           : 1.2 * truncation_radius(at_end, 1e-14));
        f0 = barenblatt_grid(params, t0, L, nodes);
      } else {
        if (!(sigma0 > 0.0)) throw UsageError("sigma0 must be > 0");
        const double L = extent > 0.0 ? extent : 12.0 * std::sqrt(sigma0 * sigma0 + 2.0 * t_end);
        const double norm = std::pow(2.0 * std::numbers::pi * sigma0 * sigma0, 0.5 * dim);
        f0 = diffusion_grid(dim, L, nodes,
                            [&](double r) { return std::exp(-0.5 * r * r / (sigma0 * sigma0)) / norm; });
      }
      EvolveOptions opt;
      opt.log_interval = log_interval;
      opt.courant = courant;
      auto result = evolve(make_state(params, normalize(f0), start), t_end, opt);
      const auto rows = debruijn_check(result.log);
      const auto summary = debruijn_summary(result.log, rows, tolerance);
      std::ostringstream csv;
      const Json config = diffuse->resolved();
      for (const auto& [key, value] : config.items()) csv << "# " << key << " = " << value.get<std::string>() << "\n";
      csv << "# q = " << to_text(params.q()) << "\n";
      write_trajectory_csv(csv, result.log);
      csv << "# verdict = " << (summary.passed ? "pass" : "fail") << "\n";
      for (const auto& [key, value] : summary.values) csv << "# " << key << " = " << to_text(value) << "\n";
      emit.write(csv.str());
      return summary.passed ? ok : verdict_failure;
    }

    if (crbound->app()->parsed()) {
      holder_pair(*crbound, alpha, beta, true);
      ParametricModel pm;
      if (model == "gaussian-location") {
        pm = gaussian_location_model(dim, sigma, model_nodes);
      } else {
        const QGaussianParams G(dist_q, 2.0, gamma, 1);
        const std::size_t k = model_nodes > 0 ? model_nodes : 4001;
        pm = model == "escort-pair" ? escort_pair_model(G, q, k) : qgaussian_location_model(G, k);
        if (dim != 1) throw UsageError("q-Gaussian models are one-dimensional");
      }
      const auto est = sample_mean_estimator(pm.dim_x, alpha);
      const auto rep = crm_bound_scalar(pm, est, theta);
      Json j = envelope("crbound", *crbound);
      Json r;
      r["lhs"] = rep.at("lhs");
      r["rhs"] = rep.at("rhs");
      r["gap"] = rep.at("gap");
      r["equality_residual"] = rep.at("equality_residual");
      if (trials > 0) {
        const std::array<double, 1> th{theta};
        const auto mc = mc_error_moment(pm, est, th, trials, seed);
        r["mc_value"] = mc.value;
        r["mc_se"] = mc.standard_error;
      } else {
        r["mc_value"] = nullptr;
        r["mc_se"] = nullptr;
      }
      r["report"] = rep.to_json();
      j["result"] = r;
      return finish(emit, j, rep.passed);
    }

    auto family_json = [](const VerificationReport& rep) {
      Json r;
      r["value_G"] = rep.at("value_G");
      r["min_perturbed"] = rep.at("min_perturbed");
      r["worst_gap"] = rep.at("worst_gap");
      r["verdict"] = rep.passed ? "pass" : "fail";
      r["report"] = rep.to_json();
      return r;
    };

    if (stam->app()->parsed()) {
      holder_pair(*stam, alpha, beta, false);
      const auto spec = perturbation_spec(perturbations, seed, amp_min, amp_max, levels, nodes);
      const auto rep = stam_family(q, beta, dim, spec);
      Json j = envelope("stam", *stam);
      j["result"] = family_json(rep);
      return finish(emit, j, rep.passed);
    }

    if (minimize->app()->parsed()) {
      holder_pair(*minimize, alpha, beta, false);
      const auto spec = perturbation_spec(perturbations, seed, amp_min, amp_max, levels, nodes);
      const auto rep = constraint == "moment" ? min_fisher_fixed_moment(q, beta, dim, target, spec)
                                              : min_fisher_fixed_entropy(q, beta, dim, target, spec);
      Json j = envelope("minimize", *minimize);
      j["result"] = family_json(rep);
      return finish(emit, j, rep.passed);
    }

    if (qcr->app()->parsed()) {
      holder_pair(*qcr, alpha, beta, true);
      const auto at_g = qcr_product(to_grid(QGaussianParams(q, alpha, gamma, dim), nodes), q, alpha);
      Json j = envelope("qcr", *qcr);
      Json r;
      r["product"] = at_g.at("product");
      r["bound"] = dim;
      r["gap"] = at_g.at("gap");
      r["report"] = at_g.to_json();
      bool passed = at_g.passed;
      if (perturbations > 0) {
        const auto spec = perturbation_spec(perturbations, seed, amp_min, amp_max, levels, nodes);
        const auto fam = qcr_family(q, alpha, dim, spec);
        r["family"] = family_json(fam);
        passed = passed && fam.passed;
      }
      j["result"] = r;
      return finish(emit, j, passed);
    }

    if (reproduce->app()->parsed()) {
      AcceptanceOptions opt;
      opt.seed = seed;
      const auto results = run_acceptance(opt);
      std::string text = fmt::format("# seed = {}\n", seed);
      text += summary_table(results);
      emit.write(text);
      const bool passed = std::all_of(results.begin(), results.end(), [](const auto& r) { return r.passed; });
      return passed ? ok : verdict_failure;
    }
  } catch (const std::invalid_argument& e) {
    err << "usage error: " << e.what() << "\n";
    return usage_error;
  } catch (const NumericalError& e) {
    err << "numerical error: " << e.what() << "\n";
    return numerical_error;
  }
  return usage_error;
}

}  // namespace qfisher::cli
