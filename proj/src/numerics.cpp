#include "qfisher/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>

#include <boost/math/tools/roots.hpp>
#include <boost/math/tools/toms748_solve.hpp>
#include <fmt/format.h>

namespace qfisher {

void Tolerances::validate() const {
  for (double v : {quadrature_rel, identity_rel, identity_rel_quadrature, inequality_slack, normalization}) {
    if (!(v > 0.0) || !std::isfinite(v)) throw std::invalid_argument("tolerances must be strictly positive");
  }
}

double find_root(const std::function<double(double)>& f, double lower, double upper,
                 double x_tolerance, int max_iterations) {
  const double fl = f(lower);
  const double fu = f(upper);
  if (!std::isfinite(fl) || !std::isfinite(fu)) {
    throw NumericalError(fmt::format("root finding: non-finite value on bracket [{}, {}]", lower, upper));
  }
  if (fl == 0.0) return lower;
  if (fu == 0.0) return upper;
  if ((fl < 0.0) == (fu < 0.0)) {
    throw NumericalError(fmt::format(
        "root finding: [{}, {}] does not bracket a root (f = {}, {})", lower, upper, fl, fu));
  }
  auto tol = [x_tolerance](double a, double b) {
    return std::abs(b - a) <= x_tolerance * std::max(1.0, std::abs(a));
  };
  std::uintmax_t iterations = static_cast<std::uintmax_t>(max_iterations);
  const auto [a, b] = boost::math::tools::toms748_solve(f, lower, upper, fl, fu, tol, iterations);
  if (iterations >= static_cast<std::uintmax_t>(max_iterations)) {
    throw NumericalError(fmt::format("root finding did not converge on [{}, {}]", a, b));
  }
  return 0.5 * (a + b);
}

double find_root_positive(const std::function<double(double)>& f, double guess, double x_tolerance) {
  if (!(guess > 0.0)) throw std::invalid_argument("initial guess must be positive");
  double lower = guess;
  double upper = guess;
  const bool sign_at_guess = f(guess) < 0.0;
  for (int k = 0; k < 200; ++k) {
    lower *= 0.5;
    upper *= 2.0;
    const bool sl = f(lower) < 0.0;
    const bool su = f(upper) < 0.0;
    if (sl != sign_at_guess) return find_root(f, lower, guess, x_tolerance);
    if (su != sign_at_guess) return find_root(f, guess, upper, x_tolerance);
  }
  throw NumericalError(fmt::format("could not bracket a root in [{}, {}]", lower, upper));
}

MonotoneCubic::MonotoneCubic(std::vector<double> x, std::vector<double> y)
    : x_(std::move(x)), y_(std::move(y)) {
  const std::size_t n = x_.size();
  if (n < 2 || y_.size() != n) throw std::invalid_argument("monotone cubic needs >= 2 matching knots");
  for (std::size_t i = 1; i < n; ++i) {
    if (!(x_[i] > x_[i - 1])) throw std::invalid_argument("knots must be strictly increasing");
  }
  std::vector<double> secant(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) secant[i] = (y_[i + 1] - y_[i]) / (x_[i + 1] - x_[i]);
  slope_.assign(n, 0.0);
  slope_[0] = secant[0];
  slope_[n - 1] = secant[n - 2];
  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (secant[i - 1] * secant[i] <= 0.0) {
      slope_[i] = 0.0;
    } else {
      // Weighted harmonic mean (Fritsch–Butland form of Fritsch–Carlson).
      const double h0 = x_[i] - x_[i - 1];
      const double h1 = x_[i + 1] - x_[i];
      const double w0 = 2.0 * h1 + h0;
      const double w1 = h1 + 2.0 * h0;
      slope_[i] = (w0 + w1) / (w0 / secant[i - 1] + w1 / secant[i]);
    }
  }
}

double MonotoneCubic::operator()(double x) const {
  if (x <= x_.front()) return y_.front();
  if (x >= x_.back()) return y_.back();
  const auto it = std::upper_bound(x_.begin(), x_.end(), x);
  const std::size_t i = static_cast<std::size_t>(it - x_.begin()) - 1;
  const double h = x_[i + 1] - x_[i];
  const double t = (x - x_[i]) / h;
  const double t2 = t * t;
  const double t3 = t2 * t;
  const double h00 = 2 * t3 - 3 * t2 + 1;
  const double h10 = t3 - 2 * t2 + t;
  const double h01 = -2 * t3 + 3 * t2;
  const double h11 = t3 - t2;
  return h00 * y_[i] + h10 * h * slope_[i] + h01 * y_[i + 1] + h11 * h * slope_[i + 1];
}

void for_each_node(std::span<const Axis> axes,
                   const std::function<void(std::span<const double>, double)>& visit) {
  const std::size_t dim = axes.size();
  if (dim == 0) return;
  std::vector<std::vector<double>> weights;
  weights.reserve(dim);
  for (const auto& a : axes) {
    if (a.count < 3) throw std::invalid_argument("each quadrature axis needs at least 3 nodes");
    weights.push_back(simpson_weights(a));
  }
  std::vector<std::size_t> index(dim, 0);
  std::vector<double> x(dim);
  for (std::size_t d = 0; d < dim; ++d) x[d] = axes[d].node(0);
  while (true) {
    double w = 1.0;
    for (std::size_t d = 0; d < dim; ++d) w *= weights[d][index[d]];
    visit(x, w);
    std::size_t d = dim;
    while (d > 0) {
      --d;
      if (++index[d] < axes[d].count) {
        x[d] = axes[d].node(index[d]);
        break;
      }
      index[d] = 0;
      x[d] = axes[d].node(0);
      if (d == 0) return;
    }
  }
}

double fit_slope(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("fit_slope needs >= 2 points");
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  if (sxx == 0.0) throw std::invalid_argument("fit_slope: abscissae are all equal");
  return sxy / sxx;
}

}  // namespace qfisher
