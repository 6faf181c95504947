#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "qfisher/grid.hpp"

namespace qfisher {

struct Tolerances {
  double quadrature_rel = 1e-8;
  /// Identity checks coupled to the PDE solver.
  double identity_rel = 1e-2;
  /// Identity checks that only involve quadrature.
  double identity_rel_quadrature = 1e-6;
  double inequality_slack = 1e-9;
  /// |∫f − 1| allowed after normalization.
  double normalization = 1e-10;

  void validate() const;
};

/// Root of a continuous function on [lower, upper] whose end values have
/// opposite signs. Throws NumericalError (with the bracket) otherwise.
double find_root(const std::function<double(double)>& f, double lower, double upper,
                 double x_tolerance = 1e-14, int max_iterations = 200);

/// Root of a monotone function of a positive variable: the bracket
/// [guess/2^k, guess·2^k] is widened geometrically until it changes sign.
double find_root_positive(const std::function<double(double)>& f, double guess,
                          double x_tolerance = 1e-14);

/// Monotone piecewise-cubic Hermite interpolant (Fritsch–Carlson slopes).
class MonotoneCubic {
 public:
  MonotoneCubic() = default;
  MonotoneCubic(std::vector<double> x, std::vector<double> y);

  double operator()(double x) const;
  std::span<const double> knots() const noexcept { return x_; }

 private:
  std::vector<double> x_;
  std::vector<double> y_;
  std::vector<double> slope_;
};

/// Calls `visit(x, weight)` for every node of the tensor Simpson rule on the
/// box spanned by `axes` (any dimension). Nodes are visited in row-major order.
void for_each_node(std::span<const Axis> axes,
                   const std::function<void(std::span<const double>, double)>& visit);

/// Least-squares slope of y against x.
double fit_slope(std::span<const double> x, std::span<const double> y);

}  // namespace qfisher
