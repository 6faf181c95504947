#include "qfisher/grid.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <fmt/format.h>

namespace qfisher {

double unit_sphere_area(int dim) {
  if (dim < 1) throw std::invalid_argument("dimension must be >= 1");
  const double half = 0.5 * dim;
  return 2.0 * std::pow(std::numbers::pi, half) / std::tgamma(half);
}

namespace {

std::size_t total_count(const std::vector<Axis>& axes) {
  std::size_t n = 1;
  for (const auto& a : axes) n *= a.count;
  return n;
}

}  // namespace

GridDensity::GridDensity(std::vector<Axis> axes, std::vector<double> values)
    : geometry_(Geometry::cartesian),
      dim_(static_cast<int>(axes.size())),
      axes_(std::move(axes)),
      values_(std::move(values)) {
  if (dim_ < 1 || dim_ > 2) {
    throw std::invalid_argument(
        fmt::format("Cartesian grids support 1 or 2 dimensions, got {}", dim_));
  }
  validate();
  rebuild_support();
}

GridDensity GridDensity::radial(int dim, Axis radius, std::vector<double> values) {
  if (dim < 1) throw std::invalid_argument("radial grid dimension must be >= 1");
  if (radius.lower != 0.0) throw std::invalid_argument("radial axis must start at r = 0");
  GridDensity g;
  g.geometry_ = Geometry::radial;
  g.dim_ = dim;
  g.axes_ = {radius};
  g.values_ = std::move(values);
  g.validate();
  g.rebuild_support();
  return g;
}

GridDensity GridDensity::from_function(std::vector<Axis> axes,
                                       const std::function<double(std::span<const double>)>& f) {
  const std::size_t n = total_count(axes);
  std::vector<double> values(n);
  std::array<double, 2> x{};
  if (axes.size() == 1) {
    for (std::size_t i = 0; i < n; ++i) {
      x[0] = axes[0].node(i);
      values[i] = f(std::span<const double>(x.data(), 1));
    }
  } else if (axes.size() == 2) {
    for (std::size_t i = 0; i < axes[0].count; ++i) {
      x[0] = axes[0].node(i);
      for (std::size_t j = 0; j < axes[1].count; ++j) {
        x[1] = axes[1].node(j);
        values[i * axes[1].count + j] = f(std::span<const double>(x.data(), 2));
      }
    }
  }
  return GridDensity(std::move(axes), std::move(values));
}

GridDensity GridDensity::radial_from_function(int dim, Axis radius,
                                              const std::function<double(double)>& f) {
  std::vector<double> values(radius.count);
  for (std::size_t i = 0; i < radius.count; ++i) values[i] = f(radius.node(i));
  return radial(dim, radius, std::move(values));
}

void GridDensity::validate() const {
  for (const auto& a : axes_) {
    if (a.count < 3) throw std::invalid_argument("each axis needs at least 3 nodes");
    if (!(a.upper > a.lower)) throw std::invalid_argument("axis upper bound must exceed lower bound");
  }
  if (values_.size() != total_count(axes_)) {
    throw std::invalid_argument(fmt::format("expected {} grid values, got {}",
                                            total_count(axes_), values_.size()));
  }
  for (std::size_t i = 0; i < values_.size(); ++i) {
    const double v = values_[i];
    if (!std::isfinite(v)) {
      const auto c = coordinates(i);
      throw NumericalError(fmt::format("non-finite density value {} at node {} (x = {}, {})",
                                       v, i, c[0], c[1]));
    }
    if (v < 0.0) {
      throw std::invalid_argument(fmt::format("negative density value {} at node {}", v, i));
    }
  }
}

void GridDensity::rebuild_support() {
  support_.resize(values_.size());
  std::transform(values_.begin(), values_.end(), support_.begin(),
                 [](double v) { return static_cast<std::uint8_t>(v > 0.0); });
}

std::array<double, 2> GridDensity::coordinates(std::size_t index) const noexcept {
  if (axes_.size() == 2) {
    return {axes_[0].node(index / axes_[1].count), axes_[1].node(index % axes_[1].count)};
  }
  return {axes_[0].node(index), 0.0};
}

double GridDensity::norm(std::size_t index) const noexcept {
  const auto c = coordinates(index);
  if (geometry_ == Geometry::radial) return c[0];
  return axes_.size() == 2 ? std::hypot(c[0], c[1]) : std::abs(c[0]);
}

double GridDensity::norm(std::size_t index, double p) const {
  if (p == 2.0) return norm(index);
  if (geometry_ == Geometry::radial) {
    throw std::invalid_argument("radial grids only support the Euclidean norm");
  }
  const auto c = coordinates(index);
  if (axes_.size() == 1) return std::abs(c[0]);
  if (std::isinf(p)) return std::max(std::abs(c[0]), std::abs(c[1]));
  return std::pow(std::pow(std::abs(c[0]), p) + std::pow(std::abs(c[1]), p), 1.0 / p);
}

GridDensity GridDensity::with_values(std::vector<double> values) const {
  GridDensity g = *this;
  g.values_ = std::move(values);
  g.validate();
  g.rebuild_support();
  return g;
}

GridDensity GridDensity::dilated(double c) const {
  if (!(c > 0.0) || !std::isfinite(c)) throw std::invalid_argument("dilation factor must be positive");
  GridDensity g = *this;
  for (auto& a : g.axes_) {
    a.lower *= c;
    a.upper *= c;
  }
  const double scale = std::pow(c, -dim_);
  for (auto& v : g.values_) v *= scale;
  g.rebuild_support();
  return g;
}

GridDensity GridDensity::translated(std::span<const double> shift) const {
  if (geometry_ == Geometry::radial) throw std::invalid_argument("cannot translate a radial density");
  if (shift.size() != axes_.size()) throw std::invalid_argument("shift dimension mismatch");
  GridDensity g = *this;
  for (std::size_t d = 0; d < shift.size(); ++d) {
    g.axes_[d].lower += shift[d];
    g.axes_[d].upper += shift[d];
  }
  return g;
}

GridDensity GridDensity::coarsened() const {
  for (const auto& a : axes_) {
    if (a.count < 5 || a.count % 2 == 0) throw std::invalid_argument("coarsening needs odd node counts >= 5");
  }
  GridDensity g = *this;
  for (auto& a : g.axes_) a.count = (a.count + 1) / 2;
  g.values_.clear();
  if (axes_.size() == 1) {
    for (std::size_t i = 0; i < values_.size(); i += 2) g.values_.push_back(values_[i]);
  } else {
    const std::size_t n1 = axes_[1].count;
    for (std::size_t i = 0; i < axes_[0].count; i += 2) {
      for (std::size_t j = 0; j < n1; j += 2) g.values_.push_back(values_[i * n1 + j]);
    }
  }
  g.rebuild_support();
  return g;
}

nlohmann::json GridDensity::to_json() const {
  nlohmann::json axes = nlohmann::json::array();
  for (const auto& a : axes_) {
    axes.push_back({{"lower", a.lower}, {"upper", a.upper}, {"count", a.count}});
  }
  return {{"geometry", geometry_ == Geometry::radial ? "radial" : "cartesian"},
          {"dim", dim_},
          {"axes", axes},
          {"values", values_}};
}

GridDensity GridDensity::from_json(const nlohmann::json& j) {
  std::vector<Axis> axes;
  for (const auto& a : j.at("axes")) {
    axes.push_back({a.at("lower").get<double>(), a.at("upper").get<double>(),
                    a.at("count").get<std::size_t>()});
  }
  auto values = j.at("values").get<std::vector<double>>();
  const std::string geometry = j.value("geometry", "cartesian");
  if (geometry == "radial") {
    if (axes.size() != 1) throw std::invalid_argument("radial grid needs exactly one axis");
    return radial(j.at("dim").get<int>(), axes[0], std::move(values));
  }
  if (geometry != "cartesian") throw std::invalid_argument("unknown geometry '" + geometry + "'");
  GridDensity g(std::move(axes), std::move(values));
  if (j.contains("dim") && j.at("dim").get<int>() != g.dim()) {
    throw std::invalid_argument("'dim' does not match the number of axes");
  }
  return g;
}

std::vector<double> simpson_weights(const Axis& axis) {
  const std::size_t n = axis.count;
  const double h = axis.step();
  std::vector<double> w(n, 0.0);
  if (n < 2) return w;
  if (n == 2) {
    w[0] = w[1] = 0.5 * h;
    return w;
  }
  // Simpson on the leading odd-count block, 3/8 rule on the last four nodes
  // when the node count is even.
  const std::size_t simpson_nodes = (n % 2 == 1) ? n : n - 3;
  if (simpson_nodes >= 3) {
    for (std::size_t i = 0; i + 2 < simpson_nodes; i += 2) {
      w[i] += h / 3.0;
      w[i + 1] += 4.0 * h / 3.0;
      w[i + 2] += h / 3.0;
    }
  }
  if (n % 2 == 0) {
    const std::size_t s = n - 4;
    w[s] += 3.0 * h / 8.0;
    w[s + 1] += 9.0 * h / 8.0;
    w[s + 2] += 9.0 * h / 8.0;
    w[s + 3] += 3.0 * h / 8.0;
  }
  return w;
}

std::vector<double> quadrature_weights(const GridDensity& grid) {
  const auto& axes = grid.axes();
  if (grid.geometry() == Geometry::radial) {
    auto w = simpson_weights(axes[0]);
    const double area = unit_sphere_area(grid.dim());
    const int power = grid.dim() - 1;
    for (std::size_t i = 0; i < w.size(); ++i) {
      w[i] *= area * (power == 0 ? 1.0 : std::pow(axes[0].node(i), power));
    }
    return w;
  }
  if (axes.size() == 1) return simpson_weights(axes[0]);
  const auto w0 = simpson_weights(axes[0]);
  const auto w1 = simpson_weights(axes[1]);
  std::vector<double> w(w0.size() * w1.size());
  for (std::size_t i = 0; i < w0.size(); ++i) {
    for (std::size_t j = 0; j < w1.size(); ++j) w[i * w1.size() + j] = w0[i] * w1[j];
  }
  return w;
}

double integrate(const GridDensity& grid, std::span<const double> integrand) {
  if (integrand.size() != grid.size()) throw std::invalid_argument("integrand size does not match grid");
  const auto w = quadrature_weights(grid);
  // Neumaier-compensated sum in fixed node order.
  double sum = 0.0;
  double comp = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    const double v = integrand[i];
    if (!std::isfinite(v)) {
      const auto c = grid.coordinates(i);
      throw NumericalError(
          fmt::format("non-finite integrand value {} at node {} (x = {}, {})", v, i, c[0], c[1]));
    }
    const double term = w[i] * v;
    const double t = sum + term;
    comp += (std::abs(sum) >= std::abs(term)) ? (sum - t) + term : (term - t) + sum;
    sum = t;
  }
  return sum + comp;
}

double integrate(const GridDensity& f) { return integrate(f, f.values()); }

double integrate(const GridDensity& f, const std::function<double(std::span<const double>, double)>& h) {
  std::vector<double> integrand(f.size());
  const auto values = f.values();
  for (std::size_t i = 0; i < f.size(); ++i) {
    const auto c = f.coordinates(i);
    const std::size_t n = f.geometry() == Geometry::radial ? 1 : static_cast<std::size_t>(f.dim());
    integrand[i] = h(std::span<const double>(c.data(), n), values[i]);
  }
  return integrate(f, integrand);
}

namespace {

// Derivative along one line of nodes: `at(i)` gives values, `inside(i)` the mask.
template <class Value, class Inside>
double line_derivative(std::size_t i, std::size_t n, double h, Value at, Inside inside) {
  const bool left = i > 0 && inside(i - 1);
  const bool right = i + 1 < n && inside(i + 1);
  if (left && right) return (at(i + 1) - at(i - 1)) / (2.0 * h);
  if (right) {
    if (i + 2 < n && inside(i + 2)) return (-3.0 * at(i) + 4.0 * at(i + 1) - at(i + 2)) / (2.0 * h);
    return (at(i + 1) - at(i)) / h;
  }
  if (left) {
    if (i >= 2 && inside(i - 2)) return (3.0 * at(i) - 4.0 * at(i - 1) + at(i - 2)) / (2.0 * h);
    return (at(i) - at(i - 1)) / h;
  }
  return 0.0;
}

}  // namespace

VectorField gradient(const GridDensity& f) {
  const auto v = f.values();
  const auto mask = f.support_mask();
  const auto& axes = f.axes();
  VectorField field;
  field.components.assign(axes.size(), std::vector<double>(f.size(), 0.0));

  if (axes.size() == 1) {
    const std::size_t n = axes[0].count;
    const double h = axes[0].step();
    auto at = [&](std::size_t i) { return v[i]; };
    auto inside = [&](std::size_t i) { return mask[i] != 0; };
    for (std::size_t i = 0; i < n; ++i) {
      if (!mask[i]) continue;
      if (f.geometry() == Geometry::radial && i == 0) continue;  // symmetric: df/dr(0) = 0
      field.components[0][i] = line_derivative(i, n, h, at, inside);
    }
    return field;
  }

  const std::size_t n0 = axes[0].count;
  const std::size_t n1 = axes[1].count;
  const double h0 = axes[0].step();
  const double h1 = axes[1].step();
  for (std::size_t i = 0; i < n0; ++i) {
    for (std::size_t j = 0; j < n1; ++j) {
      const std::size_t idx = i * n1 + j;
      if (!mask[idx]) continue;
      field.components[0][idx] = line_derivative(
          i, n0, h0, [&](std::size_t k) { return v[k * n1 + j]; },
          [&](std::size_t k) { return mask[k * n1 + j] != 0; });
      field.components[1][idx] = line_derivative(
          j, n1, h1, [&](std::size_t k) { return v[i * n1 + k]; },
          [&](std::size_t k) { return mask[i * n1 + k] != 0; });
    }
  }
  return field;
}

std::vector<double> gradient_norm(const GridDensity& f, double p) {
  const auto field = gradient(f);
  std::vector<double> out(f.size());
  if (field.components.size() == 1) {
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::abs(field.components[0][i]);
    return out;
  }
  const auto& gx = field.components[0];
  const auto& gy = field.components[1];
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double a = std::abs(gx[i]);
    const double b = std::abs(gy[i]);
    if (p == 2.0) {
      out[i] = std::hypot(a, b);
    } else if (std::isinf(p)) {
      out[i] = std::max(a, b);
    } else {
      out[i] = std::pow(std::pow(a, p) + std::pow(b, p), 1.0 / p);
    }
  }
  return out;
}

GridDensity normalize(const GridDensity& f) {
  const double mass = integrate(f);
  if (!std::isfinite(mass) || !(mass > 0.0)) {
    throw NumericalError(fmt::format("cannot normalize a density with total mass {}", mass));
  }
  std::vector<double> values(f.values().begin(), f.values().end());
  for (auto& v : values) v /= mass;
  return f.with_values(std::move(values));
}

double radial_moment(const GridDensity& f, double power) {
  std::vector<double> integrand(f.size());
  const auto v = f.values();
  for (std::size_t i = 0; i < f.size(); ++i) {
    integrand[i] = v[i] == 0.0 ? 0.0 : std::pow(f.norm(i), power) * v[i];
  }
  return integrate(f, integrand);
}

std::vector<double> mean(const GridDensity& f) {
  if (f.geometry() == Geometry::radial) return std::vector<double>(1, 0.0);
  std::vector<double> out(f.axes().size());
  std::vector<double> integrand(f.size());
  const auto v = f.values();
  for (std::size_t d = 0; d < out.size(); ++d) {
    for (std::size_t i = 0; i < f.size(); ++i) integrand[i] = f.coordinates(i)[d] * v[i];
    out[d] = integrate(f, integrand);
  }
  return out;
}

}  // namespace qfisher
