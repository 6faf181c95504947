#pragma once

// Densities sampled on regular grids, composite Simpson quadrature and
// finite-difference gradients. Every functional in the library works on
// a GridDensity.

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace qfisher {

/// Raised when a computation cannot produce a trustworthy number
/// (non-finite input, failed root bracket, unstable time step, ...).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when an integral is detected to be infinite.
class DivergenceError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// Uniform 1-D grid: `count` nodes from `lower` to `upper` inclusive.
struct Axis {
  double lower = 0.0;
  double upper = 1.0;
  std::size_t count = 0;

  double step() const noexcept { return (upper - lower) / static_cast<double>(count - 1); }
  double node(std::size_t i) const noexcept {
    // Written so that both end points are reproduced exactly.
    const double s = static_cast<double>(i) / static_cast<double>(count - 1);
    return lower * (1.0 - s) + upper * s;
  }
  double length() const noexcept { return upper - lower; }
};

/// Cartesian grids cover dim ∈ {1, 2} with a full tensor grid. Radial grids
/// store a radially symmetric density f(‖x‖) in any dimension on r ∈ [0, R]
/// and integrate with the measure |S^{n-1}| r^{n-1} dr.
enum class Geometry { cartesian, radial };

/// Surface area of the unit sphere in R^n (2 for n = 1).
double unit_sphere_area(int dim);

class GridDensity {
 public:
  GridDensity() = default;

  /// Cartesian density; `values` row-major with axis 0 slowest.
  GridDensity(std::vector<Axis> axes, std::vector<double> values);

  /// Radially symmetric density in `dim` dimensions, sampled on r ∈ [0, R].
  static GridDensity radial(int dim, Axis radius, std::vector<double> values);

  static GridDensity from_function(std::vector<Axis> axes,
                                   const std::function<double(std::span<const double>)>& f);
  static GridDensity radial_from_function(int dim, Axis radius,
                                          const std::function<double(double)>& f);

  int dim() const noexcept { return dim_; }
  Geometry geometry() const noexcept { return geometry_; }
  const std::vector<Axis>& axes() const noexcept { return axes_; }
  std::span<const double> values() const noexcept { return values_; }
  std::span<const std::uint8_t> support_mask() const noexcept { return support_; }
  std::size_t size() const noexcept { return values_.size(); }
  bool in_support(std::size_t i) const noexcept { return support_[i] != 0; }

  /// Coordinates of node `index`. Cartesian: one entry per axis. Radial: {r}.
  std::array<double, 2> coordinates(std::size_t index) const noexcept;
  /// Euclidean norm ‖x‖ of node `index` (r itself on radial grids).
  double norm(std::size_t index) const noexcept;
  /// ‖x‖_p of node `index`; radial grids only support p = 2.
  double norm(std::size_t index, double p) const;

  GridDensity with_values(std::vector<double> values) const;
  /// Density of cX: values scaled by c^{-n}, axes by c.
  GridDensity dilated(double c) const;
  /// Density of X + shift (Cartesian only).
  GridDensity translated(std::span<const double> shift) const;
  /// Every other node along each axis (odd node counts ≥ 5 only); the pair
  /// (h, 2h) gives Richardson error estimates.
  GridDensity coarsened() const;

  nlohmann::json to_json() const;
  static GridDensity from_json(const nlohmann::json& j);

 private:
  void validate() const;
  void rebuild_support();

  Geometry geometry_ = Geometry::cartesian;
  int dim_ = 0;
  std::vector<Axis> axes_;
  std::vector<double> values_;
  std::vector<std::uint8_t> support_;
};

/// Composite Simpson weights for one axis (Simpson 3/8 closes an even node count).
std::vector<double> simpson_weights(const Axis& axis);

/// Quadrature weights of the grid, including the radial measure when relevant.
std::vector<double> quadrature_weights(const GridDensity& grid);

/// ∫ f dx.
double integrate(const GridDensity& f);
/// ∫ integrand dx, where `integrand` holds one value per node of `grid`.
double integrate(const GridDensity& grid, std::span<const double> integrand);
/// ∫ h(x, f(x)) dx evaluated node-wise.
double integrate(const GridDensity& f, const std::function<double(std::span<const double>, double)>& h);

/// Per-axis partial derivatives; `components[d][node]`. Radial grids carry a
/// single component, d/dr.
struct VectorField {
  std::vector<std::vector<double>> components;
  std::size_t size() const noexcept { return components.empty() ? 0 : components.front().size(); }
};

/// Central differences in the interior; second-order one-sided differences
/// at grid edges and at the boundary of the support, taken from the interior
/// side. Nodes outside the support get a zero gradient.
VectorField gradient(const GridDensity& f);

/// Node-wise ‖∇f‖_p (radial grids: |df/dr|).
std::vector<double> gradient_norm(const GridDensity& f, double p = 2.0);

GridDensity normalize(const GridDensity& f);

/// E_f[‖X‖^power] under the Euclidean norm.
double radial_moment(const GridDensity& f, double power);

/// Mean of a Cartesian density, one entry per axis; zeros on radial grids.
std::vector<double> mean(const GridDensity& f);

}  // namespace qfisher
