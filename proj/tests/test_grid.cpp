#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "qfisher/grid.hpp"
#include "qfisher/numerics.hpp"
#include "qfisher/report.hpp"

using namespace qfisher;

namespace {

double standard_normal(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi); }

GridDensity normal_grid(std::size_t nodes = 4001, double extent = 10.0) {
  return GridDensity::from_function({Axis{-extent, extent, nodes}},
                                    [](std::span<const double> x) { return standard_normal(x[0]); });
}

}  // namespace

TEST(Quadrature, ConstantIntegrandIsExact) {
  const GridDensity g({Axis{0.0, 1.0, 1001}}, std::vector<double>(1001, 1.0));
  EXPECT_NEAR(integrate(g), 1.0, 1e-14);
}

TEST(Quadrature, EvenNodeCountUsesClosingRule) {
  // Cubic integrands are exact under both Simpson rules.
  const Axis ax{0.0, 2.0, 10};
  const auto w = simpson_weights(ax);
  double sum = 0.0;
  for (std::size_t i = 0; i < ax.count; ++i) sum += w[i] * std::pow(ax.node(i), 3);
  EXPECT_NEAR(sum, 4.0, 1e-13);
}

TEST(Quadrature, StandardNormalMass) { EXPECT_NEAR(integrate(normal_grid()), 1.0, 1e-10); }

TEST(Quadrature, StandardNormalSecondMoment) {
  const auto g = normal_grid();
  EXPECT_NEAR(integrate(g, [](std::span<const double> x, double f) { return x[0] * x[0] * f; }), 1.0, 1e-8);
}

TEST(Quadrature, RadialMeasureGivesBallVolume) {
  // Indicator of the unit ball in R^3 sampled on r ∈ [0, 1].
  const auto g = GridDensity::radial_from_function(3, Axis{0.0, 1.0, 401}, [](double) { return 1.0; });
  EXPECT_NEAR(integrate(g), 4.0 / 3.0 * std::numbers::pi, 1e-12);
}

TEST(Quadrature, TwoDimensionalProductGaussian) {
  const Axis ax{-9.0, 9.0, 301};
  const auto g = GridDensity::from_function(
      {ax, ax}, [](std::span<const double> x) { return standard_normal(x[0]) * standard_normal(x[1]); });
  EXPECT_NEAR(integrate(g), 1.0, 1e-10);
  EXPECT_NEAR(radial_moment(g, 2.0), 2.0, 1e-8);
}

TEST(Quadrature, NonFiniteIntegrandThrows) {
  const GridDensity g({Axis{0.0, 1.0, 11}}, std::vector<double>(11, 1.0));
  std::vector<double> bad(11, 1.0);
  bad[4] = std::nan("");
  EXPECT_THROW(integrate(g, bad), NumericalError);
}

TEST(Quadrature, TensorRuleMatchesGridRule) {
  const std::vector<Axis> axes{Axis{-1.0, 2.0, 31}, Axis{0.0, 1.0, 21}, Axis{-2.0, 2.0, 11}};
  double sum = 0.0;
  for_each_node(axes, [&](std::span<const double> x, double w) { sum += w * x[0] * x[0] * x[1] * (1.0 + x[2]); });
  // ∫x² dx over [−1,2] = 3, ∫y dy = 1/2, ∫(1+z) dz over [−2,2] = 4.
  EXPECT_NEAR(sum, 3.0 * 0.5 * 4.0, 1e-12);
}

TEST(Gradient, LinearRampIsExactEverywhere) {
  const auto g = GridDensity::from_function({Axis{0.0, 1.0, 101}}, [](std::span<const double> x) { return x[0]; });
  const auto field = gradient(g);
  // Node 0 has f = 0 and lies outside the support.
  for (std::size_t i = 1; i < g.size(); ++i) EXPECT_NEAR(field.components[0][i], 1.0, 1e-12) << "node " << i;
}

TEST(Gradient, GaussianDerivativeSecondOrder) {
  double errors[2];
  const std::size_t nodes[2] = {2001, 4001};
  for (int k = 0; k < 2; ++k) {
    const auto g = normal_grid(nodes[k]);
    const auto field = gradient(g);
    const std::size_t at_one = (nodes[k] - 1) / 20 * 11;  // x = 1
    ASSERT_NEAR(g.coordinates(at_one)[0], 1.0, 1e-12);
    errors[k] = std::abs(field.components[0][at_one] + std::exp(-0.5) / std::sqrt(2.0 * std::numbers::pi));
  }
  EXPECT_LT(errors[1], 1e-5);
  EXPECT_NEAR(errors[0] / errors[1], 4.0, 0.2);
}

TEST(Gradient, ProductGaussianVanishesAtOrigin) {
  const Axis ax{-6.0, 6.0, 121};
  const auto g = GridDensity::from_function(
      {ax, ax}, [](std::span<const double> x) { return standard_normal(x[0]) * standard_normal(x[1]); });
  const auto field = gradient(g);
  const std::size_t origin = 60 * 121 + 60;
  EXPECT_NEAR(field.components[0][origin], 0.0, 1e-15);
  EXPECT_NEAR(field.components[1][origin], 0.0, 1e-15);
}

TEST(Gradient, SupportBoundaryUsesInteriorSide) {
  // (1 − x²)_+ sampled beyond its support: the derivative at x = 1 is −2.
  const auto g = GridDensity::from_function({Axis{-2.0, 2.0, 401}},
                                            [](std::span<const double> x) { return std::max(0.0, 1 - x[0] * x[0]); });
  const auto field = gradient(g);
  EXPECT_NEAR(field.components[0][299], -2.0 * 0.99, 1e-10);  // x = 0.99
  EXPECT_EQ(field.components[0][300], 0.0);                   // x = 1, f = 0
}

TEST(Normalize, ConstantOnInterval) {
  const auto g = normalize(GridDensity({Axis{0.0, 2.0, 21}}, std::vector<double>(21, 7.0)));
  for (double v : g.values()) EXPECT_NEAR(v, 0.5, 1e-15);
}

TEST(Normalize, CompactParabola) {
  const auto g = normalize(GridDensity::from_function(
      {Axis{-1.0, 1.0, 2001}}, [](std::span<const double> x) { return std::max(0.0, 1 - x[0] * x[0]); }));
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double x = g.coordinates(i)[0];
    EXPECT_NEAR(g.values()[i], 0.75 * std::max(0.0, 1 - x * x), 1e-10);
  }
}

TEST(Normalize, Idempotent) {
  const auto g = normal_grid();
  const auto h = normalize(normalize(g));
  const auto n = normalize(g);
  for (std::size_t i = 0; i < g.size(); ++i) EXPECT_NEAR(h.values()[i], n.values()[i], 1e-12);
}

TEST(Normalize, ZeroMassThrows) {
  EXPECT_THROW(normalize(GridDensity({Axis{0.0, 1.0, 5}}, std::vector<double>(5, 0.0))), NumericalError);
}

TEST(GridDensity, RejectsBadInput) {
  EXPECT_THROW(GridDensity({Axis{0.0, 1.0, 3}}, {1.0, -1.0, 1.0}), std::invalid_argument);
  EXPECT_THROW(GridDensity({Axis{0.0, 1.0, 3}}, {1.0, std::nan(""), 1.0}), NumericalError);
  EXPECT_THROW(GridDensity({Axis{0.0, 1.0, 3}}, {1.0, 1.0}), std::invalid_argument);
}

TEST(GridDensity, DilationPreservesMassAndScalesMoment) {
  const auto g = normal_grid();
  const auto d = g.dilated(2.5);
  EXPECT_NEAR(integrate(d), 1.0, 1e-10);
  EXPECT_NEAR(radial_moment(d, 2.0), 6.25, 1e-8);
}

TEST(GridDensity, TranslationMovesMean) {
  const auto g = normal_grid();
  const std::array<double, 1> shift{0.75};
  EXPECT_NEAR(mean(g.translated(shift))[0], 0.75, 1e-12);
}

TEST(GridDensity, JsonRoundTrip) {
  const auto g = normal_grid(101);
  const auto back = GridDensity::from_json(g.to_json());
  ASSERT_EQ(back.size(), g.size());
  for (std::size_t i = 0; i < g.size(); ++i) EXPECT_EQ(back.values()[i], g.values()[i]);
  const auto r = GridDensity::radial_from_function(3, Axis{0.0, 2.0, 11}, [](double x) { return 1.0 + x; });
  const auto rb = GridDensity::from_json(r.to_json());
  EXPECT_EQ(rb.geometry(), Geometry::radial);
  EXPECT_EQ(rb.dim(), 3);
}

TEST(UnitSphere, KnownAreas) {
  EXPECT_DOUBLE_EQ(unit_sphere_area(1), 2.0);
  EXPECT_NEAR(unit_sphere_area(2), 2.0 * std::numbers::pi, 1e-14);
  EXPECT_NEAR(unit_sphere_area(3), 4.0 * std::numbers::pi, 1e-14);
}

TEST(Numerics, RootFinding) {
  EXPECT_NEAR(find_root([](double x) { return x * x - 2.0; }, 0.0, 2.0), std::sqrt(2.0), 1e-14);
  EXPECT_THROW(find_root([](double x) { return x * x + 1.0; }, 0.0, 2.0), NumericalError);
  EXPECT_NEAR(find_root_positive([](double x) { return std::log(x / 1234.5); }, 1.0), 1234.5, 1e-9);
}

TEST(Numerics, MonotoneCubicPreservesMonotonicity) {
  std::vector<double> x{0.0, 0.1, 0.5, 0.51, 1.0}, y{0.0, 0.0, 2.0, 2.0, 10.0};
  const MonotoneCubic p(x, y);
  double prev = -1.0;
  for (int i = 0; i <= 1000; ++i) {
    const double v = p(i / 1000.0);
    EXPECT_GE(v, prev - 1e-15);
    prev = v;
  }
  for (std::size_t i = 0; i < x.size(); ++i) EXPECT_DOUBLE_EQ(p(x[i]), y[i]);
}

TEST(Numerics, SlopeFit) {
  const std::vector<double> x{1, 2, 3, 4}, y{3, 5, 7, 9};
  EXPECT_NEAR(fit_slope(x, y), 2.0, 1e-14);
}

TEST(Report, JsonCarriesVerdictAndNonFiniteValues) {
  VerificationReport r("demo");
  r.set("a", 1.5);
  r.set("b", std::numeric_limits<double>::infinity());
  r.fail("broken");
  const auto j = r.to_json();
  EXPECT_EQ(j["verdict"], "fail");
  EXPECT_EQ(j["values"]["b"], "inf");
  EXPECT_DOUBLE_EQ(r.at("a"), 1.5);
  EXPECT_THROW(r.at("missing"), std::out_of_range);
}

// Property: Simpson mass of random positive cubic splines on a uniform grid
// is exact for cubics on every panel.
TEST(QuadratureProperty, RandomCubicsAreExact) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.5, 2.0);
  for (int trial = 0; trial < 20; ++trial) {
    const double a = u(rng), b = u(rng), c = u(rng), d = u(rng);
    const auto g = GridDensity::from_function(
        {Axis{0.0, 1.0, 41}}, [&](std::span<const double> x) { return a + b * x[0] + c * x[0] * x[0] + d * std::pow(x[0], 3); });
    EXPECT_NEAR(integrate(g), a + b / 2 + c / 3 + d / 4, 1e-13);
  }
}

TEST(GridDensity, CoarsenedKeepsEveryOtherNode) {
  const auto g = normal_grid(401);
  const auto c = g.coarsened();
  ASSERT_EQ(c.size(), 201u);
  for (std::size_t i = 0; i < c.size(); ++i) EXPECT_EQ(c.values()[i], g.values()[2 * i]);
  EXPECT_NEAR(integrate(c), 1.0, 1e-8);
  const Axis ax{-5.0, 5.0, 11};
  const auto g2 = GridDensity::from_function({ax, ax}, [](std::span<const double> x) { return 20.0 + x[0] - x[1]; });
  const auto c2 = g2.coarsened();
  EXPECT_EQ(c2.size(), 36u);
  EXPECT_DOUBLE_EQ(c2.values()[7], g2.values()[2 * 11 + 2]);
  EXPECT_THROW(normal_grid(400).coarsened(), std::invalid_argument);
}
