#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "qfisher/grid.hpp"
#include "qfisher/info_measures.hpp"
#include "qfisher/qgaussian.hpp"

using namespace qfisher;

namespace {
constexpr double pi = std::numbers::pi;
}

TEST(QGaussianParams, RejectsInvalidIndices) {
  EXPECT_THROW(QGaussianParams(0.0, 2.0, 1.0, 1), std::invalid_argument);
  EXPECT_THROW(QGaussianParams(1.5, 1.0, 1.0, 1), std::invalid_argument);
  EXPECT_THROW(QGaussianParams(1.5, 2.0, 0.0, 1), std::invalid_argument);
  EXPECT_THROW(QGaussianParams(1.5, 2.0, 1.0, 0), std::invalid_argument);
  // q < 1 needs α/(1−q) > n: α = 2, q = 0.2 gives 2.5 > 1 but fails in 3-D.
  EXPECT_NO_THROW(QGaussianParams(0.2, 2.0, 1.0, 1));
  EXPECT_THROW(QGaussianParams(0.2, 2.0, 1.0, 3), std::invalid_argument);
}

TEST(QGaussianParams, SupportRadius) {
  EXPECT_NEAR(QGaussianParams(2.0, 2.0, 1.0, 1).support_radius(), 1.0, 1e-15);
  EXPECT_NEAR(QGaussianParams(1.5, 2.0, 1.0, 1).support_radius(), std::sqrt(2.0), 1e-15);
  EXPECT_TRUE(std::isinf(QGaussianParams(1.0, 2.0, 1.0, 1).support_radius()));
  EXPECT_TRUE(std::isinf(QGaussianParams(0.5, 2.0, 1.0, 1).support_radius()));
}

TEST(QGaussianNormalization, OracleValues) {
  EXPECT_NEAR(normalization({1.5, 2.0, 1.0, 1}), 1.5084944665313014, 1e-13);
  EXPECT_NEAR(normalization({0.5, 2.0, 1.0, 1}), 2.2214414690791831, 1e-13);
  EXPECT_NEAR(normalization({2.0, 3.0, 1.0, 1}), 1.5, 1e-13);
  EXPECT_NEAR(normalization({2.0, 2.0, 1.0, 3}), 1.6755160819145564, 1e-13);
  EXPECT_NEAR(normalization({1.0, 2.0, 0.5, 1}), std::sqrt(2.0 * pi), 1e-13);
}

TEST(QGaussianNormalization, ClosedFormMatchesQuadrature) {
  for (double q : {0.4, 0.8, 1.0, 1.3, 2.0, 3.0}) {
    for (double alpha : {1.5, 2.0, 3.0}) {
      for (int dim : {1, 2, 3}) {
        const double nq = (q < 1.0) ? alpha / (1.0 - q) : 1e9;
        if (nq <= dim + alpha) continue;  // keep the moment finite too
        const QGaussianParams p(q, alpha, 0.7, dim);
        EXPECT_NEAR(normalization(p) / normalization_quadrature(p), 1.0, 1e-9)
            << "q=" << q << " alpha=" << alpha << " n=" << dim;
        EXPECT_NEAR(moment_alpha(p) / moment_alpha_quadrature(p), 1.0, 1e-9)
            << "q=" << q << " alpha=" << alpha << " n=" << dim;
      }
    }
  }
}

TEST(QGaussianMoment, OracleAndGaussianCases) {
  EXPECT_NEAR(moment_alpha({0.5, 2.0, 1.0, 1}), 2.0, 1e-12);
  // Standard normal: γ = 1/2, E X² = 1 per coordinate.
  EXPECT_NEAR(moment_alpha({1.0, 2.0, 0.5, 1}), 1.0, 1e-12);
  EXPECT_NEAR(moment_alpha({1.0, 2.0, 0.5, 3}), 3.0, 1e-12);
  // Compact parabola 3/4(1 − x²): E X² = 1/5.
  EXPECT_NEAR(moment_alpha({2.0, 2.0, 1.0, 1}), 0.2, 1e-13);
}

TEST(QGaussianMoment, DivergentTailThrows) {
  // q = 0.4, α = 2 in 2-D is integrable but its tail r^{−10/3} has no second moment.
  EXPECT_THROW(moment_alpha({0.4, 2.0, 1.0, 2}), DivergenceError);
}

TEST(QGaussianPdf, IntegratesToOneOnGrid) {
  for (double q : {0.6, 1.0, 1.5, 2.0}) {
    for (int dim : {1, 2, 3}) {
      const QGaussianParams p(q, 2.0, 1.0, dim);
      if (q < 1.0 && dim > 1) continue;  // heavy tail needs a huge box
      const double tail = q < 1.0 ? 1e-9 : 1e-13;
      const auto g = to_grid(p, dim == 2 ? 401 : 40001, tail);
      EXPECT_NEAR(integrate(g), 1.0, dim == 2 ? 1e-6 : 1e-8) << "q=" << q << " n=" << dim;
    }
  }
}

TEST(QGaussianPdf, RadialAndCartesianAgree) {
  const QGaussianParams p(1.5, 2.0, 1.0, 2);
  const std::array<double, 2> x{0.3, -0.4};
  EXPECT_NEAR(pdf(p, x), pdf_radial(p, 0.5), 1e-15);
  EXPECT_EQ(pdf_radial(p, 2.0), 0.0);
}

TEST(QGaussianInformation, GeneratingFunctionOracle) {
  EXPECT_NEAR(information_generating({1.0, 2.0, 0.5, 1}, 2.0), 0.28209479177387814, 1e-14);
  EXPECT_NEAR(information_generating({2.0, 2.0, 1.0, 1}, 2.0), 0.6, 1e-14);
  EXPECT_NEAR(shannon_entropy_exponential({1.0, 2.0, 0.5, 1}), 1.4189385332046727, 1e-14);
}

TEST(QGaussianInformation, GeneratingFunctionMatchesGrid) {
  for (double q : {0.7, 1.0, 1.5, 2.0}) {
    const QGaussianParams p(q, 2.0, 1.0, 1);
    for (double s : {0.8, 1.5, 2.0}) {
      EXPECT_NEAR(m_q(to_grid(p, 8001), s) / information_generating(p, s), 1.0, 1e-6)
          << "q=" << q << " s=" << s;
    }
  }
}

TEST(QGaussianSampler, RadiusQuantileInvertsCdf) {
  const QGaussianParams p(1.5, 2.0, 1.0, 3);
  const RadialSampler s(p);
  for (double u : {0.05, 0.25, 0.5, 0.75, 0.95}) EXPECT_NEAR(radial_cdf(p, s.radius(u)), u, 1e-6);
}

TEST(QGaussianSampler, DeterministicGivenSeed) {
  const QGaussianParams p(1.0, 2.0, 0.5, 2);
  const auto a = sample(p, 42, 100);
  const auto b = sample(p, 42, 100);
  const auto c = sample(p, 43, 100);
  EXPECT_EQ(a.coords, b.coords);
  EXPECT_NE(a.coords, c.coords);
}

TEST(QGaussianSampler, SampleMomentMatchesClosedForm) {
  const QGaussianParams p(1.5, 2.0, 1.0, 2);
  const auto pts = sample(p, 7, 200000);
  double sum = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) sum += pts[i][0] * pts[i][0] + pts[i][1] * pts[i][1];
  EXPECT_NEAR(sum / static_cast<double>(pts.size()) / moment_alpha(p), 1.0, 1e-2);
}

TEST(QGaussianSampler, CompactSupportRespected) {
  const QGaussianParams p(2.0, 2.0, 1.0, 1);
  const auto pts = sample(p, 3, 20000);
  for (std::size_t i = 0; i < pts.size(); ++i) EXPECT_LE(std::abs(pts[i][0]), 1.0 + 1e-12);
}

TEST(DiffusionParams, DerivedIndices) {
  const DiffusionParams heat(1.0, 2.0, 1);
  EXPECT_DOUBLE_EQ(heat.q(), 1.0);
  EXPECT_DOUBLE_EQ(heat.delta(), 2.0);
  EXPECT_DOUBLE_EQ(heat.exponential_rate(), 0.25);
  const DiffusionParams pme(2.0, 2.0, 1);
  EXPECT_DOUBLE_EQ(pme.q(), 2.0);
  EXPECT_DOUBLE_EQ(pme.delta(), 3.0);
  EXPECT_NEAR(pme.k(), 1.0 / 12.0, 1e-15);
  EXPECT_THROW(DiffusionParams(1.0, 1.0, 1), std::invalid_argument);
  EXPECT_THROW(DiffusionParams(0.1, 2.0, 3), std::invalid_argument);
}

TEST(Barenblatt, MassConstantsMatchOracle) {
  EXPECT_NEAR(barenblatt_mass_constant({2.0, 2.0, 1}), 0.3605623925768521, 1e-12);
  EXPECT_NEAR(barenblatt_mass_constant({1.0, 3.0, 1}), 0.66469321610593437, 1e-12);
  const DiffusionParams heat(1.0, 2.0, 1);
  const double C = barenblatt_mass_constant(heat);
  EXPECT_NEAR(barenblatt(heat, C, 0.0, 1.0), 0.28209479177387814, 1e-12);
}

TEST(Barenblatt, HeatKernelAtAllTimes) {
  const DiffusionParams heat(1.0, 2.0, 1);
  const double C = barenblatt_mass_constant(heat);
  for (double t : {0.25, 1.0, 3.0}) {
    for (double x : {0.0, 0.7, 2.0}) {
      EXPECT_NEAR(barenblatt(heat, C, x, t), std::exp(-x * x / (4 * t)) / std::sqrt(4 * pi * t), 1e-12);
    }
  }
}

TEST(Barenblatt, UnitMassAtEveryTime) {
  for (const DiffusionParams d : {DiffusionParams(2.0, 2.0, 1), DiffusionParams(1.0, 3.0, 1), DiffusionParams(1.5, 2.0, 3)}) {
    const double C = barenblatt_mass_constant(d);
    EXPECT_NEAR(barenblatt_mass(d, C), 1.0, 1e-12);
    for (double t : {0.5, 2.0}) EXPECT_NEAR(integrate(to_grid(barenblatt_as_qgaussian(d, C, t), 4001)), 1.0, 1e-8);
  }
}

TEST(Barenblatt, CoincidesWithQGaussian) {
  const DiffusionParams d(2.0, 2.0, 1);
  const double C = barenblatt_mass_constant(d);
  const auto G = barenblatt_as_qgaussian(d, C, 1.7);
  EXPECT_DOUBLE_EQ(G.q(), d.q());
  for (double x : {0.0, 0.3, 0.9, 1.4}) EXPECT_NEAR(pdf_radial(G, x), barenblatt(d, C, x, 1.7), 1e-12);
  EXPECT_THROW(barenblatt(d, C, 0.0, 0.0), std::invalid_argument);
}

// Property: G maximizes S_q among densities with the same α-moment. Random
// bumps are applied, the moment is restored by dilation, and S_q must drop.
TEST(QGaussianProperty, MaximumEntropyUnderFixedMoment) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> coef(-1.0, 1.0);
  for (double q : {1.0, 1.5, 2.0}) {
    const QGaussianParams p(q, 2.0, 1.0, 1);
    const auto G = to_grid(p, 4001);
    const double target = moment_alpha(p);
    const double s_g = tsallis_entropy(G, q);
    const double w = q > 1.0 ? 0.8 * p.support_radius() : 3.0;
    for (int trial = 0; trial < 10; ++trial) {
      const double c1 = coef(rng), c2 = coef(rng), s1 = coef(rng);
      std::vector<double> v(G.size());
      for (std::size_t i = 0; i < G.size(); ++i) {
        const double x = G.coordinates(i)[0], u = x / w;
        const double bump = std::abs(u) < 1 ? std::pow(1 - u * u, 3) * (c1 * std::cos(pi * u) + c2 * std::cos(2 * pi * u) + s1 * std::sin(pi * u)) : 0.0;
        v[i] = G.values()[i] * (1.0 + 0.15 * bump / 3.0);
      }
      auto f = normalize(G.with_values(std::move(v)));
      const double ratio = std::sqrt(target / radial_moment(f, 2.0));
      f = f.dilated(ratio);
      ASSERT_NEAR(radial_moment(f, 2.0), target, 1e-8);
      EXPECT_LT(tsallis_entropy(f, q), s_g + 1e-9) << "q=" << q << " trial " << trial;
    }
  }
}
