#include <gtest/gtest.h>

#include <algorithm>
#include <boost/math/distributions/chi_squared.hpp>
#include <cmath>
#include <numbers>
#include <numeric>

#include "oracles.hpp"
#include "rdl/error.hpp"
#include "rdl/model.hpp"

namespace {

using rdl::BoundaryKind;
using rdl::LayerGeometry;
constexpr double kPi = std::numbers::pi;

TEST(TransverseMode, DirichletDirichletPi) {
  const auto mode = rdl::transverse_mode({kPi, 1.0, BoundaryKind::kDirichlet, BoundaryKind::kDirichlet});
  EXPECT_NEAR(mode.lambda0, 1.0, 1e-14);
  for (double y : {0.3, 1.0, 2.5}) EXPECT_NEAR(mode.psi0(y), std::sqrt(2.0 / kPi) * std::sin(y), 1e-14);
}

TEST(TransverseMode, NeumannNeumannIsConstant) {
  const auto mode = rdl::transverse_mode({2.0, 1.0, BoundaryKind::kNeumann, BoundaryKind::kNeumann});
  EXPECT_EQ(mode.lambda0, 0.0);
  for (double y : {0.0, 0.7, 2.0}) EXPECT_NEAR(mode.psi0(y), 1.0 / std::sqrt(2.0), 1e-15);
}

TEST(TransverseMode, DirichletNeumannQuarterWave) {
  const auto mode = rdl::transverse_mode({1.0, 1.0, BoundaryKind::kDirichlet, BoundaryKind::kNeumann});
  EXPECT_NEAR(mode.lambda0, kPi * kPi / 4.0, 1e-14);
  for (double y : {0.1, 0.5, 1.0}) EXPECT_NEAR(mode.psi0(y), std::sqrt(2.0) * std::sin(kPi * y / 2.0), 1e-14);
}

TEST(TransverseMode, SolvesTheOdeWithUnitCellNormalization) {
  for (auto [bottom, top] : {std::pair{BoundaryKind::kDirichlet, BoundaryKind::kDirichlet},
                             std::pair{BoundaryKind::kNeumann, BoundaryKind::kDirichlet},
                             std::pair{BoundaryKind::kDirichlet, BoundaryKind::kNeumann}}) {
    const LayerGeometry geom{1.7, 0.8, bottom, top};
    const auto mode = rdl::transverse_mode(geom);
    for (double y : {0.2, 0.9, 1.4}) {
      EXPECT_NEAR(-mode.psi0_second_derivative(y), mode.lambda0 * mode.psi0(y), 1e-12);
    }
    const double norm2 = rdl::oracle::romberg([&](double y) { return mode.psi0(y) * mode.psi0(y); }, 0.0, 1.7);
    EXPECT_NEAR(norm2, 1.0 / 0.8, 1e-12);
  }
}

TEST(Lambda1, ZeroCoupling) {
  const auto mode = rdl::transverse_mode({1.0, 1.0, BoundaryKind::kDirichlet, BoundaryKind::kDirichlet});
  const auto f = rdl::CouplingFunction::constant(0.0, 1.0);
  EXPECT_EQ(rdl::lambda1(rdl::Manifold::circle({0.5, 0.5}, 0.2), f, mode, 256), 0.0);
}

TEST(Lambda1, NeumannClosedForm) {
  const double d = 1.5, L = 1.2, r = 0.3, c = 0.7;
  const auto mode = rdl::transverse_mode({d, L, BoundaryKind::kNeumann, BoundaryKind::kNeumann});
  const auto f = rdl::CouplingFunction::constant(c, 1.0);
  const double value = rdl::lambda1(rdl::Manifold::circle({0.6, 0.7}, r), f, mode, 256);
  EXPECT_NEAR(value, c * 2.0 * kPi * r / (d * L), 1e-12);
}

TEST(Lambda1, DirichletMatchesBesselAndReferenceQuadrature) {
  const auto mode = rdl::transverse_mode({kPi, 1.0, BoundaryKind::kDirichlet, BoundaryKind::kDirichlet});
  const auto f = rdl::CouplingFunction::constant(1.0, 1.0);
  const double value = rdl::lambda1(rdl::Manifold::circle({0.5, kPi / 2.0}, 0.25), f, mode, 256);
  EXPECT_NEAR(value, rdl::oracle::lambda1_dirichlet_pi_bessel(0.25, 1.0), 1e-12);
  EXPECT_NEAR(value, rdl::oracle::lambda1_dirichlet_circle(kPi, 1.0, 0.5, kPi / 2.0, 0.25, 1.0), 1e-12);
  EXPECT_NEAR(value, 0.9692349036204065, 1e-12);
}

TEST(Lambda1, OffCentreDirichletCircle) {
  const auto mode = rdl::transverse_mode({1.0, 1.0, BoundaryKind::kDirichlet, BoundaryKind::kDirichlet});
  const auto f = rdl::CouplingFunction::constant(2.0, 1.0);
  const double value = rdl::lambda1(rdl::Manifold::circle({0.5, 0.4}, 0.2), f, mode, 256);
  EXPECT_NEAR(value, rdl::oracle::lambda1_dirichlet_circle(1.0, 1.0, 0.5, 0.4, 0.2, 2.0), 1e-11);
}

TEST(Lambda1, LinearInCoupling) {
  const auto mode = rdl::transverse_mode({1.0, 1.0, BoundaryKind::kDirichlet, BoundaryKind::kNeumann});
  const auto m = rdl::Manifold::circle({0.5, 0.5}, 0.3);
  const double one = rdl::lambda1(m, rdl::CouplingFunction::constant(1.0, 1.0), mode, 256);
  const double three = rdl::lambda1(m, rdl::CouplingFunction::constant(3.0, 1.0), mode, 256);
  EXPECT_NEAR(three, 3.0 * one, 1e-13);
}

TEST(Coupling, ProfileAndPolynomialInT) {
  const auto g = rdl::CouplingFunction::profile([](double y) { return 1.0 + y; }, 0.5);
  EXPECT_DOUBLE_EQ(g(0.25, 0.4), 1.25);
  EXPECT_TRUE(g.t_independent());
  const auto p = rdl::CouplingFunction::polynomial_in_t(
      {[](double) { return 2.0; }, [](double y) { return y; }}, 1.0);
  EXPECT_DOUBLE_EQ(p(3.0, 0.5), 2.0 + 1.5);
  EXPECT_FALSE(p.t_independent());
}

TEST(Lambda1, UsesTheProfileAtZeroCoupling) {
  const double d = 1.0, L = 1.0, r = 0.2;
  const auto mode = rdl::transverse_mode({d, L, BoundaryKind::kNeumann, BoundaryKind::kNeumann});
  const auto m = rdl::Manifold::circle({0.5, 0.5}, r);
  // f(y, 0) = 3 for the polynomial 3 + 5 t, so the value matches the constant case.
  const auto p = rdl::CouplingFunction::polynomial_in_t({[](double) { return 3.0; }, [](double) { return 5.0; }}, 1.0);
  EXPECT_NEAR(rdl::lambda1(m, p, mode, 256), 3.0 * 2.0 * kPi * r / (d * L), 1e-12);
}

TEST(EpsilonStar, PicksTheMinimizingEndpoint) {
  // Lambda^eta ~ Lambda0 - eta * Lambda1, minimized at eps for Lambda1 > 0 and at eps * a otherwise.
  EXPECT_DOUBLE_EQ(rdl::epsilon_star(0.3, 0.01, -1.0), 0.01);
  EXPECT_DOUBLE_EQ(rdl::epsilon_star(-0.3, 0.01, -1.0), -0.01);
  EXPECT_DOUBLE_EQ(rdl::epsilon_star(-0.3, 0.01, -0.5), -0.005);
}

TEST(EpsilonStar, ZeroLambda1Violates) {
  try {
    rdl::epsilon_star(0.0, 0.01, -1.0);
    FAIL() << "expected MainAssumptionViolated";
  } catch (const rdl::Error& e) {
    EXPECT_EQ(e.code(), rdl::ErrorCode::kMainAssumptionViolated);
  }
}

TEST(Sampling, DeterministicPerStream) {
  const auto h = rdl::Disorder::smoothed_uniform(-1.0, 42);
  EXPECT_EQ(rdl::sample_omega(h, 5, 0), rdl::sample_omega(h, 5, 0));
  EXPECT_NE(rdl::sample_omega(h, 5, 0), rdl::sample_omega(h, 5, 1));
  EXPECT_NE(rdl::sample_omega(h, 5, 0), rdl::sample_omega(h.with_seed(43), 5, 0));
}

TEST(Sampling, MeanWithinThreeStandardErrors) {
  const auto h = rdl::Disorder::smoothed_uniform(-1.0, 7);
  const auto w = rdl::sample_omega(h, 100000, 3);
  const double mean = std::accumulate(w.begin(), w.end(), 0.0) / w.size();
  const double oracle_mean = rdl::oracle::romberg([&](double t) { return t * h.density(t); }, -1.0, 1.0, 1e-10);
  const double second = rdl::oracle::romberg([&](double t) { return t * t * h.density(t); }, -1.0, 1.0, 1e-10);
  const double se = std::sqrt((second - oracle_mean * oracle_mean) / w.size());
  EXPECT_LT(std::abs(mean - oracle_mean), 3.0 * se);
}

TEST(Sampling, MinimumSitsNearTheSupportEdge) {
  for (double a : {-1.0, -0.4, 0.2}) {
    const auto h = rdl::Disorder::triangular(a, 5);
    const auto w = rdl::sample_omega(h, 100000, 1);
    const double lo = *std::min_element(w.begin(), w.end());
    EXPECT_GE(lo, a);
    EXPECT_LT(lo - a, 0.01);
    EXPECT_LE(*std::max_element(w.begin(), w.end()), 1.0);
  }
}

TEST(Sampling, ChiSquareGoodnessOfFit) {
  const auto h = rdl::Disorder::smoothed_uniform(-1.0, 11);
  constexpr int kBins = 40;
  constexpr int kDraws = 100000;
  const auto w = rdl::sample_omega(h, kDraws, 9);
  std::vector<int> counts(kBins, 0);
  for (double t : w) counts[std::min(kBins - 1, static_cast<int>((t + 1.0) / 2.0 * kBins))]++;
  double chi2 = 0.0;
  for (int b = 0; b < kBins; ++b) {
    const double lo = -1.0 + 2.0 * b / kBins, hi = lo + 2.0 / kBins;
    const double expected = kDraws * rdl::oracle::romberg([&](double t) { return h.density(t); }, lo, hi, 1e-10);
    chi2 += (counts[b] - expected) * (counts[b] - expected) / expected;
  }
  const boost::math::chi_squared dist(kBins - 1);
  EXPECT_LT(chi2, boost::math::quantile(dist, 0.99));
}

TEST(Disorder, DensityIntegratesToOne) {
  for (double a : {-1.0, -0.3, 0.5}) {
    const auto tri = rdl::Disorder::triangular(a, 1);
    const auto flat = rdl::Disorder::smoothed_uniform(a, 1);
    EXPECT_NEAR(rdl::oracle::romberg([&](double t) { return tri.density(t); }, a, 1.0, 1e-12), 1.0, 1e-9);
    EXPECT_NEAR(rdl::oracle::romberg([&](double t) { return flat.density(t); }, a, 1.0, 1e-12), 1.0, 1e-9);
    EXPECT_NEAR(tri.integral(), 1.0, 1e-12);
  }
}

TEST(Disorder, RejectsBadSupport) {
  EXPECT_THROW(rdl::Disorder::smoothed_uniform(1.2, 1), rdl::Error);
  EXPECT_THROW(rdl::Disorder::smoothed_uniform(-1.5, 1), rdl::Error);
}

TEST(PeriodicConfiguration, Examples) {
  const double one[] = {1.0};
  EXPECT_EQ(rdl::periodic_configuration(one, 1, 4, -1.0), (std::vector<double>{1, 1, 1, 1}));
  const double pair[] = {-0.5, 1.0};
  EXPECT_EQ(rdl::periodic_configuration(pair, 2, 4, -0.5), (std::vector<double>{-0.5, 1, -0.5, 1}));
  const double three[] = {0.5, -0.5, 0.25};
  EXPECT_EQ(rdl::periodic_configuration(three, 3, 7, -1.0),
            (std::vector<double>{0.5, -0.5, 0.25, 0.5, -0.5, 0.25, 0.5}));
}

TEST(PeriodicConfiguration, RejectsValuesOutsideSupport) {
  const double pattern[] = {-0.8};
  try {
    rdl::periodic_configuration(pattern, 1, 3, -0.5);
    FAIL();
  } catch (const rdl::Error& e) {
    EXPECT_EQ(e.code(), rdl::ErrorCode::kValueOutOfSupport);
  }
}

TEST(Manifold, CircleMustStayInsideTheCell) {
  const LayerGeometry geom{1.0, 1.0, BoundaryKind::kDirichlet, BoundaryKind::kDirichlet};
  EXPECT_NO_THROW(rdl::Manifold::circle({0.5, 0.5}, 0.25).validate_in_cell(geom));
  EXPECT_THROW(rdl::Manifold::circle({0.5, 0.5}, 0.6).validate_in_cell(geom), rdl::Error);
  EXPECT_NEAR(rdl::Manifold::circle({0.5, 0.5}, 0.25).length(), 2.0 * kPi * 0.25, 1e-12);
}

}  // namespace
