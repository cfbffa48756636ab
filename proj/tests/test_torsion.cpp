#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "support/oracles.hpp"
#include "torsionlab/torsion.hpp"

using namespace torsionlab;

TEST(TorsionFinite, RotationIsOmega) {
  oracle::Rng rng(21);
  for (int i = 0; i < 20; ++i) {
    const double w = rng.uniform(-4, 4);
    const auto sys = builtin::rotation(w, rng.point(-1, 1, -1, 1));
    const int n = rng.integer(1, 10);
    const TorsionResult r = torsion_finite(sys, rng.point(-2, 2, -2, 2), rng.unit_vector(), n);
    EXPECT_NEAR(r.value, w, 1e-12);
    EXPECT_EQ(r.horizon_n, n);
  }
}

TEST(TorsionFinite, ShearClosedForm) {
  const TorsionResult r = torsion_finite(builtin::shear(), {3, -1}, {0, 1}, 1, {1, 0});
  EXPECT_NEAR(r.value, -kPi / 4, 1e-15);
  for (int n : {2, 7, 30}) {
    EXPECT_NEAR(torsion_finite(builtin::shear(), {0, 0}, {0, 1}, n).value, oracle::shear_torsion(n),
                1e-14);
  }
}

TEST(TorsionFinite, ResultInvariants) {
  const TorsionResult r = torsion_finite(builtin::standard_map(2.0), {0.4, 0.1}, {1, 2}, 13);
  EXPECT_EQ(r.value, r.total_winding / 13);
  EXPECT_EQ(r.trace.end() - r.trace.start(), r.total_winding);
  EXPECT_EQ(r.trace.times.front(), 0.0);
  EXPECT_EQ(r.trace.times.back(), 13.0);
  EXPECT_DOUBLE_EQ(r.trace.start(), oriented_angle({1, 0}, {1, 2}));
  for (std::size_t k = 1; k < r.trace.angles.size(); ++k) {
    EXPECT_LT(std::abs(r.trace.angles[k] - r.trace.angles[k - 1]), kPi);
  }
}

TEST(TorsionFinite, HyperbolicFixedPointNearMinusPi) {
  const TorsionResult r = torsion_finite(builtin::standard_map(5.0), {0, 0}, {0, 1}, 200, {0, 1});
  EXPECT_GT(r.value, -kPi);
  EXPECT_LT(r.value, 0.0);
  EXPECT_LE(std::abs(r.value + kPi), 0.05);
}

TEST(TorsionFinite, FixedPointMatchesMatrixPowerOracle) {
  const double lambda = 5.0;
  auto family = [lambda](double t) { return oracle::lecalvez_jacobian_at_fixed(lambda, t); };
  for (int n : {1, 3, 40}) {
    const TorsionResult r = torsion_finite(builtin::standard_map(lambda), {0, 0}, {0, 1}, n, {0, 1});
    EXPECT_NEAR(r.total_winding, oracle::fixed_point_winding(family, {0, 1}, {0, 1}, n), 1e-9);
  }
  // (pi, 0) is the other fixed point; cos x = -1 there.
  auto family2 = [lambda](double t) { return oracle::lecalvez_jacobian_at_fixed(lambda, t, -1.0); };
  const TorsionResult r2 = torsion_finite(builtin::standard_map(lambda), {kPi, 0}, {1, 0}, 10);
  EXPECT_NEAR(r2.total_winding, oracle::fixed_point_winding(family2, {1, 0}, {1, 0}, 10), 1e-9);
}

TEST(TorsionFinite, AgreesWithDenseOracleOnRandomOrbits) {
  oracle::Rng rng(22);
  for (int i = 0; i < 40; ++i) {
    const auto sys = builtin::standard_map(rng.uniform(0.2, 7), i % 2 ? "sequential" : "lecalvez");
    const Vec2 z = rng.point(0, kTwoPi, -3, 3), xi = rng.unit_vector();
    const int n = rng.integer(1, 15);
    const TorsionResult r = torsion_finite(sys, z, xi, n);
    const oracle::DenseLift ref = oracle::dense_torsion(sys, z, xi, n, {1, 0});
    ASSERT_LT(ref.max_step, kPi / 2);
    EXPECT_NEAR(r.total_winding, ref.winding, 1e-9);
  }
}

TEST(TorsionFinite, ConstantFieldInvariance) {
  oracle::Rng rng(23);
  for (int i = 0; i < 50; ++i) {
    const auto sys = builtin::standard_map(rng.uniform(0.5, 6));
    const Vec2 z = rng.point(0, kTwoPi, -3, 3), xi = rng.unit_vector();
    const int n = rng.integer(1, 20);
    const double a = torsion_finite(sys, z, xi, n, {1, 0}).value;
    const double b = torsion_finite(sys, z, xi, n, rng.unit_vector()).value;
    EXPECT_NEAR(a, b, 1e-9);
  }
}

TEST(TorsionFinite, ScaleInvariance) {
  oracle::Rng rng(24);
  for (int i = 0; i < 50; ++i) {
    const auto sys = builtin::torus_twisted({0.3, 0.2}, rng.uniform(0, 1));
    const Vec2 z = rng.point(0, kTwoPi, 0, kTwoPi), xi = rng.unit_vector();
    const int n = rng.integer(1, 20);
    EXPECT_NEAR(torsion_finite(sys, z, xi, n).value,
                torsion_finite(sys, z, rng.uniform(0.001, 1000) * xi, n).value, 1e-12);
  }
}

TEST(TorsionFinite, Errors) {
  try {
    torsion_finite(builtin::identity(), {0, 0}, {0, 0}, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::ZeroVector);
  }
  EXPECT_THROW(torsion_finite(builtin::identity(), {0, 0}, {1, 0}, 0), Error);
  EXPECT_THROW(torsion_finite(builtin::identity(), {0, 0}, {1, 0}, 1, {0, 0}), Error);
  // A family whose differential collapses.
  IsotopySystem degenerate = builtin::identity();
  degenerate.unit = [](Vec2 z, double t) { return IsotopyValue{z, Mat2{1 - t, 0, 0, 1}}; };
  try {
    torsion_finite(degenerate, {0, 0}, {1, 0}, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::DegenerateDifferential);
  }
  try {
    torsion_finite(builtin::translation({1e149, 0}), {0, 0}, {1, 0}, 30);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NumericOverflow);
  }
}

TEST(TorsionAsymptotic, RotationIsConstant) {
  const AsymptoticSeries s = torsion_asymptotic(builtin::rotation(1.3), {1, 1}, {0, 1}, 50);
  ASSERT_EQ(s.values.size(), 50u);
  for (const auto& [n, v] : s.values) EXPECT_NEAR(v, 1.3, 1e-12);
  EXPECT_LE(s.diagnostic, 1e-12);
}

TEST(TorsionAsymptotic, StandardMapFixedPointConverges) {
  const AsymptoticSeries s =
      torsion_asymptotic(builtin::standard_map(5.0), {0, 0}, {0, 1}, 400, {0, 1});
  EXPECT_LE(s.diagnostic, 0.02);
  EXPECT_LE(std::abs(s.values.back().second + kPi), 0.05);
}

TEST(TorsionAsymptotic, ShearClosedFormAndShrinkingDiagnostic) {
  const AsymptoticSeries s = torsion_asymptotic(builtin::shear(), {0, 0}, {0, 1}, 100);
  for (const auto& [n, v] : s.values) EXPECT_NEAR(v, oracle::shear_torsion(n), 1e-13);
  const AsymptoticSeries shorter = torsion_asymptotic(builtin::shear(), {0, 0}, {0, 1}, 25);
  EXPECT_LT(s.diagnostic, shorter.diagnostic);
  EXPECT_LE(s.diagnostic, 2 * (kPi / 2) / 75);
}

TEST(TorsionAsymptotic, MatchesFiniteValuesFromOneTrace) {
  const auto sys = builtin::standard_map(1.7, "sequential");
  const AsymptoticSeries s = torsion_asymptotic(sys, {1, 0.5}, {1, 1}, 30);
  for (int n : {1, 7, 30}) {
    EXPECT_NEAR(s.values[n - 1].second, torsion_finite(sys, {1, 0.5}, {1, 1}, n).value, 1e-12);
  }
  EXPECT_THROW(torsion_asymptotic(sys, {0, 0}, {1, 0}, 1), Error);
}

TEST(VectorIndependence, ColinearAndRotation) {
  EXPECT_EQ(vector_independence_gap(builtin::standard_map(3.0), {1, 1}, {1, 2}, {2, 4}, 9), 0.0);
  EXPECT_NEAR(vector_independence_gap(builtin::rotation(0.4), {1, 1}, {1, 2}, {-3, 1}, 9), 0.0,
              1e-12);
}

TEST(VectorIndependence, StandardMapBelowPiOverN) {
  EXPECT_LT(vector_independence_gap(builtin::standard_map(5.0), {0.3, 0.7}, {0, 1}, {1, 0}, 25),
            kPi / 25);
}

TEST(VectorIndependence, RandomDrawsStayBelowPiOverN) {
  oracle::Rng rng(25);
  for (int i = 0; i < 150; ++i) {
    const auto sys = builtin::standard_map(rng.uniform(0.1, 8));
    const int n = rng.integer(1, 50);
    EXPECT_LT(vector_independence_gap(sys, rng.point(0, kTwoPi, -3, 3), rng.unit_vector(),
                                      rng.unit_vector(), n),
              kPi / n);
  }
}

TEST(WGrid, IdentitySystemIsS) {
  const WGrid g = w_grid(builtin::identity(), {0.2, 0.1}, {0.0, 0.5, 3.0}, 16);
  for (std::size_t i = 0; i < g.s_values.size(); ++i) {
    for (std::size_t j = 0; j < g.t_values.size(); ++j) EXPECT_NEAR(g.W[i][j], g.s_values[i], 1e-12);
  }
}

TEST(WGrid, RotationAddsOmegaT) {
  const double w = 2.5;
  const WGrid g = w_grid(builtin::rotation(w), {0, 0}, {0.0, 0.25, 1.0, 4.0}, 32);
  for (std::size_t i = 0; i < g.s_values.size(); ++i) {
    for (std::size_t j = 0; j < g.t_values.size(); ++j) {
      EXPECT_NEAR(g.W[i][j], g.s_values[i] + w * g.t_values[j], 1e-12);
    }
  }
}

TEST(WGrid, StandardMapStructuralIdentities) {
  const WGrid g = w_grid(builtin::standard_map(5.0), {0, 0}, {0.0, 0.5, 1.0}, 64);
  const WGridReport r = check_wgrid(g);
  EXPECT_LE(r.identity_error, 1e-9);
  EXPECT_GT(r.min_increment, 0.0);
  EXPECT_LE(r.equivariance_error, 1e-9);
  // The anchor (s = 0) column is the lifted angle of DF_t(z) X.
  const std::size_t s0 = g.s_values.size() / 2;
  EXPECT_EQ(g.s_values[s0], 0.0);
  EXPECT_EQ(g.W[s0][0], 0.0);
}

TEST(WGrid, AnchorColumnMatchesTorsionTrace) {
  const auto sys = builtin::standard_map(3.0);
  const Vec2 z{0.9, -0.4};
  const WGrid g = w_grid(sys, z, {2.0, 0.0, 1.0}, 8);
  const TorsionResult r = torsion_finite(sys, z, {1, 0}, 2);
  EXPECT_NEAR(g.W[4][0], r.total_winding, 1e-9);
}

TEST(WGrid, AllBuiltinsSatisfyIdentities) {
  oracle::Rng rng(26);
  const std::vector<IsotopySystem> systems{
      builtin::identity(), builtin::rotation(1.1), builtin::translation({1, 2}), builtin::shear(),
      builtin::standard_map(4.0, "sequential"), builtin::torus_translationlike({1, 0.5}),
      builtin::torus_twisted({0.3, 0.2}, 0.4)};
  for (const auto& sys : systems) {
    const WGrid g = w_grid(sys, rng.point(0, 3, -1, 1), {0.0, 0.25, 0.5, 1.0, 1.5}, 64);
    const WGridReport r = check_wgrid(g);
    EXPECT_LE(r.identity_error, 1e-9) << sys.name;
    EXPECT_GT(r.min_increment, 0.0) << sys.name;
    EXPECT_LE(r.equivariance_error, 1e-9) << sys.name;
  }
}

TEST(WGrid, Preconditions) {
  EXPECT_THROW(w_grid(builtin::identity(), {0, 0}, {0.0}, 6), Error);
  EXPECT_THROW(w_grid(builtin::identity(), {0, 0}, {0.0}, 9), Error);
  EXPECT_THROW(w_grid(builtin::identity(), {0, 0}, {-1.0}, 8), Error);
}
