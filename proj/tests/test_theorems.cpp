#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "support/oracles.hpp"
#include "torsionlab/theorems.hpp"

using namespace torsionlab;

TEST(LocateTorsionPoint, RotationSolvesEverywhere) {
  const SegmentScan s = locate_torsion_point(builtin::rotation(0.7), {0, 0}, {1, 2}, 3);
  ASSERT_TRUE(s.located_s.has_value());
  EXPECT_EQ(*s.located_s, 0.0);
  EXPECT_LE(s.residual, 1e-10);
  EXPECT_NEAR(s.target_l, 0.7, 1e-12);
}

TEST(LocateTorsionPoint, ShearLinearCase) {
  const SegmentScan s = locate_torsion_point(builtin::shear(), {0, 0}, {0, 1}, 1);
  ASSERT_TRUE(s.located_s.has_value());
  EXPECT_NEAR(s.target_l, -kPi / 4, 1e-15);
  EXPECT_LE(s.residual, 1e-10);
}

TEST(LocateTorsionPoint, StandardMapExample) {
  const auto sys = builtin::standard_map(5.0);
  const Vec2 x{0.2, -0.4}, y{1.1, 0.9};
  const SegmentScan s = locate_torsion_point(sys, x, y, 3);
  ASSERT_TRUE(s.located_s.has_value());
  EXPECT_LE(s.residual, 1e-8);
  const double t = torsion_finite(sys, s.point(*s.located_s), y - x, 3).value;
  EXPECT_NEAR(std::abs(t - s.target_l), s.residual, 1e-15);
}

TEST(LocateTorsionPoint, ScanTableCoversSegment) {
  const SegmentScan s = locate_torsion_point(builtin::standard_map(1.0), {0, 0}, {1, 1}, 2);
  ASSERT_GE(s.samples.size(), 64u);
  EXPECT_EQ(s.samples.front().s, 0.0);
  EXPECT_EQ(s.samples.back().s, 1.0);
  for (std::size_t k = 1; k < s.samples.size(); ++k) EXPECT_LT(s.samples[k - 1].s, s.samples[k].s);
  EXPECT_EQ(s.point(0.0), (Vec2{0, 0}));
  EXPECT_EQ(s.point(1.0), (Vec2{1, 1}));
}

TEST(LocateTorsionPoint, RandomSegmentsAlwaysLocate) {
  oracle::Rng rng(41);
  for (double lambda : {1.0, 5.0}) {
    const auto sys = builtin::standard_map(lambda);
    for (int i = 0; i < 20; ++i) {
      const Vec2 x = rng.point(0, kTwoPi, -3, 3), y = rng.point(0, kTwoPi, -3, 3);
      for (int n : {1, 2, 5, 10}) {
        const SegmentScan s = locate_torsion_point(sys, x, y, n);
        ASSERT_TRUE(s.located_s.has_value()) << "lambda=" << lambda << " n=" << n;
        EXPECT_LE(s.residual, 1e-8);
      }
    }
  }
}

TEST(LocateTorsionPoint, AbsentRootIsReportedAsData) {
  // Not an isotopy (the differential spins while points stay put), so the
  // theorem does not apply: torsion is 2 pi and linking 0 everywhere.
  IsotopySystem sys = builtin::translation({0, 0});
  sys.unit = [](Vec2 z, double t) {
    return IsotopyValue{z, Mat2::rotation(kTwoPi * t)};
  };
  const SegmentScan s = locate_torsion_point(sys, {0, 0}, {1, 0}, 1);
  EXPECT_FALSE(s.located_s.has_value());
  EXPECT_EQ(s.refinement_levels, ScanOptions{}.max_refinements);
  EXPECT_NEAR(s.residual, kTwoPi, 1e-9);
}

TEST(LocateTorsionPoint, Preconditions) {
  EXPECT_THROW(locate_torsion_point(builtin::shear(), {1, 1}, {1, 1}, 1), Error);
  EXPECT_THROW(locate_torsion_point(builtin::shear(), {0, 0}, {1, 1}, 1, {8, 1e-8}), Error);
  EXPECT_THROW(locate_torsion_point(builtin::shear(), {0, 0}, {1, 1}, 1, {64, 0.0}), Error);
}

TEST(ScanContinuity, JumpsShrinkUnderRefinement) {
  const auto sys = builtin::standard_map(2.0);
  const Vec2 x{0.5, -1.0}, y{2.0, 1.0};
  auto max_jump = [&](int count) {
    double prev = torsion_finite(sys, x, y - x, 3).value, jump = 0.0;
    for (int k = 1; k < count; ++k) {
      const double s = static_cast<double>(k) / (count - 1);
      const double v = torsion_finite(sys, s * y + (1 - s) * x, y - x, 3).value;
      jump = std::max(jump, std::abs(v - prev));
      prev = v;
    }
    return jump;
  };
  const double j1 = max_jump(64), j2 = max_jump(256), j3 = max_jump(1024);
  EXPECT_LT(j2, j1);
  EXPECT_LT(j3, j2);
}

TEST(TimeNReduction, ReparametrizedSingleUnit) {
  oracle::Rng rng(42);
  for (int i = 0; i < 10; ++i) {
    const auto sys = builtin::standard_map(rng.uniform(0.5, 5));
    const int n = rng.integer(2, 8);
    const Vec2 z = rng.point(0, kTwoPi, -3, 3), xi = rng.unit_vector();
    const IsotopySystem g = reparametrize(sys, n);
    // One unit of G holds n units of F; sample it at n times the density.
    RefinementPolicy dense;
    dense.steps_per_unit = 64 * n;
    const double one_unit = torsion_finite(g, z, xi, 1, {1, 0}, dense).total_winding;
    EXPECT_NEAR(torsion_finite(sys, z, xi, n).value, one_unit / n, 1e-10);
  }
}

TEST(IsotopyIndependence, StandardMapVariants) {
  oracle::Rng rng(43);
  std::vector<TangentSample> sample;
  for (int i = 0; i < 100; ++i) sample.push_back({rng.point(0, kTwoPi, -3, 3), rng.unit_vector()});
  const auto a = builtin::standard_map(3.0, "lecalvez"), b = builtin::standard_map(3.0, "sequential");
  EXPECT_LE(isotopy_independence_check(a, b, sample), 1e-8);
  EXPECT_EQ(isotopy_independence_check(a, a, sample), 0.0);
}

TEST(IsotopyIndependence, LoopOnThePlaneShiftsByTwoPi) {
  const auto a = builtin::standard_map(3.0);
  const IsotopySystem b = compose_with_loop(a, {0.5, 0.5});
  const std::vector<TangentSample> sample{{{0.1, 0.2}, {1, 0}}, {{2.0, -1.0}, {0.3, 0.8}}};
  EXPECT_NEAR(isotopy_independence_check(a, b, sample), kTwoPi, 1e-9);
}

TEST(IsotopyIndependence, MismatchedMapsAreRejected) {
  const std::vector<TangentSample> sample{{{0.1, 0.2}, {1, 0}}};
  try {
    isotopy_independence_check(builtin::standard_map(3.0), builtin::standard_map(3.1), sample);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::VariantMismatch);
  }
}

TEST(Crovisier, ShearSingleStep) {
  const CrovisierAngles c = crovisier_angles(builtin::shear(), {0, 0}, {0, 1});
  EXPECT_EQ(c.theta0, 0.0);
  EXPECT_NEAR(c.theta1, -kPi / 4, 1e-15);
  EXPECT_NEAR(crovisier_theta_n(builtin::shear(), {0, 0}, {0, 1}, 1), -kPi / 4, 1e-15);
  EXPECT_LE(crovisier_equivalence_gap(builtin::shear(), {0, 0}, {0, 1}, 1), 1e-12);
}

TEST(Crovisier, StandardMapFixedPointEqualsTorsionOne) {
  const auto sys = builtin::standard_map(5.0);
  EXPECT_NEAR(crovisier_theta_n(sys, {0, 0}, {0, 1}, 1),
              torsion_finite(sys, {0, 0}, {0, 1}, 1, {0, 1}).value, 1e-12);
}

TEST(Crovisier, RandomEquivalenceAndIntervals) {
  oracle::Rng rng(44);
  for (double lambda : {0.5, 2.0, 5.0}) {
    const auto sys = builtin::standard_map(lambda);
    for (int i = 0; i < 50; ++i) {
      const Vec2 z = rng.point(0, kTwoPi, -3, 3), xi = rng.unit_vector();
      const int n = rng.integer(1, 20);
      EXPECT_LE(crovisier_equivalence_gap(sys, z, xi, n), 1e-9);
      for (const CrovisierAngles& c : crovisier_summands(sys, z, xi, n)) {
        EXPECT_GT(c.theta0, -kTwoPi);
        EXPECT_LE(c.theta0, 0.0);
        EXPECT_GT(c.beta, -kTwoPi);
        EXPECT_LE(c.beta, 0.0);
        EXPECT_GT(c.theta1, c.beta - kTwoPi);
        EXPECT_LE(c.theta1, c.beta);
        EXPECT_DOUBLE_EQ(c.theta, c.theta1 - c.theta0);
      }
    }
  }
}

TEST(Crovisier, NotTwistSystemsAreRejected) {
  for (const auto& sys : {builtin::rotation(1.0), builtin::shear(-1.0)}) {
    try {
      crovisier_theta_n(sys, {0, 0}, {0, 1}, 1);
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::NotTwist);
    }
  }
  EXPECT_THROW(crovisier_theta_n(builtin::shear(), {0, 0}, {0, 1}, 0), Error);
}

TEST(TwistSweep, StandardMapsStayInsideBounds) {
  oracle::Rng rng(45);
  std::vector<Vec2> points(100);
  for (Vec2& p : points) p = rng.point(0, kTwoPi, -3, 3);
  const std::vector<int> n_list{1, 5, 25};
  for (double lambda : {0.5, 7.0}) {
    const TwistSweepReport r = twist_bound_sweep(builtin::standard_map(lambda), points, n_list);
    EXPECT_TRUE(r.pass) << lambda;
    EXPECT_TRUE(r.twist.positive());
    ASSERT_EQ(r.per_n.size(), 3u);
    for (const SweepExtrema& e : r.per_n) {
      EXPECT_GT(e.min, -kPi);
      EXPECT_LT(e.max, 0.0);
    }
  }
}

TEST(TwistSweep, ShearAndNegativeShear) {
  const std::vector<Vec2> points{{0, 0}, {1, 2}, {-3, 5}};
  const std::vector<int> one{1};
  const TwistSweepReport r = twist_bound_sweep(builtin::shear(), points, one);
  for (const SweepRow& row : r.rows) EXPECT_NEAR(row.value, -kPi / 4, 1e-15);
  EXPECT_TRUE(r.pass);
  const TwistSweepReport bad = twist_bound_sweep(builtin::shear(-1.0), points, one);
  EXPECT_FALSE(bad.pass);
  EXPECT_FALSE(bad.twist.positive());
}

TEST(TwistSweep, ParallelRunIsIdentical) {
  oracle::Rng rng(46);
  std::vector<Vec2> points(40);
  for (Vec2& p : points) p = rng.point(0, kTwoPi, -3, 3);
  const std::vector<int> n_list{1, 3, 10};
  const auto sys = builtin::standard_map(4.0);
  const TwistSweepReport a = twist_bound_sweep(sys, points, n_list, {}, 1);
  const TwistSweepReport b = twist_bound_sweep(sys, points, n_list, {}, 4);
  ASSERT_EQ(a.rows.size(), b.rows.size());
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    EXPECT_EQ(a.rows[i].value, b.rows[i].value);
    EXPECT_EQ(a.rows[i].index, b.rows[i].index);
  }
}

TEST(TwistBounds, ArbitraryVectorTimeOne) {
  oracle::Rng rng(47);
  for (double lambda : {0.5, 2.0, 4.0, 7.0}) {
    const auto sys = builtin::standard_map(lambda);
    for (int i = 0; i < 100; ++i) {
      const double v = torsion_finite(sys, rng.point(0, kTwoPi, -3, 3), rng.unit_vector(), 1).value;
      EXPECT_GT(v, -kTwoPi);
      EXPECT_LT(v, kPi);
    }
  }
}

TEST(Eigenpairs, SaddleOfStandardMap) {
  const std::vector<Eigenpair> e = real_eigenpairs({-4, 1, -5, 1});
  ASSERT_EQ(e.size(), 2u);
  EXPECT_NEAR(e[0].value, (-3 + std::sqrt(5.0)) / 2, 1e-14);
  EXPECT_NEAR(e[1].value, (-3 - std::sqrt(5.0)) / 2, 1e-14);
  for (const Eigenpair& p : e) {
    const Vec2 img = Mat2{-4, 1, -5, 1} * p.vector;
    EXPECT_LE(norm(img - p.value * p.vector), 1e-13);
  }
  EXPECT_TRUE(real_eigenpairs(Mat2::rotation(1.0)).empty());
}

TEST(StableBranch, OrbitConvergesToFixedPoint) {
  const auto sys = builtin::standard_map(5.0);
  const std::vector<Vec2> orbit = stable_branch_orbit(sys, {0, 0}, 1e-4, 50);
  ASSERT_EQ(orbit.size(), 51u);
  for (std::size_t k = 1; k < orbit.size(); ++k) {
    EXPECT_LE(norm(sys.step(orbit[k - 1]).image - orbit[k]), 1e-12);
    EXPECT_LT(norm(orbit[k]), norm(orbit[k - 1]));
  }
  EXPECT_THROW(stable_branch_orbit(sys, {1, 0}, 1e-4, 5), Error);
  // (0,0) is elliptic for lambda = 0.5.
  EXPECT_THROW(stable_branch_orbit(builtin::standard_map(0.5), {0, 0}, 1e-4, 5), Error);
}
