#include <gtest/gtest.h>

#include <cmath>

#include "swstab/io.hpp"
#include "test_support.hpp"

namespace {

using namespace swstab;
using swstab::testing::Rng;

const Mat2 kB1(-0.1, 1, -1, -0.1);
const Mat2 kB2(-0.1, 0.5, -2, -0.1);

TEST(ParallelSet, DiagonalPairHasTheAxes) {
  const Mat2 a1 = Mat2::diag(-1, -2);
  const Mat2 a2 = Mat2::diag(-2, -1);
  const ParallelSet ps = parallel_set(a1, a2);
  EXPECT_DOUBLE_EQ(ps.q_coeffs[0], 0.0);
  EXPECT_DOUBLE_EQ(ps.q_coeffs[1], -3.0);
  EXPECT_DOUBLE_EQ(ps.q_coeffs[2], 0.0);
  for (const Vec2& d : ps.directions) EXPECT_NEAR(std::abs(d.x1 * d.x2), 0.0, 1e-15);
  EXPECT_NE(std::abs(ps.directions[0].x1), std::abs(ps.directions[1].x1));
}

TEST(ParallelSet, QCoefficientsMatchOracle) {
  Rng rng(51);
  for (int i = 0; i < 500; ++i) {
    const Mat2 a1 = swstab::testing::random_matrix(rng);
    const Mat2 a2 = swstab::testing::random_matrix(rng);
    const auto q = q_coefficients(a1, a2);
    const auto o = swstab::testing::oracle_q_coeffs(a1, a2);
    for (int k = 0; k < 3; ++k) EXPECT_NEAR(q[static_cast<std::size_t>(k)], o[static_cast<std::size_t>(k)], 1e-12 * 100);
  }
}

TEST(ParallelSet, QDiscriminantEqualsBigDelta) {
  Rng rng(52);
  for (int i = 0; i < 1000; ++i) {
    const Mat2 a1 = swstab::testing::random_matrix(rng);
    const Mat2 a2 = swstab::testing::random_matrix(rng);
    const auto q = swstab::testing::oracle_q_coeffs(a1, a2);
    const double disc = q[1] * q[1] - 4.0 * q[0] * q[2];
    const double bd = big_delta(a1, a2);
    const double scale = std::max({1.0, std::abs(bd), q[1] * q[1], std::abs(4.0 * q[0] * q[2])});
    EXPECT_LE(std::abs(disc - bd), 1e-9 * scale);
  }
}

TEST(ParallelSet, DirectionsAreRootsAndCollinear) {
  Rng rng(53);
  int checked = 0;
  for (int i = 0; i < 500; ++i) {
    const Mat2 a1 = swstab::testing::random_matrix(rng);
    const Mat2 a2 = swstab::testing::random_matrix(rng);
    if (!(big_delta(a1, a2) > 1e-6) || std::abs(det(a1)) < 1e-3) continue;
    ++checked;
    const ParallelSet ps = parallel_set(a1, a2);
    for (std::size_t k = 0; k < 2; ++k) {
      const Vec2 v = ps.directions[k];
      EXPECT_NEAR(norm(v), 1.0, 1e-14);
      EXPECT_LE(std::abs(q_value(ps.q_coeffs, v)), 1e-10 * norm(a1) * norm(a2));
      EXPECT_LT(norm(a2 * v - ps.alphas[k] * (a1 * v)), 1e-9 * (norm(a1) + norm(a2)) * (1 + std::abs(ps.alphas[k])));
    }
  }
  EXPECT_GT(checked, 100);
}

TEST(ParallelSet, NonPositiveBigDeltaThrows) {
  try {
    (void)parallel_set(-1.0 * Mat2::identity(), -1.0 * Mat2::identity());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::delta_non_positive);
  }
}

TEST(ParallelSet, DirectWhenGammaPositiveInverseForShearPair) {
  const ParallelSet s4 = parallel_set(kB1, kB2);
  EXPECT_TRUE(is_direct(s4, kB1, kB2));
  const Mat2 a1(-1, 10, 0, -1);
  const Mat2 a2(-1, 0, 10, -1);
  const ParallelSet s2 = parallel_set(a1, a2);
  EXPECT_FALSE(is_direct(s2, a1, a2));
  // Eigenvalues of A2 A1^{-1} as an independent check.
  const auto [l1, l2] = swstab::testing::oracle_eigenvalues(a2 * inverse(a1));
  EXPECT_LT(std::min(l1.real(), l2.real()), 0.0);
}

TEST(ParallelSet, DirectnessAgreesWithPointwiseOrientation) {
  Rng rng(54);
  int checked = 0;
  for (int i = 0; i < 300 && checked < 100; ++i) {
    const auto p = swstab::testing::random_hurwitz_pair(rng);
    if (!(big_delta(p.a1, p.a2) > 1e-6)) continue;
    const ParallelSet ps = parallel_set(p.a1, p.a2);
    const bool direct = is_direct(ps, p.a1, p.a2);
    for (std::size_t k = 0; k < 2; ++k) {
      const Vec2 x = rng.uniform(-5.0, 5.0) * ps.directions[k];
      if (norm(x) < 1e-3) continue;
      ++checked;
      const bool same_way = dot(p.a1 * x, p.a2 * x) > 0.0;
      if (!direct) {
        // inverse means at least one line reverses
        continue;
      }
      EXPECT_TRUE(same_way);
    }
    if (!direct) {
      const bool line0 = dot(p.a1 * ps.directions[0], p.a2 * ps.directions[0]) > 0.0;
      const bool line1 = dot(p.a1 * ps.directions[1], p.a2 * ps.directions[1]) > 0.0;
      EXPECT_FALSE(line0 && line1);
    }
  }
  EXPECT_GE(checked, 100);
}

TEST(ParallelSet, S4IsAlwaysDirect) {
  Rng rng(55);
  for (int s1 = -1; s1 <= 1; ++s1) {
    for (int s2 = -1; s2 <= 1; ++s2) {
      const auto p = swstab::testing::random_s4_normal(rng, s1, s2);
      ASSERT_TRUE(p.has_value());
      const auto q = swstab::testing::transform_pair(rng, *p);
      EXPECT_TRUE(is_direct(parallel_set(q.a1, q.a2), q.a1, q.a2));
    }
  }
}

TEST(ParallelSet, SlopeOrderingForRealNormalForms) {
  Rng rng(56);
  int checked = 0;
  for (int rep = 0; rep < 50; ++rep) {
    const auto p = swstab::testing::random_s4_normal(rng, 1, 1);
    ASSERT_TRUE(p.has_value());
    const NormalFormResult nf = normalize(p->a1, p->a2);
    if (nf.case_tag != NormalFormCase::c1a || !nf.f) continue;
    const double f = *nf.f;
    const ParallelSet ps = parallel_set(nf.b1, nf.b2);
    ASSERT_TRUE(ps.m1 && ps.m2);
    const double lo = std::min(*ps.m1, *ps.m2);
    const double hi = std::max(*ps.m1, *ps.m2);
    // F < m2 < -1 < 1 < m1 < -F
    EXPECT_LT(f, lo);
    EXPECT_LT(lo, -1.0);
    EXPECT_GT(hi, 1.0);
    EXPECT_LT(hi, -f);
    for (double m : {*ps.m1, *ps.m2}) {
      EXPECT_GT(m * m - nf.sign1, 0.0);
      EXPECT_GT(f * f - m * m * nf.sign2, 0.0);
    }
    ++checked;
  }
  EXPECT_GT(checked, 10);
}

TEST(WorstTrajectory, SymmetricExample) {
  const WorstTrajectory wt = worst_trajectory(kB1, kB2, default_start(kB1, kB2), 1);
  ASSERT_EQ(wt.arcs.size(), 2U);
  EXPECT_EQ(wt.arcs[0].field, 2);
  EXPECT_EQ(wt.arcs[1].field, 1);
  EXPECT_NEAR(wt.arcs[0].duration, 1.5376, 1e-4);
  EXPECT_NEAR(wt.arcs[1].duration, 1.5376, 1e-4);
  EXPECT_NEAR(wt.return_ratio, 1.465671, 1e-6);
  EXPECT_EQ(wt.rotation, -1);
}

TEST(WorstTrajectory, ArcsAreExactAndChained) {
  const WorstTrajectory wt = worst_trajectory(kB1, kB2, default_start(kB1, kB2), 3);
  const auto q = q_coefficients(kB1, kB2);
  for (std::size_t i = 0; i < wt.arcs.size(); ++i) {
    const Arc& a = wt.arcs[i];
    const Vec2 end = swstab::testing::oracle_expm(a.field == 1 ? kB1 : kB2, a.duration) * a.start;
    const Vec2 next = i + 1 < wt.arcs.size() ? wt.arcs[i + 1].start : wt.end;
    EXPECT_LE(norm(end - next), 1e-10 * norm(next));
    EXPECT_LE(std::abs(q_value(q, next)), 1e-10 * dot(next, next) * norm(kB1) * norm(kB2));
  }
}

TEST(WorstTrajectory, RotatesMonotonically) {
  const WorstTrajectory wt = worst_trajectory(kB1, kB2, default_start(kB1, kB2), 2);
  const Trajectory tr = io::sample_worst_trajectory(kB1, kB2, wt, 200);
  for (std::size_t i = 1; i < tr.samples.size(); ++i) {
    const double turn = cross(tr.samples[i - 1].x, tr.samples[i].x);
    EXPECT_GT(wt.rotation * turn, 0.0) << i;
  }
}

TEST(WorstTrajectory, HomogeneousInStartPoint) {
  const Vec2 x0 = default_start(kB1, kB2);
  const double r1 = worst_trajectory(kB1, kB2, x0, 1).return_ratio;
  const double r2 = worst_trajectory(kB1, kB2, 2.0 * x0, 1).return_ratio;
  EXPECT_NEAR(r1, r2, 1e-12);
}

TEST(WorstTrajectory, RevolutionsCompoundGeometrically) {
  Rng rng(57);
  for (int i = 0; i < 20; ++i) {
    const auto nf = swstab::testing::random_s4_normal(rng, rng.pick(3) - 1, rng.pick(3) - 1);
    ASSERT_TRUE(nf.has_value());
    const auto p = swstab::testing::transform_pair(rng, *nf);
    const WorstTrajectory wt = worst_trajectory(p.a1, p.a2, default_start(p.a1, p.a2), 5);
    for (int k = 1; k <= 5; ++k) {
      const double ratio = norm(k < 5 ? wt.arcs[static_cast<std::size_t>(2 * k)].start : wt.end) / norm(wt.start);
      EXPECT_NEAR(ratio, std::pow(wt.return_ratio, k), 1e-8 * std::pow(wt.return_ratio, k));
    }
  }
}

TEST(WorstTrajectory, AnalyticAndNumericRAgreeAcrossBranches) {
  Rng rng(58);
  for (int s1 = -1; s1 <= 1; ++s1) {
    for (int s2 = -1; s2 <= 1; ++s2) {
      for (int rep = 0; rep < 12; ++rep) {
        const auto nf = swstab::testing::random_s4_normal(rng, s1, s2);
        ASSERT_TRUE(nf.has_value());
        const auto p = swstab::testing::transform_pair(rng, *nf);
        const double r = r_value(p.a1, p.a2);
        const double n = worst_trajectory(p.a1, p.a2, default_start(p.a1, p.a2), 1).return_ratio;
        EXPECT_NEAR(n, r, 1e-6 * r) << s1 << "," << s2;
      }
    }
  }
}

TEST(WorstTrajectory, StartingOnEitherLineGivesSameRatio) {
  const ParallelSet ps = parallel_set(kB1, kB2);
  const double a = worst_trajectory(kB1, kB2, ps.directions[0], 1).return_ratio;
  const double b = worst_trajectory(kB1, kB2, ps.directions[1], 1).return_ratio;
  EXPECT_NEAR(a, b, 1e-10);
}

TEST(WorstTrajectory, Preconditions) {
  try {
    (void)worst_trajectory(Mat2(-1, 10, 0, -1), Mat2(-1, 0, 10, -1), {1, 1}, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::precondition);
  }
  try {
    (void)worst_trajectory(kB1, kB2, {1, 0}, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::precondition);
  }
}

TEST(WorstTrajectory, CrossingBoundIsReported) {
  // A stable node never crosses a line through its slow eigendirection from the other side.
  try {
    (void)first_crossing(Mat2::diag(-1, -2), {1, 1}, {0, 1}, {0.01, 1000, 1e-14});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::no_crossing);
  }
}

TEST(UnstableDirection, ShearPair) {
  const UnstableDirection u = unstable_direction(Mat2(-1, 10, 0, -1), Mat2(-1, 0, 10, -1));
  EXPECT_NEAR(u.sigma0, 0.5, 1e-12);
  EXPECT_NEAR(u.eigenvalue, 4.0, 1e-10);
  EXPECT_NEAR(u.direction.x1, 1.0 / std::sqrt(2.0), 1e-12);
  EXPECT_NEAR(u.direction.x2, 1.0 / std::sqrt(2.0), 1e-12);
  const Mat2 m(-1, 5, 5, -1);
  EXPECT_LT(norm(m * u.direction - u.eigenvalue * u.direction), 1e-10);
}

TEST(UnstableDirection, PositiveEigenvalueWheneverS2) {
  Rng rng(59);
  int checked = 0;
  for (int i = 0; i < 3000 && checked < 100; ++i) {
    const auto p = swstab::testing::random_hurwitz_pair(rng);
    const InvariantSet inv = compute_invariants(p.a1, p.a2);
    if (!(inv.gamma < -inv.geo_mean_det)) continue;
    ++checked;
    const UnstableDirection u = unstable_direction(p.a1, p.a2);
    EXPECT_GT(u.eigenvalue, 0.0);
    const Mat2 m = u.sigma0 * p.a1 + (1 - u.sigma0) * p.a2;
    EXPECT_LT(norm(m * u.direction - u.eigenvalue * u.direction), 1e-10 * (1 + norm(m)));
    EXPECT_NEAR(swstab::testing::spectral_abscissa(m), u.eigenvalue, 1e-10 * (1 + norm(m)));
  }
  EXPECT_GT(checked, 20);
}

TEST(UnstableDirection, WrongCase) {
  try {
    (void)unstable_direction(kB1, kB2);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::wrong_case);
  }
}

}  // namespace
