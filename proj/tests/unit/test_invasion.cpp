#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "driftlab/error.hpp"
#include "driftlab/invasion.hpp"
#include "oracles.hpp"

using namespace driftlab;

namespace {

const StreamTopology kLake2{2, BoundaryCase::StreamToLake};
const StreamTopology kOcean2{2, BoundaryCase::StreamToOcean};
const StreamTopology kLake4{4, BoundaryCase::StreamToLake};
const StreamTopology kOcean4{4, BoundaryCase::StreamToOcean};
const Vector kTwo2 = Vector::Constant(2, 2.0);
const Vector kTwo4 = Vector::Constant(4, 2.0);
const SpeciesParams kP1{1.0, 0.5};

// Root of q -> lambda1(d, q, profile) through LAPACK eigenvalues.
double oracle_q_star(const StreamTopology& topo, double d, const Vector& profile) {
  const char c = case_letter(topo.boundary);
  return oracle::bisect([&](double q) { return oracle::lambda1(topo.n, c, d, q, profile); }, 0.0,
                        64.0);
}

int sign_changes(const std::vector<double>& values) {
  int changes = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if ((values[i] > 0) != (values[i - 1] > 0)) ++changes;
  }
  return changes;
}

}  // namespace

TEST(Thresholds, OceanDiffusionThresholdClosedForm) {
  const auto d = d_star(kOcean2, kTwo2);
  ASSERT_TRUE(d.has_value());
  EXPECT_NEAR(*d, 3.0 + std::sqrt(5.0), 1e-8);
}

TEST(Thresholds, LakeWithPositiveTotalGrowthHasNoDiffusionThreshold) {
  EXPECT_FALSE(d_star(kLake4, kTwo4).has_value());
}

TEST(Thresholds, LakeWithNegativeTotalGrowth) {
  const Vector r{{1.0, -3.0}};
  const auto d = d_star(kLake2, r);
  ASSERT_TRUE(d.has_value());
  const double expected = oracle::bisect(
      [&](double x) { return oracle::lambda1(2, 'a', x, 0.0, r); }, 1e-6, 100.0);
  EXPECT_NEAR(*d, expected, 1e-9);
  EXPECT_GT(lambda1(kLake2, 0.5 * *d, 0.0, r), 0.0);
  EXPECT_LT(lambda1(kLake2, 2.0 * *d, 0.0, r), 0.0);
}

TEST(Thresholds, NoPositiveGrowthAnywhere) {
  EXPECT_THROW(d_star(kOcean2, Vector::Constant(2, -1.0)), Error);
}

TEST(Thresholds, CriticalAdvectionClosedForm) {
  EXPECT_NEAR(q_star(kLake2, 1.0, kTwo2), 3.0, 1e-8);
  // root of 2 - d - q + sqrt(d (d + q)) = 0
  auto exact = [](double d) { return 2.0 - d + 0.5 * (d + std::sqrt(d * d + 8.0 * d)); };
  const double small = q_star(kLake2, 1e-4, kTwo2);
  EXPECT_GT(small, 2.0);
  EXPECT_LT(small, 2.02);
  EXPECT_NEAR(small, exact(1e-4), 1e-8);
  const double large = q_star(kLake2, 1e4, kTwo2);
  EXPECT_GT(large, 3.98);
  EXPECT_LT(large, 4.0);
  EXPECT_NEAR(large, exact(1e4), 1e-6);
}

TEST(Thresholds, CriticalAdvectionMatchesOracle) {
  std::mt19937_64 rng(8);
  for (int k = 0; k < 20; ++k) {
    const StreamTopology topo{3 + k % 3, k % 2 ? BoundaryCase::StreamToOcean
                                                : BoundaryCase::StreamToLake};
    const Vector r = oracle::uniform_vector(rng, topo.n, 0.5, 3.0);
    const double d = 0.1 + 0.1 * k;
    EXPECT_NEAR(q_star(topo, d, r), oracle_q_star(topo, d, r), 1e-9) << k;
  }
}

TEST(Thresholds, CriticalAdvectionNeedsPersistence) {
  try {
    q_star(kOcean2, 10.0, kTwo2);  // past d* = 5.24
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NotPersistentAtZeroAdvection);
  }
}

TEST(Thresholds, LargerGrowthGivesLargerCriticalAdvection) {
  const Vector r1{{2.5, 2.0, 3.0, 2.2}};
  const Vector r2{{2.0, 1.5, 2.9, 2.1}};
  const auto u = single_species_equilibrium(kLake4, kP1, kTwo4).u;
  for (double d : log_grid(0.01, 20.0, 40)) {
    EXPECT_GT(q_star(kLake4, d, r1), q_star(kLake4, d, r2)) << d;
    EXPECT_LT(q_star(kLake4, d, kTwo4 - u), q_star(kLake4, d, kTwo4)) << d;
  }
}

TEST(Curves, LakeInvasionCurve) {
  const auto grid = log_grid(0.01, 20.0, 200);
  const auto curve = trace_invasion_curve(kLake4, kTwo4, kP1, grid);
  ASSERT_EQ(curve.samples.size(), grid.size());
  EXPECT_EQ(curve.profile_tag, CurveProfile::ResidentReduced);
  EXPECT_FALSE(curve.d_cutoff.has_value());
  for (std::size_t i = 0; i < curve.samples.size(); ++i) {
    const auto& s = curve.samples[i];
    EXPECT_LE(std::abs(lambda1(kLake4, s.d, s.q_star, curve.profile)), 1e-8);
    ASSERT_TRUE(s.derivative.has_value());
    EXPECT_GT(*s.derivative, 0.0);
    if (i > 0) EXPECT_GT(s.q_star, curve.samples[i - 1].q_star);
  }
}

TEST(Curves, LakePersistenceCurveIncreases) {
  const auto curve = trace_persistence_curve(kLake4, kTwo4, log_grid(0.01, 20.0, 100));
  EXPECT_EQ(curve.profile_tag, CurveProfile::Growth);
  for (std::size_t i = 1; i < curve.samples.size(); ++i) {
    EXPECT_GT(curve.samples[i].q_star, curve.samples[i - 1].q_star);
  }
}

TEST(Curves, PassesThroughTheResident) {
  for (auto topo : {kLake4, kOcean4}) {
    const auto res = establish_resident(topo, kTwo4, kP1);
    EXPECT_NEAR(q_star(topo, kP1.d, res.profile, {1e-14, 60}), kP1.q, 1e-9);
  }
}

TEST(Curves, SmallDiffusionEndpoint) {
  const auto res = establish_resident(kLake4, kTwo4, kP1);
  EXPECT_NEAR(q_star(kLake4, 1e-5, res.profile), 2.0 - res.u_star[0], 1e-3);
}

TEST(Curves, OceanCurveStopsBeforeTheCutoff) {
  const auto curve = trace_invasion_curve(kOcean4, kTwo4, kP1, log_grid(0.01, 20.0, 200));
  ASSERT_TRUE(curve.d_cutoff.has_value());
  EXPECT_NEAR(lambda1(kOcean4, *curve.d_cutoff, 0.0, curve.profile), 0.0, 1e-8);
  ASSERT_FALSE(curve.samples.empty());
  EXPECT_LT(curve.samples.back().d, *curve.d_cutoff - 1e-6);
  EXPECT_LT(curve.samples.size(), 200u);
  for (const auto& s : curve.samples) {
    EXPECT_LE(std::abs(lambda1(kOcean4, s.d, s.q_star, curve.profile)), 1e-8);
  }
}

TEST(Curves, ParallelTracingIsIdentical) {
  const auto grid = log_grid(0.05, 5.0, 24);
  CurveOptions serial, parallel;
  parallel.threads = 4;
  const auto a = trace_invasion_curve(kLake4, kTwo4, kP1, grid, serial);
  const auto b = trace_invasion_curve(kLake4, kTwo4, kP1, grid, parallel);
  ASSERT_EQ(a.samples.size(), b.samples.size());
  for (std::size_t i = 0; i < a.samples.size(); ++i) {
    EXPECT_EQ(a.samples[i].q_star, b.samples[i].q_star);
    EXPECT_EQ(a.samples[i].lambda1_star, b.samples[i].lambda1_star);
  }
}

TEST(Curves, DerivativeMatchesFiniteDifference) {
  std::mt19937_64 rng(4);
  for (int k = 0; k < 12; ++k) {
    const auto topo = k % 2 ? kOcean4 : kLake4;
    const Vector profile = oracle::uniform_vector(rng, 4, 0.5, 2.5);
    const double d = 0.1 + 0.15 * k;
    const double h = 1e-5 * std::max(d, 1.0);
    const auto qs = [&](double x) { return q_star(topo, x, profile, {1e-14, 60}); };
    const double fd = oracle::central_difference(qs, d, h);
    EXPECT_NEAR(q_star_derivative(topo, d, profile), fd, 1e-4 * std::max(std::abs(fd), 1e-3))
        << k;
  }
}

TEST(Curves, OceanPersistenceDerivativeNegativeNearCutoff) {
  const double dstar = *d_star(kOcean4, kTwo4);
  // first grid point with q*_r below r, then every later point up to d*
  bool entered = false;
  for (double d : linear_grid(0.05, dstar - 1e-3, 200)) {
    const double qs = q_star(kOcean4, d, kTwo4);
    if (!entered && qs < 2.0) entered = true;
    if (entered) EXPECT_LT(q_star_derivative(kOcean4, d, kTwo4), 0.0) << d;
  }
  EXPECT_TRUE(entered);
}

TEST(Curves, SingleIntersectionWithTheRay) {
  const auto grid = log_grid(0.01, 20.0, 400);
  for (auto topo : {kLake4, kOcean4}) {
    const auto curve = trace_invasion_curve(topo, kTwo4, kP1, grid, {false, false, 1});
    std::vector<double> gap;
    for (const auto& s : curve.samples) gap.push_back(s.q_star - kP1.q / kP1.d * s.d);
    EXPECT_EQ(sign_changes(gap), 1) << case_letter(topo.boundary);
  }
}

TEST(Curves, DerivativeSignLimitsInOceanCase) {
  const double dstar = *d_star(kOcean4, kTwo4);
  // (d0, 0) with d0 inside (0, d*)
  for (double d0 : {0.5, 1.0, 0.5 * dstar}) {
    const auto res = establish_resident(kOcean4, kTwo4, {d0, 1e-3});
    EXPECT_LT(q_star_derivative(kOcean4, d0, res.profile), 0.0) << d0;
  }
  // (0, q0) with q0 inside (0, r)
  for (double q0 : {0.5, 1.0, 1.5}) {
    const auto res = establish_resident(kOcean4, kTwo4, {1e-3, q0});
    EXPECT_GT(q_star_derivative(kOcean4, 1e-3, res.profile), 0.0) << q0;
  }
  // just inside the persistence boundary where it lies below q = r
  int on_lower_branch = 0;
  for (double d0 : linear_grid(0.05 * dstar, 0.95 * dstar, 19)) {
    const double q0 = q_star(kOcean4, d0, kTwo4);
    if (q0 >= 2.0 - 1e-2) continue;
    ++on_lower_branch;
    const auto res = establish_resident(kOcean4, kTwo4, {d0, q0 - 1e-3});
    EXPECT_LT(q_star_derivative(kOcean4, d0, res.profile), 0.0) << d0;
  }
  EXPECT_GE(on_lower_branch, 3);
}

TEST(Resident, RequiresPersistence) {
  try {
    establish_resident(kLake4, kTwo4, {1.0, 10.0});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ResidentNotEstablished);
  }
  try {
    establish_resident({4, BoundaryCase::InlandStream}, kTwo4, kP1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::UnsupportedCase);
  }
}

TEST(Stability, ResidentVerdicts) {
  EXPECT_EQ(e1_stability(kLake4, kTwo4, kP1, {1.0, 0.6}), Stability::Stable);
  EXPECT_EQ(e1_stability(kLake4, kTwo4, kP1, {2.0, 0.5}), Stability::Unstable);
  EXPECT_EQ(e1_stability(kLake4, kTwo4, kP1, kP1), Stability::Marginal);
  EXPECT_EQ(stability_from_eigenvalue(-1e-11), Stability::Marginal);
  EXPECT_EQ(stability_from_eigenvalue(-1e-9), Stability::Stable);
}

TEST(InvaderThreshold, AtTheResident) {
  EXPECT_NEAR(q2_star(kLake4, kTwo4, kP1, 1.0), 0.5, 1e-9);
}

TEST(InvaderThreshold, SandwichBounds) {
  const double above = q2_star(kLake4, kTwo4, kP1, 2.0);
  EXPECT_GT(above, 0.5);
  EXPECT_LT(above, std::min(1.0, q_star(kLake4, 2.0, kTwo4)));
  const double below = q2_star(kLake4, kTwo4, kP1, 0.5);
  EXPECT_GT(below, 0.25);
  EXPECT_LT(below, 0.5);
  for (double d2 : log_grid(0.05, 10.0, 15)) {
    if (std::abs(d2 - 1.0) < 1e-9) continue;
    const double q2 = q2_star(kLake4, kTwo4, kP1, d2);
    const double ray = kP1.q / kP1.d * d2;
    if (d2 > kP1.d) {
      EXPECT_GT(q2, kP1.q) << d2;
      EXPECT_LT(q2, std::min(ray, q_star(kLake4, d2, kTwo4))) << d2;
    } else {
      EXPECT_GT(q2, ray) << d2;
      EXPECT_LT(q2, kP1.q) << d2;
    }
  }
}

TEST(InvaderThreshold, OceanIsNotSupported) {
  EXPECT_THROW(q2_star(kOcean4, kTwo4, kP1, 2.0), Error);
}

TEST(InvaderStability, AtTheResident) {
  EXPECT_NEAR(lambda1_star(kLake4, kTwo4, kP1, 1.0), 0.0, 1e-8);
}

TEST(InvaderStability, OceanCutoff) {
  try {
    lambda1_star(kOcean4, kTwo4, kP1, 5.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::OutOfRange);
  }
}

TEST(Classify, LakeBistabilityPoint) {
  const auto rep = classify_point(kLake4, kTwo4, kP1, {0.08, 0.44});
  EXPECT_EQ(rep.e1, Stability::Stable);
  EXPECT_EQ(rep.e2, Stability::Stable);
  EXPECT_EQ(rep.predicted, Prediction::Bistable);
  EXPECT_EQ(rep.region, RegionLabel::S1only);
}

TEST(Classify, OceanCoexistencePoint) {
  const auto rep = classify_point(kOcean4, kTwo4, kP1, {0.05, 0.555});
  EXPECT_EQ(rep.e1, Stability::Unstable);
  EXPECT_EQ(rep.e2, Stability::Unstable);
  EXPECT_EQ(rep.predicted, Prediction::Coexist);
  EXPECT_EQ(rep.region, RegionLabel::S2star);
}

TEST(Classify, OnTheRayBelowTheResident) {
  const auto rep = classify_point(kLake4, kTwo4, kP1, {0.5, 0.25});
  EXPECT_EQ(rep.region, RegionLabel::G2);
  EXPECT_EQ(rep.predicted, Prediction::E2GloballyStable);
}

TEST(Classify, ResidentItselfIsBoundary) {
  const auto rep = classify_point(kLake4, kTwo4, kP1, kP1);
  EXPECT_EQ(rep.region, RegionLabel::Boundary);
  EXPECT_EQ(rep.predicted, Prediction::Undetermined);
}

TEST(Classify, StarredSets) {
  EXPECT_EQ(classify_point(kOcean4, kTwo4, kP1, {1.5, 1.0}).region, RegionLabel::G1star);
  EXPECT_EQ(classify_point(kOcean4, kTwo4, kP1, {0.8, 0.3}).region, RegionLabel::G2star);
  const auto past = classify_point(kOcean4, kTwo4, kP1, {3.0, 0.1});
  EXPECT_EQ(past.region, RegionLabel::S1star);
  EXPECT_FALSE(past.q_curve.has_value());
}

TEST(Classify, Preconditions) {
  EXPECT_THROW(classify_point(kLake4, kTwo4, {1.0, 0.0}, {0.5, 0.5}), Error);
  EXPECT_THROW(classify_point({4, BoundaryCase::InlandStream}, kTwo4, kP1, {0.5, 0.5}), Error);
  EXPECT_THROW(classify_point(kLake4, kTwo4, {1.0, 10.0}, {0.5, 0.5}), Error);
}

TEST(Classify, ReportInvariantsOnRandomPoints) {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> dd(0.02, 4.0), qq(0.01, 1.5);
  for (int k = 0; k < 200; ++k) {
    const auto topo = k % 2 ? kOcean4 : kLake4;
    const SpeciesParams p2{dd(rng), qq(rng)};
    const auto rep = classify_point(topo, kTwo4, kP1, p2);
    switch (rep.region) {
      case RegionLabel::G1:
      case RegionLabel::G1star:
        EXPECT_EQ(rep.predicted, Prediction::E1GloballyStable);
        break;
      case RegionLabel::G2:
      case RegionLabel::G2star:
        EXPECT_EQ(rep.predicted, Prediction::E2GloballyStable);
        break;
      default:
        if (rep.e1 == Stability::Unstable && rep.e2 == Stability::Unstable) {
          EXPECT_EQ(rep.predicted, Prediction::Coexist);
        }
        if (rep.e1 == Stability::Stable && rep.e2 == Stability::Stable) {
          EXPECT_EQ(rep.predicted, Prediction::Bistable);
        }
    }
    // E1 verdict agrees with the side of the curve.
    if (rep.q_curve && rep.region != RegionLabel::Boundary) {
      EXPECT_EQ(rep.e1 == Stability::Stable, p2.q > *rep.q_curve) << p2.d << "," << p2.q;
    }
  }
}

TEST(Grids, Spacing) {
  const auto g = log_grid(0.01, 100.0, 5);
  ASSERT_EQ(g.size(), 5u);
  EXPECT_DOUBLE_EQ(g[0], 0.01);
  EXPECT_NEAR(g[2], 1.0, 1e-14);
  EXPECT_DOUBLE_EQ(g[4], 100.0);
  EXPECT_EQ(linear_grid(0.0, 1.0, 3), (std::vector<double>{0.0, 0.5, 1.0}));
  EXPECT_TRUE(log_grid(1.0, 2.0, 0).empty());
  EXPECT_THROW(log_grid(0.0, 1.0, 3), Error);
}
