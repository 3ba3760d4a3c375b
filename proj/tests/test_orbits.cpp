#include "fiem/orbits.hpp"

#include <gtest/gtest.h>

#include <numbers>

using namespace fiem;

namespace {

using Q = Rational;

Family three_iem() {
  return Family::linear(Permutation::reversing(3), {Q(1, 4), Q(3, 10), Q(9, 20)}, {Q(9, 20), Q(3, 10), Q(1, 4)});
}

Family figure12() {
  return Family::linear(Permutation::reversing(4), {Q(38, 100), Q(1, 100), Q(1, 100), Q(60, 100)},
                        {Q(60, 100), Q(1, 100), Q(1, 100), Q(38, 100)});
}

PerturbedMap standard_map(double eps) {
  return PerturbedMap(Family::linear(Permutation::reversing(2), {Q(1), Q(0)}, {Q(0), Q(1)}, 0, 1, true),
                      Forcing::sine(1), eps);
}

const OrbitRecord& by_x(const std::vector<OrbitRecord>& v, double x) {
  for (const auto& o : v)
    for (const auto& p : o.points)
      if (std::abs(p.x - x) < 1e-3) return o;
  throw std::runtime_error("no orbit near x");
}

}  // namespace

TEST(Classify, Thresholds) {
  EXPECT_EQ(classify(0.3, 1e-12), StabilityClass::elliptic);
  EXPECT_EQ(classify(-0.1, 1e-12), StabilityClass::hyperbolic);
  EXPECT_EQ(classify(1.5, 1e-12), StabilityClass::hyperbolic_with_reflection);
  EXPECT_EQ(classify(1e-13, 1e-12), StabilityClass::parabolic);
  EXPECT_EQ(classify(1 - 1e-13, 1e-12), StabilityClass::parabolic);
  EXPECT_EQ(to_string(StabilityClass::hyperbolic_with_reflection), "hyperbolic-with-reflection");
}

TEST(Orbits, StandardMapFixedPointResidueMatchesTrace) {
  const double eps = 0.05;
  const PerturbedMap T = standard_map(eps);
  const auto rec = make_record(T, T.make_point(0.5, 0.0), 1);
  ASSERT_TRUE(rec);
  // D T = [[1, 1], [eps f'(x'), 1 + eps f'(x')]] with f'(1/2) = -2 pi
  const double a = eps * -2 * std::numbers::pi;
  EXPECT_NEAR(rec->residue, (2 - (2 + a)) / 4, 1e-14);
  EXPECT_EQ(rec->cls, StabilityClass::elliptic);
  EXPECT_NEAR(rec->M, -2 * std::numbers::pi, 1e-12);
  EXPECT_TRUE(rec->symmetric);
  EXPECT_EQ(rec->symmetry_lines, (std::vector<int>{0, 1}));
  // the origin is the hyperbolic partner
  const auto h = make_record(T, T.make_point(0.0, 0.0), 1);
  ASSERT_TRUE(h);
  EXPECT_EQ(h->cls, StabilityClass::hyperbolic);
  EXPECT_NEAR(h->residue, -std::numbers::pi * eps / 2, 1e-14);
}

TEST(Orbits, MakeRecordRejectsNonClosingPoints) {
  const PerturbedMap T = standard_map(0.05);
  EXPECT_FALSE(make_record(T, T.make_point(0.3, 0.1), 1));
}

TEST(Orbits, BalanceSums) {
  OrbitRecord o;
  o.points = {{0.1, 0, 1}, {0.6, 0, 1}};
  const BalanceSums b1 = balance(o, 1);
  EXPECT_TRUE(b1.balanced);
  const BalanceSums b2 = balance(o, 2);
  EXPECT_FALSE(b2.balanced);
  EXPECT_NEAR(b2.C, 2 * std::cos(0.4 * std::numbers::pi), 1e-14);
}

TEST(Orbits, MinimalPeriod) {
  const PerturbedMap T = standard_map(0.05);
  EXPECT_EQ(minimal_period(T, T.make_point(0.5, 0.0), 4, 1e-10), 1);
  EXPECT_EQ(minimal_period(T, T.make_point(0.5, 0.5), 4, 1e-10), 2);
  EXPECT_EQ(minimal_period(T, T.make_point(0.3, 0.1), 4, 1e-10), 0);
}

TEST(Orbits, ResidualJacobianAtZeroEps) {
  const PerturbedMap T(figure12(), Forcing({{1, 1.0}, {2, 0.4}}), 0.0);
  const std::vector<int> itin{4, 1};
  const ResidualG G(T, itin);
  for (double y : {0.3, 0.5, 0.7}) {
    const double x0 = 0.8;
    const auto v = G(x0, y);
    double sw = 0, sf = 0, x = x0;
    for (int a : itin) {
      const Slice s = T.family().slice_of(a, y);
      sw += s.domega;
      x += s.omega;
      sf += T.forcing().deriv(x);
    }
    EXPECT_NEAR(v.dg[0][0], 0.0, 1e-15);
    EXPECT_NEAR(v.dg[0][1], sw, 1e-14);
    EXPECT_NEAR(v.det(), -sw * sf, 1e-12);
  }
}

TEST(Orbits, ResidualJacobianMatchesFiniteDifferences) {
  const PerturbedMap T(figure12(), Forcing::sine(1), 0.02);
  const ResidualG G(T, {4, 1});
  const double x = 0.75, y = 0.5, h = 1e-7;
  const auto v = G(x, y), ax = G(x + h, y), bx = G(x - h, y), ay = G(x, y + h), by = G(x, y - h);
  EXPECT_NEAR((ax.g1 - bx.g1) / (2 * h), v.dg[0][0], 1e-6);
  EXPECT_NEAR((ay.g1 - by.g1) / (2 * h), v.dg[0][1], 1e-6);
  EXPECT_NEAR((ax.g2 - bx.g2) / (2 * h), v.dg[1][0], 1e-5);
  EXPECT_NEAR((ay.g2 - by.g2) / (2 * h), v.dg[1][1], 1e-5);
}

TEST(Orbits, NewtonConvergesAndReportsFailures) {
  const PerturbedMap T = standard_map(0.1);
  const NewtonResult nr = newton_refine(T, T.make_point(0.49, 0.02), 1);
  ASSERT_EQ(nr.status, NewtonResult::Status::converged);
  EXPECT_NEAR(nr.orbit->points[0].x, 0.5, 1e-12);
  EXPECT_NEAR(nr.orbit->points[0].y, 0.0, 1e-12);
  EXPECT_THROW(newton_refine(T, T.make_point(0.5, 0.0), 0), std::invalid_argument);
  // at eps = 0 the first image lands on x = 1/4 where f' vanishes, so DG is singular
  const PerturbedMap T0 = standard_map(0.0);
  const NewtonResult flat = newton_refine(T0, T0.make_point(0.05, 0.2), 1);
  EXPECT_EQ(flat.status, NewtonResult::Status::singular);
}

TEST(Orbits, Figure12SymmetricOrbits) {
  const PerturbedMap T(figure12(), Forcing::sine(1), 0.001);
  const SymmetricSearch s = find_symmetric(T, 2);
  // [DERIVED] two period-1 saddles on the tiny middle intervals and two period-2 orbits
  ASSERT_EQ(s.orbits.size(), 4u);
  const OrbitRecord& a = s.orbits[0];
  EXPECT_EQ(a.q, 1);
  EXPECT_NEAR(a.points[0].x, 0.5, 1e-9);
  EXPECT_NEAR(a.points[0].y, 0.4772727273, 1e-9);
  EXPECT_NEAR(a.M, 2.7646015352, 1e-9);
  EXPECT_NEAR(a.residue, -6.9115038379e-4, 1e-12);
  EXPECT_EQ(a.cls, StabilityClass::hyperbolic);
  EXPECT_EQ(s.orbits[1].q, 1);
  EXPECT_NEAR(s.orbits[1].points[0].y, 0.5227272727, 1e-9);

  const OrbitRecord& e = by_x(s.orbits, 0.755);
  EXPECT_EQ(e.q, 2);
  EXPECT_EQ(e.symmetry_lines, (std::vector<int>{-1, 1}));
  EXPECT_NEAR(e.points[0].x, 0.7549450265, 1e-9);
  EXPECT_NEAR(e.points[0].y, 0.4995002413, 1e-9);
  EXPECT_NEAR(e.M, -0.1717675644, 1e-9);
  EXPECT_NEAR(e.residue, 4.2941430102e-5, 1e-12);
  EXPECT_EQ(e.cls, StabilityClass::elliptic);
  const OrbitRecord& h = by_x(s.orbits, 0.505);
  EXPECT_EQ(h.q, 2);
  EXPECT_NEAR(h.M, 11.0529570178, 1e-8);
  EXPECT_NEAR(h.residue, -2.7651481273e-3, 1e-12);
  EXPECT_EQ(h.cls, StabilityClass::hyperbolic);
  for (const auto& o : s.orbits) {
    EXPECT_LE(o.closure, 1e-10);
    EXPECT_TRUE(o.residue_reliable);
    // small-eps residue: Res ~ -eps M / 4
    EXPECT_NEAR(o.residue / (-0.001 * o.M / 4), 1.0, 2e-3);
  }
}

TEST(Orbits, PredictionCountDependsOnHarmonic) {
  const double eps = 0.001;
  for (int l : {3, 9}) {
    const PerturbedMap T(three_iem(), Forcing({{l, 1.0}}), eps);
    const SymmetricSearch s = find_symmetric(T, 1);
    const OrbitRecord& sym = by_x(s.orbits, 0.5);
    ASSERT_EQ(sym.q, 1);
    const Prediction pr = predict_nonsymmetric(T, sym, l);
    EXPECT_TRUE(pr.applicable);
    EXPECT_NEAR(pr.width, 0.3, 1e-12);
    if (l == 3) {
      EXPECT_EQ(pr.count, 0);
      continue;
    }
    EXPECT_EQ(pr.count, 4);
    const auto found = confirm_prediction(T, pr, 1);
    ASSERT_EQ(found.size(), 4u);
    int elliptic = 0, hyperbolic = 0;
    for (const auto& o : found) {
      EXPECT_FALSE(o.symmetric);
      elliptic += o.cls == StabilityClass::elliptic;
      hyperbolic += o.cls == StabilityClass::hyperbolic;
      // the L-image of every orbit is again among them
      const auto img = l_image(T, o);
      ASSERT_TRUE(img);
      bool paired = false;
      for (const auto& other : found) paired = paired || detail::same_orbit(T, other, *img, 1e-8);
      EXPECT_TRUE(paired);
    }
    EXPECT_EQ(elliptic, 2);
    EXPECT_EQ(hyperbolic, 2);
  }
}

TEST(Orbits, BalancedOrbitHasNoPrediction) {
  const PerturbedMap T = standard_map(0.05);
  // period 2 through (0, 1/2) and (1/2, 1/2) balances the first harmonic
  const auto rec = make_record(T, T.make_point(0.0, 0.5), 2);
  ASSERT_TRUE(rec);
  EXPECT_TRUE(rec->balance.at(0).balanced);
  EXPECT_FALSE(predict_nonsymmetric(T, *rec, 1).applicable);
}

TEST(Sweep, Figure12PitchforkOfPeriodTwoElliptic) {
  const PerturbedMap T(figure12(), Forcing::sine(1), 0.001);
  const SymmetricSearch s = find_symmetric(T, 2);
  const OrbitRecord& e = by_x(s.orbits, 0.755);
  std::vector<double> grid;
  for (int k = 1; k <= 120; ++k) grid.push_back(k * 0.001);
  const SweepResult r = sweep_eps(T, e, grid);
  ASSERT_FALSE(r.truncated);
  std::vector<double> forks;
  for (const auto& ev : r.events)
    if (ev.kind == "pitchfork") forks.push_back(ev.eps);
  // [DERIVED] single pitchfork near eps = 0.091 on the fine grid
  ASSERT_EQ(forks.size(), 1u);
  EXPECT_NEAR(forks[0], 0.091, 3e-3);
  EXPECT_EQ(r.track.size(), grid.size());
  EXPECT_EQ(r.track.front().cls, StabilityClass::elliptic);
  EXPECT_EQ(r.final_nonsymmetric.size(), 2u);
  EXPECT_TRUE(r.l_paired);
}
