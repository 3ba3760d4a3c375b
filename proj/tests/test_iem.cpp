#include "fiem/iem.hpp"

#include <gtest/gtest.h>

#include <random>
#include <set>
#include <tuple>

using namespace fiem;

namespace {

using Q = Rational;

// Independent oracle: translation of interval i is the total length of the
// intervals placed before it in the image minus the total before it in the domain.
std::vector<Q> oracle_omega(const std::vector<int>& final_order, const std::vector<Q>& l) {
  const int d = static_cast<int>(l.size());
  std::vector<Q> w(d);
  for (int i = 1; i <= d; ++i) {
    Q before_domain = 0, before_image = 0;
    for (int j = 1; j < i; ++j) before_domain += l[j - 1];
    for (int k = 0; final_order[k] != i; ++k) before_image += l[final_order[k] - 1];
    w[i - 1] = before_image - before_domain;
  }
  return w;
}

// Independent oracle: F(x) by scanning intervals directly.
Q oracle_eval(const std::vector<int>& order, const std::vector<Q>& l, const Q& x) {
  const auto w = oracle_omega(order, l);
  Q left = 0;
  for (std::size_t i = 0; i < l.size(); ++i) {
    if (x >= left && x < left + l[i]) return x + w[i];
    left += l[i];
  }
  return Q(-1);
}

struct CaptureWarnings {
  std::vector<std::string> seen;
  WarningSink saved;
  CaptureWarnings() : saved(warning_sink()) {
    warning_sink() = [this](std::string_view m) { seen.emplace_back(m); };
  }
  ~CaptureWarnings() { warning_sink() = saved; }
};

const std::vector<int> kFig1 = {3, 2, 4, 1};  // C B D A
const std::vector<Q> kFig1Lengths = {Q(1, 5), Q(3, 10), Q(1, 10), Q(2, 5)};
const std::vector<Q> kFig4 = {Q(7, 50), Q(2, 5), Q(1, 10), Q(9, 25)};

}  // namespace

TEST(Iem, TranslationVectorMatchesOracle) {
  const Iem<Q> f(Permutation(kFig1), kFig1Lengths);
  EXPECT_EQ(f.omega(), oracle_omega(kFig1, kFig1Lengths));
  // [DERIVED] C B D A with lengths (1/5, 3/10, 1/10, 2/5): A moves to the end
  EXPECT_EQ(f.omega()[0], Q(4, 5));
  EXPECT_EQ(f.omega()[2], Q(-1, 2));
}

TEST(Iem, EvaluateMatchesOracleOnGrid) {
  const Iem<Q> f(Permutation(kFig1), kFig1Lengths);
  for (int k = 0; k < 200; ++k) {
    const Q x(k, 200);
    EXPECT_EQ(f.evaluate(x), oracle_eval(kFig1, kFig1Lengths, x));
  }
}

TEST(Iem, ImagesTileTheInterval) {
  const Iem<Q> f(Permutation(kFig1), kFig1Lengths);
  std::vector<std::pair<Q, Q>> img;
  for (int i = 1; i <= 4; ++i) img.emplace_back(f.left(i) + f.omega()[i - 1], f.right(i) + f.omega()[i - 1]);
  std::sort(img.begin(), img.end());
  EXPECT_EQ(img.front().first, Q(0));
  EXPECT_EQ(img.back().second, Q(1));
  for (int k = 1; k < 4; ++k) EXPECT_EQ(img[k - 1].second, img[k].first);
}

TEST(Iem, RejectsNonpositiveLengthsAndSizeMismatch) {
  EXPECT_THROW(Iem<Q>(Permutation::reversing(3), {Q(1, 2), Q(0), Q(1, 2)}), std::invalid_argument);
  EXPECT_THROW(Iem<Q>(Permutation::reversing(3), {Q(1, 2), Q(1, 2)}), std::invalid_argument);
  EXPECT_THROW(Iem<double>(Permutation::reversing(2), {0.5, -0.1}), std::invalid_argument);
}

TEST(Iem, NormalizesWithWarning) {
  CaptureWarnings w;
  const Iem<Q> f(Permutation::reversing(2), {Q(1), Q(3)});
  EXPECT_EQ(f.lengths()[0], Q(1, 4));
  ASSERT_EQ(w.seen.size(), 1u);
  EXPECT_NE(w.seen[0].find("normaliz"), std::string::npos);
}

TEST(Iem, IdentityPermutationIsIdentityMap) {
  const Iem<Q> f(Permutation::identity(3), {Q(1, 3), Q(1, 3), Q(1, 3)});
  for (int k = 0; k < 30; ++k) EXPECT_EQ(f.evaluate(Q(k, 30)), Q(k, 30));
}

TEST(Iem, ComposeAgreesWithEvaluate) {
  const Iem<Q> f(Permutation(kFig1), kFig1Lengths);
  const Iem<Q> g(Permutation::reversing(4), kFig4);
  const Iem<Q> fg = compose(f, g);
  std::mt19937_64 rng(3);
  for (int k = 0; k < 1000; ++k) {
    const Q x(static_cast<long>(rng() % 9973), 9973);
    ASSERT_EQ(fg.evaluate(x), f.evaluate(g.evaluate(x)));
  }
}

TEST(Iem, ComposeAgreesWithEvaluateFloat) {
  const Iem<double> f(Permutation(kFig1), {0.2, 0.3, 0.1, 0.4});
  const Iem<double> g(Permutation::reversing(4), {0.14, 0.4, 0.1, 0.36});
  const Iem<double> fg = compose(f, g);
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0, 1);
  for (int k = 0; k < 1000; ++k) {
    const double x = u(rng);
    EXPECT_LE(circle_dist(fg.evaluate(x), f.evaluate(g.evaluate(x))), 1e-12);
  }
}

TEST(Iem, InverseIsInvolutionAndComposesToIdentity) {
  const Iem<Q> f(Permutation(kFig1), kFig1Lengths);
  const Iem<Q> g = f.inverse();
  EXPECT_EQ(g.inverse(), f);
  for (int k = 0; k < 100; ++k) EXPECT_EQ(g.evaluate(f.evaluate(Q(k, 100))), Q(k, 100));
  const Iem<Q> id = compose(f, g).canonical();
  EXPECT_EQ(id.size(), 1);
  EXPECT_EQ(id.omega()[0], Q(0));
}

TEST(Iem, CanonicalMergesEqualTranslations) {
  // identity on [0, 1/2) split in two, then a swap of the remaining halves
  const Iem<Q> f = Iem<Q>::from_pieces({Q(1, 4), Q(1, 4), Q(1, 4), Q(1, 4)}, {Q(0), Q(0), Q(1, 4), Q(-1, 4)});
  const Iem<Q> c = f.canonical();
  EXPECT_EQ(c.size(), 3);
  EXPECT_EQ(c.lengths()[0], Q(1, 2));
  for (int k = 0; k < 40; ++k) EXPECT_EQ(c.evaluate(Q(k, 40)), f.evaluate(Q(k, 40)));
}

TEST(Iem, SymmetricWitnessAndLocalReflection) {
  const Iem<Q> f(Permutation::reversing(4), kFig4);
  const auto w = is_symmetric(f);
  EXPECT_TRUE(w.symmetric);
  for (bool b : w.image_is_reflection) EXPECT_TRUE(b);
  for (int k = 1; k < 200; ++k) {
    const Q x(k, 200);
    bool on_left = false;
    for (int i = 1; i <= 4; ++i) on_left = on_left || f.left(i) == x;
    if (on_left) continue;
    const Q r = reflection(f.evaluate(x));
    EXPECT_EQ(f.locate(r), f.locate(x));
    EXPECT_EQ(reflection(f.evaluate(r)), x);
  }
  EXPECT_FALSE(is_symmetric(Iem<Q>(Permutation(kFig1), kFig1Lengths)).symmetric);
}

// [PAPER] Figure 4: a period-3 orbit of intervals with the (B,B,3) connection.
TEST(Iem, Figure4PeriodicIntervals) {
  const Iem<Q> f(Permutation::reversing(4), kFig4);
  const auto pis = periodic_intervals(f, 6);
  ASSERT_EQ(pis.size(), 3u);
  for (const auto& p : pis) {
    EXPECT_EQ(p.period, 3);
    EXPECT_EQ(p.orbit_id, pis[0].orbit_id);
    EXPECT_TRUE(p.symmetric_partner_offset.has_value());
    EXPECT_EQ(p.right - p.left, Q(2, 25));
  }
  // [DERIVED] endpoints, checked below against a brute-force period scan
  EXPECT_EQ(pis[0].left, Q(7, 50));
  EXPECT_EQ(pis[1].left, Q(23, 50));
  EXPECT_EQ(pis[2].left, Q(39, 50));
  EXPECT_EQ(pis[0].itinerary, (std::vector<int>{2, 2, 4}));
}

TEST(Iem, Figure4PeriodicIntervalsMatchBruteForceScan) {
  const Iem<Q> f(Permutation::reversing(4), kFig4);
  const auto pis = periodic_intervals(f, 6);
  const int n = 1000;
  for (int k = 0; k < n; ++k) {
    const Q x(2 * k + 1, 2 * n);
    int period = 0;
    Q z = x;
    for (int m = 1; m <= 6 && !period; ++m) {
      z = f.evaluate(z);
      if (z == x) period = m;
    }
    bool inside = false;
    for (const auto& p : pis) inside = inside || (x >= p.left && x < p.right);
    EXPECT_EQ(inside, period == 3) << "x = " << x;
    EXPECT_TRUE(period == 0 || period == 3) << "x = " << x;
  }
}

namespace {

// Independent saddle-connection oracle: direct endpoint iteration with the
// left limit of F computed as F(x - h) + h for a tiny rational h.
std::set<std::tuple<int, int, int, int>> oracle_connections(const Iem<Q>& f, int m_max) {
  std::set<std::tuple<int, int, int, int>> out;
  const int d = f.size();
  const Q h(1, 1000000007);
  for (int a = 1; a <= d; ++a) {
    Q x = f.left(a);
    for (int m = 1; m <= m_max; ++m) {
      x = f.evaluate(x);
      for (int b = 1; b <= d; ++b)
        if (x == f.left(b)) out.insert({a, b, m, 0});
    }
    Q y = f.right(a);
    for (int m = 1; m <= m_max; ++m) {
      y = wrap01(f.evaluate(y - h) + h);
      if (y == 0) y = 1;
      for (int b = 1; b <= d; ++b)
        if (y == f.right(b)) out.insert({a, b, m, 1});
    }
  }
  return out;
}

}  // namespace

TEST(Iem, Figure4SaddleConnections) {
  const Iem<Q> f(Permutation::reversing(4), kFig4);
  const auto sc = saddle_connections(f, 6);
  std::set<std::tuple<int, int, int, int>> got;
  for (const auto& c : sc) got.insert({c.alpha, c.beta, c.m, c.side == Side::left ? 0 : 1});
  EXPECT_EQ(got, oracle_connections(f, 6));
  EXPECT_TRUE(got.count({2, 2, 3, 0}));  // (B,B,3) left
  EXPECT_TRUE(got.count({2, 2, 3, 1}));  // (B,B,3) right
}

TEST(Iem, FloatAgreesWithRationalOnFigure4) {
  const Iem<Q> fq(Permutation::reversing(4), kFig4);
  const Iem<double> fd = to_double(fq);
  const auto a = periodic_intervals(fq, 6);
  const auto b = periodic_intervals(fd, 6);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t k = 0; k < a.size(); ++k) {
    EXPECT_NEAR(static_cast<double>(a[k].left), b[k].left, 1e-12);
    EXPECT_NEAR(static_cast<double>(a[k].right), b[k].right, 1e-12);
    EXPECT_EQ(a[k].itinerary, b[k].itinerary);
  }
  EXPECT_EQ(saddle_connections(fq, 6), saddle_connections(fd, 6));
}

TEST(Iem, MidpointsOfSymmetricPeriodicIntervals) {
  const Iem<Q> f(Permutation::reversing(4), kFig4);
  for (const auto& p : periodic_intervals(f, 6)) {
    const Q c = (p.left + p.right) / 2;
    Q z = c;
    for (int k = 0; k < p.period; ++k) z = f.evaluate(z);
    EXPECT_EQ(z, c);
  }
}

TEST(Iem, RotationHasNoPeriodicIntervalsBeyondItsPeriod) {
  // reversing 2-IEM is a rotation; by 1/3 every point has period 3
  const Iem<Q> f(Permutation::reversing(2), {Q(2, 3), Q(1, 3)});
  const auto pis = periodic_intervals(f, 5);
  ASSERT_FALSE(pis.empty());
  for (const auto& p : pis) EXPECT_EQ(p.period, 3);
  Q total = 0;
  for (const auto& p : pis) total += p.right - p.left;
  EXPECT_EQ(total, Q(1));
}

TEST(Iem, NoNonsymmetricIntervalsForRandomSymmetricMaps) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const int d = 3 + static_cast<int>(rng() % 3);
    std::vector<Q> l;
    for (int i = 0; i < d; ++i) l.emplace_back(1 + static_cast<long>(rng() % 16), 32);
    const Iem<Q> f(Permutation::reversing(d), l);
    const auto rep = verify_no_nonsymmetric(f, 10);
    EXPECT_TRUE(rep.pass);
  }
  EXPECT_THROW(verify_no_nonsymmetric(Iem<Q>(Permutation(kFig1), kFig1Lengths), 3), std::invalid_argument);
}

TEST(Iem, SwapDecompositionOfReversibleMap) {
  // G = F o W with F reversing and W swapping the two equal outer intervals
  const std::vector<Q> l = {Q(1, 4), Q(1, 6), Q(1, 3), Q(1, 4)};
  const Iem<Q> w(Permutation({4, 2, 3, 1}), l);
  const Iem<Q> f(Permutation::reversing(4), {Q(1, 4), Q(1, 6), Q(1, 3), Q(1, 4)});
  const Iem<Q> g = compose(f, w);
  auto sd = swap_decompose(g);
  ASSERT_TRUE(sd.has_value());
  EXPECT_TRUE(sd->symmetric.perm().is_reversing());
  EXPECT_TRUE(sd->swap.is_involution());
  const Iem<Q> w2(sd->swap, g.canonical().lengths());
  const Iem<Q> back = compose(sd->symmetric, w2);
  for (int k = 0; k < 120; ++k) EXPECT_EQ(back.evaluate(Q(k, 120)), g.evaluate(Q(k, 120)));
}

TEST(Iem, SwapDecompositionOfSymmetricMapIsTrivial) {
  const Iem<Q> f(Permutation::reversing(4), kFig4);
  auto sd = swap_decompose(f);
  ASSERT_TRUE(sd.has_value());
  EXPECT_EQ(sd->swap.final_order(), (std::vector<int>{1, 2, 3, 4}));
  EXPECT_EQ(sd->symmetric, f);
}

TEST(Iem, SwapDecompositionRejectsIrreversibleMap) {
  EXPECT_FALSE(swap_decompose(Iem<Q>(Permutation(kFig1), kFig1Lengths)).has_value());
}

TEST(Cem, ArcsAndEvaluation) {
  const Cem<Q> c(Permutation::reversing(2), {Q(1, 4), Q(3, 4)}, Q(1, 10), Q(1, 5));
  EXPECT_EQ(c.arc_left(1), Q(1, 10));
  EXPECT_EQ(c.arc_left(2), Q(7, 20));
  EXPECT_EQ(c.locate(Q(1, 20)), 2);  // wraps past 1
  // F(x) = x + omega - theta0 + theta1 on J_1: omega_1 = 3/4
  EXPECT_EQ(c.evaluate(Q(1, 5)), Q(1, 20));
  EXPECT_EQ(c.reflect(Q(0)), Q(3, 10));
  EXPECT_TRUE(c.is_symmetric().symmetric);
}

TEST(Cem, ReducesToIemAtZeroAngles) {
  const Cem<Q> c(Permutation::reversing(4), kFig4, Q(0), Q(0));
  const Iem<Q> f(Permutation::reversing(4), kFig4);
  for (int k = 0; k < 100; ++k) EXPECT_EQ(c.evaluate(Q(k, 100)), f.evaluate(Q(k, 100)));
  EXPECT_EQ(saddle_connections(c, 6), saddle_connections(f, 6));
}

TEST(Cem, ReflectionConjugatesToInverse) {
  const Cem<Q> c(Permutation::reversing(3), {Q(1, 5), Q(1, 3), Q(7, 15)}, Q(1, 7), Q(2, 9));
  for (int k = 0; k < 90; ++k) {
    const Q x(2 * k + 1, 180);
    // R F R F = id away from arc endpoints
    EXPECT_EQ(c.reflect(c.evaluate(c.reflect(c.evaluate(x)))), x);
  }
}
