#include "fiem/family.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace fiem;

namespace {

using Q = Rational;

std::vector<Q> qv(std::initializer_list<double> v) {
  std::vector<Q> out;
  for (double x : v) out.push_back(parse_rational(std::to_string(x)));
  return out;
}

Family three_iem() { return Family::linear(Permutation::reversing(3), qv({0.25, 0.3, 0.45}), qv({0.45, 0.3, 0.25})); }

Family figure8() {
  return Family::linear(Permutation::reversing(4), qv({0.07, 0.06, 0.13, 0.29}), qv({0.12, 0.23, 0.29, 0.45}));
}

}  // namespace

TEST(Family, LinearInterpolation) {
  const Family f = three_iem();
  const auto l = f.lambda_at(0.5);
  EXPECT_NEAR(l[0], 0.35, 1e-15);
  EXPECT_NEAR(l[1], 0.3, 1e-15);
  EXPECT_NEAR(l[2], 0.35, 1e-15);
  const auto dl = f.lambda_deriv(0.3);
  EXPECT_NEAR(dl[0], 0.2, 1e-15);
  EXPECT_NEAR(dl[2], -0.2, 1e-15);
}

TEST(Family, EndpointsNormalizedWithWarning) {
  std::vector<std::string> seen;
  auto saved = warning_sink();
  warning_sink() = [&](std::string_view m) { seen.emplace_back(m); };
  const Family f = figure8();
  warning_sink() = saved;
  EXPECT_EQ(seen.size(), 2u);  // both endpoints off by a factor
  EXPECT_EQ(f.lambda0_exact()[0], Q(7, 55));
  EXPECT_EQ(f.lambda1_exact()[3], Q(45, 109));
}

TEST(Family, NormalizationOnGrid) {
  const Family f = figure8();
  for (int k = 0; k <= 1000; ++k) {
    double s = 0;
    for (double v : f.lambda_at(k / 1000.0)) s += v;
    EXPECT_NEAR(s, 1.0, 1e-12);
  }
}

TEST(Family, MidpointIdentityForReversingFamilies) {
  const Family f = figure8();
  for (int k = 0; k <= 100; ++k) {
    const double y = k / 100.0;
    const auto m = f.midpoints(y);
    const auto w = f.omega_at(y);
    for (int i = 0; i < 4; ++i) EXPECT_NEAR(m[i], (1 - w[i]) / 2, 1e-12);
  }
}

TEST(Family, SubregionLookupMatchesIemAt) {
  const Family f = figure8();
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0, 1);
  for (int k = 0; k < 100; ++k) {
    const double x = u(rng), y = u(rng);
    EXPECT_EQ(f.slice(x, y).alpha, f.iem_at(y).locate(x));
    EXPECT_TRUE(f.in_subregion(f.slice(x, y).alpha, x, y));
  }
}

TEST(Family, SliceCarriesTranslationAndDerivative) {
  const Family f = three_iem();
  const Slice s = f.slice(0.1, 0.5);
  EXPECT_EQ(s.alpha, 1);
  EXPECT_NEAR(s.left, 0, 1e-15);
  EXPECT_NEAR(s.right, 0.35, 1e-15);
  // reversing: omega_1 = lambda_2 + lambda_3
  EXPECT_NEAR(s.omega, 0.65, 1e-15);
  EXPECT_NEAR(s.domega, -0.2, 1e-15);
  const Slice t = f.image_slice(0.9, 0.5);  // the image of I_1 is [0.65, 1)
  EXPECT_EQ(t.alpha, 1);
}

TEST(Family, ExactIemAtRationalY) {
  const Family f = three_iem();
  const Iem<Q> g = f.iem_at_exact(Q(1, 2));
  EXPECT_EQ(g.lengths(), (std::vector<Q>{Q(7, 20), Q(3, 10), Q(7, 20)}));
  EXPECT_EQ(g.omega()[0], Q(13, 20));
}

TEST(Family, DomainChecks) {
  const Family f = Family::linear(Permutation::reversing(3), qv({0.25, 0.3, 0.45}), qv({0.45, 0.3, 0.25}), 0.2, 0.8);
  EXPECT_THROW(f.lambda_at(0.1), DomainError);
  EXPECT_THROW(f.iem_at(0.9), DomainError);
  EXPECT_NO_THROW(f.iem_at(0.2));
  EXPECT_THROW(Family::linear(Permutation::reversing(2), qv({1, 0}), qv({0.5, 0.5})), std::invalid_argument);
}

TEST(Family, PeriodicYAllowsVanishingEndLengths) {
  const Family f = Family::linear(Permutation::reversing(2), {Q(1), Q(0)}, {Q(0), Q(1)}, 0, 1, true);
  EXPECT_TRUE(f.periodic_y());
  EXPECT_TRUE(f.ends_agree());
  EXPECT_DOUBLE_EQ(f.wrap_y(1.25), 0.25);
  EXPECT_DOUBLE_EQ(f.wrap_y(-0.25), 0.75);
  EXPECT_DOUBLE_EQ(f.wrap_y(1.0), 0.0);
  // omega'(y) = 1 on both intervals: the standard-map twist
  EXPECT_NEAR(f.omega_deriv(0.3, 1), 1.0, 1e-15);
  EXPECT_NEAR(f.omega_deriv(0.3, 2), 1.0, 1e-15);
}

TEST(Family, ConstantFamily) {
  const Family f = Family::constant(Permutation::reversing(4), qv({0.14, 0.4, 0.1, 0.36}));
  EXPECT_EQ(f.kind(), Family::Kind::constant);
  EXPECT_EQ(f.omega_deriv(0.3), std::vector<double>(4, 0.0));
  EXPECT_EQ(f.iem_at_exact(Q(1, 3)).lengths()[0], Q(7, 50));
}

TEST(Family, CallbackFamily) {
  auto lam = [](double y) { return std::vector<double>{0.3 + 0.1 * y * y, 0.7 - 0.1 * y * y}; };
  auto dlam = [](double y) { return std::vector<double>{0.2 * y, -0.2 * y}; };
  const Family f = Family::callback(Permutation::reversing(2), lam, dlam, 0, 1);
  EXPECT_NEAR(f.lambda_at(0.5)[0], 0.325, 1e-15);
  EXPECT_NEAR(f.omega_deriv(0.5, 1), -0.1, 1e-15);
  EXPECT_THROW(f.iem_at_exact(Q(1, 2)), std::invalid_argument);
  auto bad = [](double y) { return std::vector<double>{y, 1 - y}; };
  EXPECT_THROW(Family::callback(Permutation::reversing(2), bad, dlam, 0, 1), std::invalid_argument);
}
