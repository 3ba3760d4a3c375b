#pragma once

/// @file verify.hpp
/// @brief Invariant suites of all modules, run against one configured family.

#include "fiem/orbits.hpp"

#include <random>
#include <string>
#include <vector>

namespace fiem {

struct CheckResult {
  std::string suite;
  std::string name;
  bool passed = true;
  std::string detail;
};

struct VerifyOptions {
  int samples = 1000;
  unsigned rng_seed = 7;
  Rational y = Rational(1, 2);  // family parameter for the exchange-map suites
  int q_max = 6;
  int lines = 3;                // symmetry-line suites use |i| <= lines
  OrbitOptions orbit;
};

namespace detail {

inline std::string num(double v) {
  std::ostringstream os;
  os.precision(3);
  os << v;
  return os.str();
}

template <class S>
S random_point(std::mt19937_64& rng) {
  if constexpr (std::is_same_v<S, Rational>) {
    const long den = 1009;
    return Rational(static_cast<long>(rng() % den), den);
  } else {
    return std::uniform_real_distribution<double>(0, 1)(rng);
  }
}

template <class S>
bool close(const S& a, const S& b) {
  if constexpr (std::is_same_v<S, Rational>) return a == b;
  else return circle_dist(a, b) <= 1e-12;
}

}  // namespace detail

/// Exchange-map invariants: partition, compose/evaluate, inverse, local
/// reflection, periodic intervals and their midpoints.
template <class S>
std::vector<CheckResult> verify_iem(const Iem<S>& f, const VerifyOptions& opt) {
  using Traits = ScalarTraits<S>;
  std::vector<CheckResult> out;
  std::mt19937_64 rng(opt.rng_seed);
  const std::string suite = "iem_core";

  {
    std::vector<std::pair<S, S>> img;
    for (int i = 1; i <= f.size(); ++i) img.emplace_back(f.left(i) + f.omega()[i - 1], f.right(i) + f.omega()[i - 1]);
    std::sort(img.begin(), img.end());
    bool ok = Traits::eq(img.front().first, S(0)) && Traits::eq(img.back().second, S(1));
    for (std::size_t k = 1; k < img.size(); ++k) ok = ok && Traits::eq(img[k - 1].second, img[k].first);
    out.push_back({suite, "image intervals tile [0,1)", ok, ""});
  }
  {
    const Iem<S> g = f.inverse();
    const Iem<S> fg = compose(f, f);
    int bad = 0;
    for (int k = 0; k < opt.samples; ++k) {
      const S x = detail::random_point<S>(rng);
      if (!detail::close(fg.evaluate(x), f.evaluate(f.evaluate(x)))) ++bad;
    }
    out.push_back({suite, "compose agrees with evaluate", bad == 0, std::to_string(bad) + " mismatches"});
    out.push_back({suite, "inverse is an involution", g.inverse() == f, ""});
    const Iem<S> id = compose(f, g).canonical();
    out.push_back({suite, "F o F^-1 reduces to the identity", id.size() == 1 && Traits::is_zero(id.omega()[0]), ""});
  }
  if (f.perm().is_reversing()) {
    int bad = 0;
    for (int k = 0; k < opt.samples; ++k) {
      const S x = detail::random_point<S>(rng);
      const S rfx = reflection(f.evaluate(x));
      // left endpoints reflect onto the excluded right ends
      auto near = [&](const S& v) {
        return std::any_of(f.left_endpoints().begin(), f.left_endpoints().end(), [&](const S& l) {
          if constexpr (Traits::exact) return l == v;
          else return circle_dist(l, v) < 1e-9;
        });
      };
      if (near(x) || near(rfx)) continue;
      if (f.locate(rfx) != f.locate(x) || !detail::close(reflection(f.evaluate(rfx)), x)) ++bad;
    }
    out.push_back({suite, "R o F is the local reflection", bad == 0, std::to_string(bad) + " failures"});
  }

  const auto pis = periodic_intervals(f, opt.q_max);
  const auto sc = saddle_connections(f, opt.q_max);
  {
    bool disjoint = true, bounded = true, mid = true;
    std::map<int, std::vector<const PeriodicInterval<S>*>> orbits;
    for (const auto& p : pis) orbits[p.orbit_id].push_back(&p);
    for (const auto& [id, members] : orbits) {
      const auto& j = *members.front();
      // all intervals of the orbit: images of the representative
      std::vector<std::pair<S, S>> iv;
      S a = j.left, b = j.right;
      for (int k = 0; k < j.period; ++k) {
        iv.emplace_back(a, b);
        const S w = f.omega()[j.itinerary[k] - 1];
        a += w;
        b += w;
      }
      std::sort(iv.begin(), iv.end());
      for (std::size_t k = 1; k < iv.size(); ++k) disjoint = disjoint && !Traits::lt(iv[k].first, iv[k - 1].second);
      auto touches = [&](Side side) {
        for (const auto& c : sc) {
          if (c.side != side || c.m > j.period) continue;
          const S e = side == Side::left ? f.left(c.alpha) : f.right(c.alpha);
          for (const auto& [l, r] : iv)
            if (Traits::eq(side == Side::left ? l : r, e)) return true;
        }
        return false;
      };
      bounded = bounded && touches(Side::left) && touches(Side::right);
      if (f.perm().is_reversing()) {
        const S c = (j.left + j.right) / S(2);
        S z = c;
        for (int k = 0; k < j.period; ++k) z = f.evaluate(z);
        bool on_orbit = false;
        for (const auto& [l, r] : iv) on_orbit = on_orbit || Traits::eq((l + r) / S(2), reflection(c));
        mid = mid && detail::close(z, c) && on_orbit;
      }
    }
    out.push_back({suite, "periodic-interval orbits are pairwise disjoint", disjoint, std::to_string(pis.size()) + " intervals"});
    out.push_back({suite, "periodic intervals bounded by saddle connections", bounded, ""});
    if (f.perm().is_reversing()) {
      out.push_back({suite, "midpoints of periodic intervals are symmetric periodic points", mid, ""});
      auto rep = verify_no_nonsymmetric(f, opt.q_max);
      out.push_back({suite, "no non-symmetric periodic intervals", rep.pass, std::to_string(rep.checked) + " checked"});
    }
  }
  return out;
}

inline std::vector<CheckResult> verify_family(const Family& fam, const VerifyOptions& opt) {
  std::vector<CheckResult> out;
  std::mt19937_64 rng(opt.rng_seed + 1);
  std::uniform_real_distribution<double> ux(0, 1), uy(fam.y_min(), fam.y_max());
  const std::string suite = "fiem";
  int bad = 0;
  for (int k = 0; k < 100; ++k) {
    const double x = ux(rng), y = uy(rng);
    if (fam.slice(x, y).alpha != fam.iem_at(y).locate(x)) ++bad;
  }
  out.push_back({suite, "subregion lookup matches iem_at", bad == 0, std::to_string(bad) + " mismatches"});
  double worst_sum = 0, worst_mid = 0;
  for (int k = 0; k <= 1000; ++k) {
    const double y = fam.y_min() + (fam.y_max() - fam.y_min()) * k / 1000.0;
    if (fam.periodic_y() && (k == 0 || k == 1000)) continue;
    double s = 0;
    for (double l : fam.lambda_at(y)) s += l;
    worst_sum = std::max(worst_sum, std::abs(s - 1));
    if (fam.is_symmetric()) {
      const auto m = fam.midpoints(y);
      const auto w = fam.omega_at(y);
      for (int i = 0; i < fam.size(); ++i) worst_mid = std::max(worst_mid, std::abs(wrap_half(m[i] - (1 - w[i]) / 2)));
    }
  }
  out.push_back({suite, "lengths sum to 1", worst_sum <= 1e-12, "max error " + detail::num(worst_sum)});
  if (fam.is_symmetric())
    out.push_back({suite, "midpoint identity m = (1 - omega)/2", worst_mid <= 1e-12, "max error " + detail::num(worst_mid)});
  return out;
}

namespace detail {

/// Distance from x to the nearest discontinuity of F_y or of its image.
inline double discontinuity_distance(const Family& fam, double x, double y) {
  double d = 1;
  const Iem<double> f = fam.iem_at(y);
  for (int i = 1; i <= f.size(); ++i) {
    d = std::min(d, circle_dist(x, f.left(i)));
    d = std::min(d, circle_dist(x, f.left(i) + f.omega()[i - 1]));
  }
  return d;
}

inline double phase_dist(const PerturbedMap& T, const PhasePoint& a, const PhasePoint& b) {
  return cylinder_dist(T, a, b);
}

}  // namespace detail

/// Reversibility, involutions, area preservation, fibration at eps = 0 and L structure.
inline std::vector<CheckResult> verify_perturbed_map(const PerturbedMap& T, const VerifyOptions& opt) {
  std::vector<CheckResult> out;
  const Family& fam = T.family();
  const std::string suite = "perturbed_map";
  std::mt19937_64 rng(opt.rng_seed + 2);
  std::uniform_real_distribution<double> ux(0, 1);
  // keep away from the boundary of P so that one step and S stay inside
  const double margin = fam.periodic_y() ? 0 : 0.05 * (fam.y_max() - fam.y_min());
  std::uniform_real_distribution<double> uy(fam.y_min() + margin, fam.y_max() - margin);
  const PerturbedMap T0 = T.with_eps(0);
  double rev = 0, ss = 0, ll = 0, area = 0, fib = 0;
  int l_bad = 0, used = 0;
  for (int k = 0; k < opt.samples; ++k) {
    const PhasePoint p = T.make_point(ux(rng), uy(rng));
    try {
      ss = std::max(ss, detail::phase_dist(T, T.symmetry_S(T.symmetry_S(p)), p));
      const PhasePoint l = T.local_symmetry_L(p);
      if (detail::discontinuity_distance(fam, p.x, p.y) > 1e-9) {
        ll = std::max(ll, detail::phase_dist(T, T.local_symmetry_L(l), p));
        if (l.y != p.y || fam.slice(l.x, l.y).alpha != p.alpha) ++l_bad;
      }
      const PhasePoint q0 = T0.step(p);
      fib = std::max(fib, std::abs(q0.y - p.y));
      const PhasePoint tp = T.step(p);
      if (detail::discontinuity_distance(fam, p.x, p.y) < 1e-6 ||
          detail::discontinuity_distance(fam, tp.x, tp.y) < 1e-6)
        continue;
      ++used;
      rev = std::max(rev, detail::phase_dist(T, T.symmetry_S(T.step(T.symmetry_S(tp))), p));
      const double h = 1e-7;
      auto image = [&](double dx, double dy) { return T.step({wrap01(p.x + dx), p.y + dy, 0}); };
      const PhasePoint ax = image(h, 0), bx = image(-h, 0), ay = image(0, h), by = image(0, -h);
      if (ax.alpha == 0 || bx.alpha == 0) continue;
      auto dy = [&](double a, double b) {
        if (!fam.periodic_y()) return a - b;
        const double w = fam.y_max() - fam.y_min();
        return w * wrap_half((a - b) / w);
      };
      const double j11 = wrap_half(ax.x - bx.x) / (2 * h), j21 = dy(ax.y, bx.y) / (2 * h);
      const double j12 = wrap_half(ay.x - by.x) / (2 * h), j22 = dy(ay.y, by.y) / (2 * h);
      area = std::max(area, std::abs(j11 * j22 - j12 * j21 - 1));
    } catch (const BoundaryEscape&) {
    }
  }
  out.push_back({suite, "S o T o S o T = id", rev <= 1e-11, "max " + detail::num(rev) + " over " + std::to_string(used)});
  out.push_back({suite, "S o S = id", ss <= 1e-13, "max " + detail::num(ss)});
  out.push_back({suite, "L o L = id", ll <= 1e-13, "max " + detail::num(ll)});
  out.push_back({suite, "finite-difference det DT = 1", area <= 1e-5, "max " + detail::num(area)});
  out.push_back({suite, "eps = 0 keeps y fixed", fib == 0, "max " + detail::num(fib)});
  out.push_back({suite, "L preserves y and the subinterval", l_bad == 0, std::to_string(l_bad) + " failures"});
  return out;
}

/// Fixed-set residuals, pushforward consistency and period-dividing intersections.
inline std::vector<CheckResult> verify_symmetry(const PerturbedMap& T, const VerifyOptions& opt) {
  std::vector<CheckResult> out;
  const std::string suite = "symmetry";
  const LineOptions& lo = opt.orbit.lines;
  std::vector<SymmetryLineSet> lines;
  for (int i = -opt.lines; i <= opt.lines; ++i) lines.push_back(gamma(T, i, lo));
  double worst = 0;
  long samples = 0;
  for (const auto& set : lines)
    for (const auto& br : set.branches) {
      if (br.on_discontinuity) continue;
      for (const auto& seg : br.segments)
        for (const auto& z : seg.samples) {
          const PhasePoint w = base_point(T, br.base, z.y_param);
          const Slice sl = T.family().slice(w.x, w.y);
          if (w.x - sl.left < 1e-9 || sl.right - w.x < 1e-9) continue;  // base point on a discontinuity
          const double r = symmetry_residual(T, T.make_point(z.x, z.y), set.index);
          if (!std::isfinite(r)) continue;  // S leaves P
          ++samples;
          worst = std::max(worst, r);
        }
    }
  out.push_back({suite, "samples lie on their symmetry line", worst <= 1e-9,
                 "max " + detail::num(worst) + " over " + std::to_string(samples)});

  double push_err = 0;
  for (int b : {0, -1}) {
    const SymmetryLineSet base = gamma(T, b, lo);
    for (int n = -3; n <= 3; ++n) {
      if (std::abs(2 * n + b) > opt.lines) continue;
      const SymmetryLineSet& img = lines[2 * n + b + opt.lines];
      for (std::size_t k = 0; k < img.branches.size(); ++k)
        for (const auto& seg : img.branches[k].segments)
          for (const auto& z : seg.samples) {
            Pushed p = push(T, base_point(T, img.branches[k].base, z.y_param), n);
            if (p.valid) push_err = std::max(push_err, detail::cylinder_dist(T, p.p, {z.x, z.y, 0}));
          }
    }
  }
  out.push_back({suite, "lines are pushforwards of the base lines", push_err <= 1e-10, "max " + detail::num(push_err)});

  int refined = 0, bad = 0;
  for (std::size_t a = 0; a < lines.size(); ++a)
    for (std::size_t b = a + 1; b < lines.size(); ++b)
      for (const auto& c : intersections(T, lines[a], lines[b], lo)) {
        if (!c.refined) continue;
        ++refined;
        const int n = std::abs(c.j - c.k);
        Pushed back = push(T, T.make_point(c.x, c.y), n);
        if (!back.valid || !close_on_cylinder(T, back.p, T.make_point(c.x, c.y), 1e-10) ||
            c.divisor_period <= 0 || n % c.divisor_period != 0)
          ++bad;
      }
  out.push_back({suite, "refined intersections have period dividing |j-k|", bad == 0,
                 std::to_string(refined) + " refined, " + std::to_string(bad) + " failures"});
  return out;
}

/// Closure, placement, pairing, DG identity, oracle equivalence and residue scaling.
inline std::vector<CheckResult> verify_orbits(const PerturbedMap& T, const VerifyOptions& opt) {
  std::vector<CheckResult> out;
  const std::string suite = "orbits";
  const Family& fam = T.family();
  const OrbitOptions& oo = opt.orbit;
  const int q_max = std::min(opt.q_max, 3);

  const SymmetricSearch found = find_symmetric(T, q_max, oo);
  bool closed = true, placed = true;
  for (const auto& o : found.orbits) {
    auto again = detail::orbit_points(T, o.points[0], o.q);
    closed = closed && again && detail::cylinder_dist(T, again->back(), o.points[0]) <= oo.tol_orbit &&
             minimal_period(T, o.points[0], o.q, oo.tol_orbit) == o.q;
    for (int line : o.symmetry_lines) placed = placed && symmetry_residual(T, o.points[0], line) <= 1e-8;
  }
  out.push_back({suite, "symmetric orbits close with minimal period", closed,
                 std::to_string(found.orbits.size()) + " orbits"});
  out.push_back({suite, "symmetric orbits lie on their symmetry lines", placed, ""});

  bool paired = true;
  int nonsym = 0;
  for (const auto& t : T.forcing().terms())
    for (const auto& o : found.orbits) {
      Prediction pr;
      try {
        pr = predict_nonsymmetric(T, o, t.harmonic, oo);
      } catch (const std::exception&) {
        continue;
      }
      for (const auto& n : confirm_prediction(T, pr, o.q, oo)) {
        ++nonsym;
        auto img = l_image(T, n, oo);
        bool ok = img && img->q == n.q && std::abs(img->residue - n.residue) <= 1e-8;
        if (ok)
          for (int k = 0; k < n.q; ++k) ok = ok && T.local_symmetry_L(n.points[k]).y == n.points[k].y;
        paired = paired && ok;
      }
    }
  out.push_back({suite, "non-symmetric orbits pair with their L-images", paired, std::to_string(nonsym) + " orbits"});

  {
    const PerturbedMap T0 = T.with_eps(0);
    std::mt19937_64 rng(opt.rng_seed + 3);
    std::uniform_real_distribution<double> ux(0, 1), uy(fam.y_min(), fam.y_max());
    double worst = 0;
    for (int k = 0; k < 100; ++k) {
      const PhasePoint p = T0.make_point(ux(rng), uy(rng));
      auto pts = detail::orbit_points(T0, p, 3);
      if (!pts) continue;
      std::vector<int> itin;
      double sw = 0, sf = 0;
      for (int j = 0; j < 3; ++j) {
        itin.push_back((*pts)[j].alpha);
        sw += fam.omega_deriv(p.y, (*pts)[j].alpha);
        sf += T.forcing().deriv((*pts)[j + 1].x);
      }
      const auto v = ResidualG(T0, itin)(p.x, p.y);
      worst = std::max(worst, std::abs(v.det() + sw * sf));
    }
    out.push_back({suite, "det DG = -(sum omega')(sum f') at eps = 0", worst <= 1e-9, "max " + detail::num(worst)});
  }

  {
    // symmetric periodic points of F_y on the primary lines versus interval midpoints
    const double y = static_cast<double>(opt.y);
    bool equal = true;
    std::string why;
    if (fam.contains(y) && fam.is_symmetric()) {
      const Iem<double> f = fam.iem_at(y);
      const auto pis = periodic_intervals(f, q_max);
      std::vector<double> mids;
      for (const auto& p : pis) mids.push_back(0.5 * (p.left + p.right));
      std::vector<double> cand{0.0, 0.5};
      for (double m : fam.midpoints(y)) cand.push_back(m);
      auto off_disc = [&](double x) {
        for (int i = 1; i <= f.size(); ++i)
          if (circle_dist(x, f.left(i)) < 1e-12) return false;
        return true;
      };
      for (double c : cand) {
        for (int q = 1; q <= q_max; ++q) {
          double z = c;
          bool smooth = true;
          for (int k = 0; k < q; ++k) {
            smooth = smooth && off_disc(z);
            z = f.evaluate(z);
          }
          if (!smooth || circle_dist(z, c) > 1e-12) continue;
          // minimal q: the whole orbit must be listed among the midpoints
          double w = c;
          for (int k = 0; k < q; ++k) {
            if (std::none_of(mids.begin(), mids.end(), [&](double m) { return circle_dist(m, w) <= 1e-12; })) {
              equal = false;
              why = "orbit of x = " + detail::num(c) + " missing from the oracle";
            }
            w = f.evaluate(w);
          }
          break;
        }
      }
      for (double m : mids) {
        double w = m;
        bool hit = false;
        for (int k = 0; k < opt.q_max && !hit; ++k) {
          hit = std::any_of(cand.begin(), cand.end(), [&](double c) { return circle_dist(c, w) <= 1e-12; });
          w = f.evaluate(w);
        }
        if (!hit) {
          equal = false;
          why = "midpoint " + detail::num(m) + " not on a primary line";
        }
      }
    }
    out.push_back({suite, "symmetric orbits at eps = 0 are the oracle midpoints", equal, why});
  }

  {
    // residue scaling on the first orbit with M != 0 found at eps = 1e-3
    const std::vector<double> eps{1e-3, 5e-4, 2.5e-4};
    const PerturbedMap T1 = T.with_eps(eps[0]);
    const SymmetricSearch s1 = find_symmetric(T1, q_max, oo);
    std::string detail_text = "no unbalanced orbit";
    bool ok = true;
    for (const auto& o : s1.orbits) {
      if (std::abs(o.M) < 1e-6) continue;
      std::vector<double> r;
      PhasePoint p = o.points[0];
      for (double e : eps) {
        const PerturbedMap Te = T.with_eps(e);
        NewtonResult nr = newton_refine(Te, p, o.q, oo);
        if (nr.status != NewtonResult::Status::converged || !nr.orbit) break;
        p = nr.orbit->points[0];
        r.push_back(std::abs(nr.orbit->residue + e * nr.orbit->M / 4));
      }
      if (r.size() != eps.size()) continue;
      const double floor = 1e-13;
      if (std::all_of(r.begin(), r.end(), [&](double v) { return v <= floor; })) {
        detail_text = "residual at roundoff (" + detail::num(r[0]) + ")";
      } else {
        const double slope = std::log(std::max(r[0], floor) / std::max(r[2], floor)) / std::log(eps[0] / eps[2]);
        ok = slope >= 1.9;
        detail_text = "log-log slope " + detail::num(slope);
      }
      break;
    }
    out.push_back({suite, "Res + eps M/4 = O(eps^2)", ok, detail_text});
  }
  return out;
}

/// All suites; the exchange-map suites run in the arithmetic of S.
template <class S>
std::vector<CheckResult> verify_all(const PerturbedMap& T, const VerifyOptions& opt) {
  std::vector<CheckResult> out;
  auto add = [&](std::vector<CheckResult> v) { out.insert(out.end(), v.begin(), v.end()); };
  const Family& fam = T.family();
  if constexpr (std::is_same_v<S, Rational>) {
    if (fam.kind() == Family::Kind::callback) {
      add(verify_iem(fam.iem_at(static_cast<double>(opt.y)), opt));
    } else {
      add(verify_iem(fam.iem_at_exact(opt.y), opt));
    }
  } else {
    add(verify_iem(fam.iem_at(static_cast<double>(opt.y)), opt));
  }
  add(verify_family(fam, opt));
  add(verify_perturbed_map(T, opt));
  add(verify_symmetry(T, opt));
  add(verify_orbits(T, opt));
  return out;
}

}  // namespace fiem
