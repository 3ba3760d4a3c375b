#pragma once

/// @file orbits.hpp
/// @brief Periodic orbits of the perturbed map: search, Newton refinement,
/// stability (M and residue), balance, non-symmetric prediction and eps-continuation.

#include "fiem/symmetry_lines.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace fiem {

enum class StabilityClass { elliptic, hyperbolic, hyperbolic_with_reflection, parabolic };

inline std::string to_string(StabilityClass c) {
  switch (c) {
    case StabilityClass::elliptic: return "elliptic";
    case StabilityClass::hyperbolic: return "hyperbolic";
    case StabilityClass::hyperbolic_with_reflection: return "hyperbolic-with-reflection";
    case StabilityClass::parabolic: return "parabolic";
  }
  return "?";
}

struct OrbitOptions {
  double tol_orbit = 1e-10;
  double tol_res = 1e-12;
  double tol_bal = 1e-9;
  double eps_floor = 1e-8;
  int newton_max_iter = 50;
  double newton_tol = 1e-12;
  double det_tol = 1e-14;
  double delta_seed = 1e-3;
  int seed_ladder = 7;
  int scan_samples = 2000;
  double event_window = 5e-3;
  LineOptions lines;
};

struct BalanceSums {
  int harmonic = 0;
  double S = 0, C = 0;
  bool balanced = false;
};

struct OrbitRecord {
  int q = 0;
  std::vector<PhasePoint> points;
  double eps = 0;
  bool symmetric = false;
  std::vector<int> symmetry_lines;  // lines through points[0] when symmetric
  std::vector<int> itinerary;
  double M = 0;
  double residue = 0;
  StabilityClass cls = StabilityClass::parabolic;
  bool residue_reliable = true;
  std::vector<BalanceSums> balance;
  double closure = 0;
};

inline StabilityClass classify(double res, double tol_res) {
  if (std::abs(res) <= tol_res || std::abs(res - 1) <= tol_res) return StabilityClass::parabolic;
  if (res < 0) return StabilityClass::hyperbolic;
  if (res < 1) return StabilityClass::elliptic;
  return StabilityClass::hyperbolic_with_reflection;
}

/// G(x0, y0) = (x_q - x0 wrapped to (-1/2, 1/2], sum_{k=1..q} f(x_k)) along a
/// frozen itinerary, with DG by forward accumulation of the partials.
class ResidualG {
 public:
  struct Value {
    double g1 = 0, g2 = 0;
    Mat2 dg{};
    double det() const { return dg[0][0] * dg[1][1] - dg[0][1] * dg[1][0]; }
  };

  ResidualG(const PerturbedMap& T, std::vector<int> itinerary) : T_(T), itin_(std::move(itinerary)) {}

  const std::vector<int>& itinerary() const { return itin_; }

  Value operator()(double x0, double y0) const {
    const Family& fam = T_.family();
    const double eps = T_.eps();
    double x = x0, y = y0;
    double dxx = 1, dxy = 0, dyx = 0, dyy = 1;  // d(x_k, y_k)/d(x0, y0)
    Value v;
    double d2x = 0, d2y = 0;
    for (int a : itin_) {
      const double ye = fam.periodic_y() ? fam.wrap_y(y) : y;
      const Slice s = fam.slice_of(a, ye);
      x += s.omega;
      dxx += s.domega * dyx;
      dxy += s.domega * dyy;
      const double fv = T_.forcing()(x), fp = T_.forcing().deriv(x);
      y += eps * fv;
      dyx += eps * fp * dxx;
      dyy += eps * fp * dxy;
      v.g2 += fv;
      d2x += fp * dxx;
      d2y += fp * dxy;
    }
    v.g1 = wrap_half(x - x0);
    v.dg = Mat2{{{dxx - 1, dxy}, {d2x, d2y}}};
    return v;
  }

 private:
  const PerturbedMap& T_;
  std::vector<int> itin_;
};

namespace detail {

inline double cylinder_dist(const PerturbedMap& T, const PhasePoint& a, const PhasePoint& b) {
  double dy = a.y - b.y;
  if (T.family().periodic_y()) {
    const double w = T.family().y_max() - T.family().y_min();
    dy = w * wrap_half(dy / w);
  }
  return std::hypot(circle_dist(a.x, b.x), dy);
}

/// Orbit of length q from p, or nullopt on boundary escape.
inline std::optional<std::vector<PhasePoint>> orbit_points(const PerturbedMap& T, PhasePoint p, int q) {
  std::vector<PhasePoint> pts;
  try {
    for (int k = 0; k < q; ++k) {
      pts.push_back(p);
      p = T.step(p);
    }
    pts.push_back(p);
  } catch (const BoundaryEscape&) {
    return std::nullopt;
  }
  return pts;
}

}  // namespace detail

/// M(X) = (sum f'(x_k)) (sum omega'_{alpha_k}(y_0)).
inline double evaluate_M(const PerturbedMap& T, const OrbitRecord& o) {
  double sf = 0, sw = 0;
  const double y0 = o.points.at(0).y;
  for (const auto& p : o.points) {
    sf += T.forcing().deriv(p.x);
    sw += T.family().slice_of(p.alpha, y0).domega;
  }
  return sf * sw;
}

/// Res = (2 - tr D(T^q)) / 4 and whether every point is clear of discontinuities.
inline std::pair<double, bool> residue(const PerturbedMap& T, const OrbitRecord& o) {
  Mat2 m = mat_identity();
  bool reliable = true;
  for (const auto& p : o.points) {
    StepJacobian j = T.jacobian_step(p);
    m = mat_mul(j.m, m);
    if (j.near_discontinuity) reliable = false;
  }
  return {(2 - (m[0][0] + m[1][1])) / 4, reliable};
}

inline BalanceSums balance(const OrbitRecord& o, int harmonic, double tol_bal = 1e-9) {
  BalanceSums b;
  b.harmonic = harmonic;
  for (const auto& p : o.points) {
    b.S += sin2pi(harmonic * p.x);
    b.C += cos2pi(harmonic * p.x);
  }
  b.balanced = std::abs(b.S) <= tol_bal && std::abs(b.C) <= tol_bal;
  return b;
}

/// Smallest p | q with T^p(z) = z within tol, or 0 if none.
inline int minimal_period(const PerturbedMap& T, const PhasePoint& z, int q, double tol) {
  PhasePoint p = z;
  try {
    for (int k = 1; k <= q; ++k) {
      p = T.step(p);
      if (q % k == 0 && detail::cylinder_dist(T, p, z) <= tol) return k;
    }
  } catch (const BoundaryEscape&) {
  }
  return 0;
}

/// S maps the orbit onto itself.
inline bool orbit_is_symmetric(const PerturbedMap& T, const std::vector<PhasePoint>& pts, double tol = 1e-8) {
  for (const auto& p : pts) {
    const PhasePoint s = T.symmetry_S(p);
    bool hit = false;
    for (const auto& r : pts)
      if (detail::cylinder_dist(T, s, r) <= tol) {
        hit = true;
        break;
      }
    if (!hit) return false;
  }
  return true;
}

/// Fills every derived field of a record from its start point; nullopt if the
/// point does not close up under T^q.
inline std::optional<OrbitRecord> make_record(const PerturbedMap& T, PhasePoint start, int q,
                                              const OrbitOptions& opt = {}) {
  start = T.make_point(start.x, start.y);
  auto pts = detail::orbit_points(T, start, q);
  if (!pts) return std::nullopt;
  OrbitRecord o;
  o.q = q;
  o.eps = T.eps();
  o.closure = detail::cylinder_dist(T, pts->back(), start);
  if (o.closure > opt.tol_orbit) return std::nullopt;
  pts->pop_back();
  double sum_f = 0;
  for (std::size_t k = 1; k <= pts->size(); ++k) sum_f += T.forcing()((*pts)[k % pts->size()].x);
  if (std::abs(sum_f) > opt.tol_orbit / std::max(T.eps(), opt.eps_floor)) return std::nullopt;
  o.points = *pts;
  o.symmetric = orbit_is_symmetric(T, o.points);
  if (o.symmetric) {
    // rotate so that points[0] is the lowest orbit point on a primary line
    int best = -1;
    int best_line = 0;
    for (int k = 0; k < q; ++k)
      for (int line : {0, -1})
        if (symmetry_residual(T, o.points[k], line) <= 1e-8) {
          if (best < 0 || o.points[k].y < o.points[best].y ||
              (o.points[k].y == o.points[best].y && o.points[k].x < o.points[best].x)) {
            best = k;
            best_line = line;
          }
        }
    if (best > 0) std::rotate(o.points.begin(), o.points.begin() + best, o.points.end());
    if (best >= 0) o.symmetry_lines = {best_line, best_line + q};
  }
  for (const auto& p : o.points) o.itinerary.push_back(p.alpha);
  o.M = evaluate_M(T, o);
  auto [res, reliable] = residue(T, o);
  o.residue = res;
  o.residue_reliable = reliable;
  o.cls = classify(res, opt.tol_res);
  for (const auto& t : T.forcing().terms()) o.balance.push_back(balance(o, t.harmonic, opt.tol_bal));
  return o;
}

struct NewtonResult {
  enum class Status { converged, singular, diverged, itinerary_mismatch, escaped };
  Status status = Status::diverged;
  std::optional<OrbitRecord> orbit;
  PhasePoint last;                  // final iterate
  std::vector<int> observed;        // itinerary observed at the final iterate
  int iterations = 0;
  double det = 0;
};

inline std::string to_string(NewtonResult::Status s) {
  switch (s) {
    case NewtonResult::Status::converged: return "converged";
    case NewtonResult::Status::singular: return "singular";
    case NewtonResult::Status::diverged: return "diverged";
    case NewtonResult::Status::itinerary_mismatch: return "itinerary-mismatch";
    case NewtonResult::Status::escaped: return "escaped";
  }
  return "?";
}

/// Newton on G with the seed's itinerary frozen; the itinerary is revalidated
/// on the converged orbit.
inline NewtonResult newton_refine(const PerturbedMap& T, PhasePoint seed, int q, const OrbitOptions& opt = {}) {
  NewtonResult r;
  if (q < 1) throw std::invalid_argument("q must be >= 1");
  seed = T.make_point(seed.x, seed.y);
  auto pts = detail::orbit_points(T, seed, q);
  if (!pts) {
    r.status = NewtonResult::Status::escaped;
    r.last = seed;
    return r;
  }
  std::vector<int> itin;
  for (int k = 0; k < q; ++k) itin.push_back((*pts)[k].alpha);
  ResidualG G(T, itin);
  double x = seed.x, y = seed.y;
  const Family& fam = T.family();
  bool converged = false;
  for (int it = 0; it <= opt.newton_max_iter; ++it) {
    r.iterations = it;
    auto v = G(x, y);
    r.det = v.det();
    if (std::hypot(v.g1, v.g2) <= opt.newton_tol) {
      converged = true;
      break;
    }
    if (it == opt.newton_max_iter) break;
    if (std::abs(r.det) < opt.det_tol) {
      r.status = NewtonResult::Status::singular;
      r.last = {x, y, 0};
      return r;
    }
    const double dx = -(v.dg[1][1] * v.g1 - v.dg[0][1] * v.g2) / r.det;
    const double dy = -(-v.dg[1][0] * v.g1 + v.dg[0][0] * v.g2) / r.det;
    x = wrap01(x + dx);
    y += dy;
    if (fam.periodic_y()) y = fam.wrap_y(y);
    if (!std::isfinite(x) || !std::isfinite(y) || !fam.contains(y)) {
      r.status = NewtonResult::Status::diverged;
      r.last = {x, y, 0};
      return r;
    }
  }
  r.last = T.make_point(x, y);
  if (!converged) {
    r.status = NewtonResult::Status::diverged;
    return r;
  }
  auto check = detail::orbit_points(T, r.last, q);
  if (!check) {
    r.status = NewtonResult::Status::escaped;
    return r;
  }
  for (int k = 0; k < q; ++k) r.observed.push_back((*check)[k].alpha);
  if (r.observed != itin) {
    r.status = NewtonResult::Status::itinerary_mismatch;
    return r;
  }
  const int p = minimal_period(T, r.last, q, opt.tol_orbit);
  if (p == 0) {
    r.status = NewtonResult::Status::diverged;
    return r;
  }
  r.orbit = make_record(T, r.last, p, opt);
  r.status = r.orbit ? NewtonResult::Status::converged : NewtonResult::Status::diverged;
  return r;
}

namespace detail {

/// Same orbit: some point of b matches a.points[0].
inline bool same_orbit(const PerturbedMap& T, const OrbitRecord& a, const OrbitRecord& b, double tol = 1e-8) {
  if (a.q != b.q) return false;
  for (const auto& p : b.points)
    if (cylinder_dist(T, p, a.points[0]) <= tol) return true;
  return false;
}

inline void add_unique(const PerturbedMap& T, std::vector<OrbitRecord>& v, OrbitRecord o) {
  for (const auto& e : v)
    if (same_orbit(T, e, o)) return;
  v.push_back(std::move(o));
}

inline void canonical_sort(std::vector<OrbitRecord>& v) {
  std::sort(v.begin(), v.end(), [](const OrbitRecord& a, const OrbitRecord& b) {
    if (a.q != b.q) return a.q < b.q;
    if (a.points[0].y != b.points[0].y) return a.points[0].y < b.points[0].y;
    return a.points[0].x < b.points[0].x;
  });
}

/// Picks a representative point: lowest (y, x) for non-symmetric orbits.
inline void normalize_start(OrbitRecord& o) {
  if (o.symmetric) return;
  auto it = std::min_element(o.points.begin(), o.points.end(), [](const PhasePoint& a, const PhasePoint& b) {
    return a.y != b.y ? a.y < b.y : a.x < b.x;
  });
  const auto k = it - o.points.begin();
  std::rotate(o.points.begin(), it, o.points.end());
  std::rotate(o.itinerary.begin(), o.itinerary.begin() + k, o.itinerary.end());
}

}  // namespace detail

struct Diagnostic {
  double x = 0, y = 0;
  int q = 0;
  std::string reason;
};

struct SymmetricSearch {
  std::vector<OrbitRecord> orbits;
  std::vector<Diagnostic> diagnostics;
};

/// Accepts a symmetric crossing point, polished by Newton when that is safe.
inline std::optional<OrbitRecord> refine_symmetric_point(const PerturbedMap& T, const PhasePoint& z, int q,
                                                         const OrbitOptions& opt, std::string* why = nullptr) {
  const int p = minimal_period(T, z, q, opt.tol_orbit);
  if (p == 0) {
    if (why) *why = "crossing does not close";
    return std::nullopt;
  }
  NewtonResult nr = newton_refine(T, z, p, opt);
  if (nr.status == NewtonResult::Status::converged && nr.orbit && nr.orbit->symmetric &&
      detail::same_orbit(T, *nr.orbit, *make_record(T, z, p, opt), 1e-8)) {
    return make_record(T, z, p, opt);
  }
  auto rec = make_record(T, z, p, opt);
  if (!rec && why) *why = "newton " + to_string(nr.status) + ", crossing closure above tolerance";
  return rec;
}

/// Symmetric periodic orbits with period <= q_max from crossings of the primary
/// lines with Gamma_q (on Gamma_0) and Gamma_{q-1} (on Gamma_{-1}).
inline SymmetricSearch find_symmetric(const PerturbedMap& T, int q_max, const OrbitOptions& opt = {}) {
  SymmetricSearch out;
  for (int q = 1; q <= q_max; ++q) {
    std::vector<PrimaryCrossing> cs = primary_crossings(T, 0, q, opt.scan_samples, opt.lines);
    auto more = primary_crossings(T, -1, q - 1, opt.scan_samples, opt.lines);
    cs.insert(cs.end(), more.begin(), more.end());
    for (const auto& c : cs) {
      std::string why;
      auto rec = refine_symmetric_point(T, c.point, q, opt, &why);
      if (!rec) {
        out.diagnostics.push_back({c.point.x, c.point.y, q, why});
        continue;
      }
      if (rec->q != q) continue;  // found again at its own period
      if (!rec->symmetric) {
        out.diagnostics.push_back({c.point.x, c.point.y, q, "orbit not S-invariant"});
        continue;
      }
      detail::add_unique(T, out.orbits, std::move(*rec));
    }
  }
  detail::canonical_sort(out.orbits);
  return out;
}

/// Width of the maximal periodic interval of F_y of period q containing x.
inline std::optional<double> periodic_interval_width(const Family& fam, double y, double x, int q) {
  const Iem<double> f = fam.iem_at(y);
  for (const auto& pi : periodic_intervals(f, q))
    if (pi.period == q && x >= pi.left && x < pi.right) return pi.right - pi.left;
  return std::nullopt;
}

struct Prediction {
  bool applicable = true;
  int count = 0;
  double width = 0;
  std::vector<PhasePoint> seeds;  // one start point per predicted orbit
};

/// Non-symmetric orbits created by f = sin(2 pi l x) around an unbalanced
/// symmetric orbit: 2(ceil(l d_q) - 1) of them, seeded at x_k +- m/(2l).
inline Prediction predict_nonsymmetric(const PerturbedMap& T, const OrbitRecord& sym, int harmonic,
                                       const OrbitOptions& opt = {}) {
  Prediction pr;
  if (balance(sym, harmonic, opt.tol_bal).balanced) {
    pr.applicable = false;
    return pr;
  }
  const PhasePoint& p0 = sym.points.at(0);
  auto w = periodic_interval_width(T.family(), p0.y, p0.x, sym.q);
  if (!w) throw std::invalid_argument("orbit does not sit in a periodic interval of the unperturbed map");
  pr.width = *w;
  if (harmonic < static_cast<int>(std::ceil(1.0 / pr.width))) return pr;
  const int mmax = static_cast<int>(std::ceil(harmonic * pr.width)) - 1;
  for (int m = 1; m <= mmax; ++m)
    for (int sgn : {-1, 1}) pr.seeds.push_back(T.make_point(p0.x + sgn * m / (2.0 * harmonic), p0.y));
  pr.count = static_cast<int>(pr.seeds.size());
  return pr;
}

/// Newton from each predicted seed; returns the distinct non-symmetric orbits.
inline std::vector<OrbitRecord> confirm_prediction(const PerturbedMap& T, const Prediction& pr, int q,
                                                   const OrbitOptions& opt = {}) {
  std::vector<OrbitRecord> out;
  for (const auto& s : pr.seeds) {
    NewtonResult nr = newton_refine(T, s, q, opt);
    if (nr.status == NewtonResult::Status::converged && nr.orbit && !nr.orbit->symmetric) {
      detail::normalize_start(*nr.orbit);
      detail::add_unique(T, out, std::move(*nr.orbit));
    }
  }
  detail::canonical_sort(out);
  return out;
}

/// L-image of an orbit as a record (L preserves y and maps orbits of T to orbits).
inline std::optional<OrbitRecord> l_image(const PerturbedMap& T, const OrbitRecord& o, const OrbitOptions& opt = {}) {
  return make_record(T, T.local_symmetry_L(o.points[0]), o.q, opt);
}

/// Newton from a grid of seeds over [0,1) x P; all distinct orbits of minimal period q.
inline std::vector<OrbitRecord> scan_periodic(const PerturbedMap& T, int q, int nx, int ny,
                                              const OrbitOptions& opt = {}) {
  std::vector<OrbitRecord> out;
  const Family& fam = T.family();
  for (int iy = 0; iy < ny; ++iy) {
    const double y = fam.y_min() + (fam.y_max() - fam.y_min()) * (iy + 0.5) / ny;
    for (int ix = 0; ix < nx; ++ix) {
      const double x = (ix + 0.5) / nx;
      NewtonResult nr = newton_refine(T, T.make_point(x, y), q, opt);
      if (nr.status != NewtonResult::Status::converged || !nr.orbit || nr.orbit->q != q) continue;
      detail::normalize_start(*nr.orbit);
      detail::add_unique(T, out, std::move(*nr.orbit));
    }
  }
  detail::canonical_sort(out);
  return out;
}

struct SweepRow {
  double eps = 0;
  int q = 0;
  double x0 = 0, y0 = 0;
  double residue = 0;
  StabilityClass cls = StabilityClass::parabolic;
  std::string event;
};

struct SweepEvent {
  double eps = 0;
  std::string kind;
  std::string detail;
};

struct SweepResult {
  std::vector<SweepRow> track;
  std::vector<SweepEvent> events;   // raw signals and combined pitchfork events
  std::vector<OrbitRecord> final_symmetric;
  std::vector<OrbitRecord> final_nonsymmetric;  // off-symmetry branches at the last eps
  bool l_paired = false;            // final non-symmetric branches are L-images of each other
  bool truncated = false;
  double last_good_eps = 0;
};

namespace detail {

/// Symmetric orbit at the new eps near the previous one, via the primary-line
/// crossing of the previous record.
inline std::optional<OrbitRecord> continue_symmetric(const PerturbedMap& T, const OrbitRecord& prev,
                                                     const OrbitOptions& opt) {
  const int line = prev.symmetry_lines.empty() ? 0 : prev.symmetry_lines[0];
  const int target = line + prev.q;
  const PhasePoint p0 = prev.points[0];
  BaseBranch base;
  if (line == 0) {
    base.kind = std::abs(wrap_half(p0.x)) < 0.25 ? BaseBranch::Kind::zero : BaseBranch::Kind::half;
  } else {
    base.kind = BaseBranch::Kind::midpoint;
    base.interval = p0.alpha;
  }
  const Family& fam = T.family();
  for (double w : {1e-3, 4e-3, 1.6e-2, 6.4e-2}) {
    const double lo = std::max(fam.y_min(), p0.y - w), hi = std::min(fam.y_max(), p0.y + w);
    const int n = 16;
    std::optional<double> best;
    for (int i = 0; i < n; ++i) {
      const double a = lo + (hi - lo) * i / n, b = lo + (hi - lo) * (i + 1) / n;
      auto s = bisect_residual(T, base, target, a, b, opt.lines);
      if (s && (!best || std::abs(*s - p0.y) < std::abs(*best - p0.y))) best = s;
    }
    if (best) {
      auto rec = make_record(T, base_point(T, base, *best), prev.q, opt);
      if (rec && rec->symmetric) return rec;
    }
  }
  // Newton fallback from the previous point
  NewtonResult nr = newton_refine(T, p0, prev.q, opt);
  if (nr.status == NewtonResult::Status::converged && nr.orbit && nr.orbit->symmetric) return nr.orbit;
  return std::nullopt;
}

}  // namespace detail

/// Naive continuation in eps with pitchfork detection: a pitchfork is reported
/// when at least two of (residue crossing 0/1, tracked x crossing 1/4 for q = 2,
/// off-symmetry Newton convergence) occur within opt.event_window.
inline SweepResult sweep_eps(const PerturbedMap& T_template, const OrbitRecord& orbit0,
                             const std::vector<double>& eps_grid, const OrbitOptions& opt = {}) {
  SweepResult r;
  if (eps_grid.empty()) return r;
  OrbitRecord prev = orbit0;
  double tracked_x = orbit0.points[0].x;
  bool had_offsym = false;
  std::vector<SweepEvent> signals;
  std::vector<OrbitRecord> offsym_last;

  for (std::size_t i = 0; i < eps_grid.size(); ++i) {
    const double eps = eps_grid[i];
    const PerturbedMap T = T_template.with_eps(eps);
    std::optional<OrbitRecord> cur;
    if (i == 0) cur = make_record(T, orbit0.points[0], orbit0.q, opt);
    else cur = detail::continue_symmetric(T, prev, opt);
    if (!cur) {
      r.truncated = true;
      r.events.push_back({eps, "track-lost", "symmetric orbit not continued"});
      break;
    }
    // follow the same orbit point as before
    std::size_t k = 0;
    for (std::size_t j = 1; j < cur->points.size(); ++j)
      if (circle_dist(cur->points[j].x, tracked_x) < circle_dist(cur->points[k].x, tracked_x)) k = j;
    const double x_now = cur->points[k].x;

    SweepRow row{eps, cur->q, x_now, cur->points[k].y, cur->residue, cur->cls, ""};
    std::vector<std::string> here;
    if (i > 0) {
      for (double level : {0.0, 1.0})
        if ((prev.residue - level) * (cur->residue - level) < 0) {
          std::ostringstream os;
          os << "residue crosses " << level;
          signals.push_back({eps, "residue-crossing", os.str()});
          here.push_back("residue-crossing");
        }
      if (cur->q == 2) {
        for (double mark : {0.25, 0.75})
          if ((tracked_x - mark) * (x_now - mark) < 0 && std::abs(tracked_x - x_now) < 0.25) {
            signals.push_back({eps, "quarter-crossing", "tracked x crosses " + std::to_string(mark)});
            here.push_back("quarter-crossing");
          }
      }
      NewtonResult nr = newton_refine(T, prev.points[0], prev.q, opt);
      if (nr.status == NewtonResult::Status::singular) {
        signals.push_back({eps, "newton-degenerate", "DG singular at the continued orbit"});
        here.push_back("newton-degenerate");
      }
    }
    // off-symmetry seeds x0 +- delta 2^m: new branches separate like sqrt(eps - eps_b)
    std::vector<OrbitRecord> offsym;
    for (int m = 0; m < opt.seed_ladder; ++m)
      for (double sgn : {-1.0, 1.0}) {
        const double d = sgn * opt.delta_seed * std::ldexp(1.0, m);
        NewtonResult nr = newton_refine(T, T.make_point(x_now + d, cur->points[k].y), cur->q, opt);
        if (nr.status == NewtonResult::Status::converged && nr.orbit && !nr.orbit->symmetric &&
            !detail::same_orbit(T, *cur, *nr.orbit, 1e-6)) {
          detail::normalize_start(*nr.orbit);
          detail::add_unique(T, offsym, std::move(*nr.orbit));
        }
      }
    detail::canonical_sort(offsym);
    if (!offsym.empty() && !had_offsym) {
      signals.push_back({eps, "off-symmetry", std::to_string(offsym.size()) + " non-symmetric branch(es)"});
      here.push_back("off-symmetry");
    }
    had_offsym = !offsym.empty();
    offsym_last = offsym;

    for (std::size_t a = 0; a < here.size(); ++a) row.event += (a ? ";" : "") + here[a];
    r.track.push_back(row);
    tracked_x = x_now;
    prev = *cur;
    r.last_good_eps = eps;
  }

  // combine signals into pitchfork events
  std::vector<bool> used(signals.size(), false);
  for (std::size_t a = 0; a < signals.size(); ++a) {
    r.events.push_back(signals[a]);
    if (used[a]) continue;
    std::vector<std::string> kinds{signals[a].kind};
    std::vector<std::size_t> members{a};
    for (std::size_t b = a + 1; b < signals.size(); ++b)
      if (!used[b] && signals[b].eps - signals[a].eps <= opt.event_window &&
          std::find(kinds.begin(), kinds.end(), signals[b].kind) == kinds.end()) {
        kinds.push_back(signals[b].kind);
        members.push_back(b);
      }
    if (kinds.size() >= 2) {
      for (auto m : members) used[m] = true;
      std::string detail;
      for (std::size_t m = 0; m < kinds.size(); ++m) detail += (m ? "+" : "") + kinds[m];
      r.events.push_back({signals[a].eps, "pitchfork", detail});
      for (auto& row : r.track)
        if (row.eps == signals[a].eps) row.event += std::string(row.event.empty() ? "" : ";") + "pitchfork";
    }
  }
  std::stable_sort(r.events.begin(), r.events.end(), [](const auto& x, const auto& y) { return x.eps < y.eps; });

  r.final_symmetric = {prev};
  r.final_nonsymmetric = offsym_last;
  if (offsym_last.size() >= 2) {
    const PerturbedMap T = T_template.with_eps(r.last_good_eps);
    auto img = l_image(T, offsym_last[0], opt);
    r.l_paired = img && detail::same_orbit(T, offsym_last[1], *img, 1e-8);
  }
  return r;
}

}  // namespace fiem
