#pragma once

/// @file symmetry_lines.hpp
/// @brief Sampled symmetry lines Gamma_i = Fix(T^i o S) and their intersections.

#include "fiem/perturbed_map.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <unordered_map>
#include <utility>
#include <vector>

namespace fiem {

struct LineOptions {
  int base_samples = 256;
  double y_res = 1e-6;
  double max_gap = 0.01;      // longest chord kept in a polyline
  int i_max = 60;
  double tol_line = 1e-9;
  double tol_orbit = 1e-10;
  double tol_transversal = 1e-10;
  double dedupe = 1e-9;
  bool include_discontinuity_branch = false;
};

/// Gamma_0 is {0, 1/2} x P; Gamma_{-1} is the union of the midpoint curves.
struct BaseBranch {
  enum class Kind { zero, half, midpoint };
  Kind kind = Kind::half;
  int interval = 0;  // for midpoint curves, 1-based
};

/// Splits a line index i = 2n + b with b in {0, -1}.
struct LineIndex {
  int pushes = 0;
  int base = 0;
  static LineIndex of(int i) {
    const int b = (i % 2 == 0) ? 0 : -1;
    return {(i - b) / 2, b};
  }
};

struct LineSample {
  double y_param = 0;
  double x = 0;
  double y = 0;
};

struct LineSegment {
  std::vector<LineSample> samples;
  std::vector<int> itinerary;  // intervals visited from the base point on
};

struct LineBranch {
  int branch = 0;
  BaseBranch base;
  bool on_discontinuity = false;
  bool truncated = false;  // some samples escaped P
  int unresolved = 0;      // gaps narrower than y_res left unlinked
  std::vector<LineSegment> segments;
};

struct SymmetryLineSet {
  int index = 0;
  int pushes = 0;
  int source = 0;  // 0 or -1
  std::vector<LineBranch> branches;
};

struct IntersectionCandidate {
  double x = 0, y = 0;
  int j = 0, k = 0;
  int divisor_period = 0;
  bool refined = false;
  bool transversal = true;
  double y_param = 0;  // parameter on line j's base branch
  BaseBranch base;     // base branch of line j
};

inline std::vector<BaseBranch> base_branches(const PerturbedMap& T, int source) {
  std::vector<BaseBranch> v;
  if (source == 0) {
    v.push_back({BaseBranch::Kind::zero, 0});
    v.push_back({BaseBranch::Kind::half, 0});
  } else {
    for (int i = 1; i <= T.family().size(); ++i) v.push_back({BaseBranch::Kind::midpoint, i});
  }
  return v;
}

/// x = 0 is a discontinuity of the circle map once d > 2.
inline bool branch_on_discontinuity(const PerturbedMap& T, const BaseBranch& b) {
  return b.kind == BaseBranch::Kind::zero && T.family().size() > 2;
}

inline PhasePoint base_point(const PerturbedMap& T, const BaseBranch& b, double s) {
  double x = 0;
  switch (b.kind) {
    case BaseBranch::Kind::zero: x = 0; break;
    case BaseBranch::Kind::half: x = 0.5; break;
    case BaseBranch::Kind::midpoint: x = T.family().midpoints(s)[b.interval - 1]; break;
  }
  return T.make_point(x, s);
}

struct Pushed {
  bool valid = false;
  PhasePoint p;
  std::vector<int> itinerary;
};

/// T^n z with the intervals visited along the way.
inline Pushed push(const PerturbedMap& T, PhasePoint z, int n) {
  Pushed r;
  r.itinerary.reserve(std::abs(n) + 1);
  r.itinerary.push_back(z.alpha);
  try {
    for (int k = 0; k < n; ++k) {
      z = T.step(z);
      r.itinerary.push_back(z.alpha);
    }
    for (int k = 0; k < -n; ++k) {
      z = T.step_inverse(z);
      r.itinerary.push_back(z.alpha);
    }
  } catch (const BoundaryEscape&) {
    return r;
  }
  r.valid = true;
  r.p = z;
  return r;
}

/// Signed x-offset of T^{-n} w from the base line of Gamma_k, k = 2n + b.
/// Vanishes exactly when w lies on Gamma_k.
inline std::optional<double> line_residual(const PerturbedMap& T, const PhasePoint& w, int k,
                                           std::vector<int>* itinerary = nullptr) {
  const LineIndex li = LineIndex::of(k);
  Pushed u = push(T, w, -li.pushes);
  if (!u.valid) return std::nullopt;
  if (itinerary) *itinerary = u.itinerary;
  if (li.base == 0) return 0.5 * wrap_half(2 * u.p.x);
  const double m = T.family().midpoints(u.p.y)[u.p.alpha - 1];
  return wrap_half(u.p.x - m);
}

/// |T^i(S(z)) - z| in the circle metric for x (and for y on periodic families).
inline double symmetry_residual(const PerturbedMap& T, const PhasePoint& z, int i) {
  PhasePoint s = T.symmetry_S(z);
  Pushed r = push(T, s, i);
  if (!r.valid) return INFINITY;
  double dy = r.p.y - z.y;
  if (T.family().periodic_y()) {
    const double w = T.family().y_max() - T.family().y_min();
    dy = w * wrap_half(dy / w);
  }
  return std::hypot(circle_dist(r.p.x, z.x), dy);
}

namespace detail {

struct Eval {
  double s = 0;
  bool valid = false;
  PhasePoint p;
  std::vector<int> itinerary;
};

inline Eval eval_line(const PerturbedMap& T, const BaseBranch& b, int pushes, double s) {
  Eval e;
  e.s = s;
  try {
    Pushed r = push(T, base_point(T, b, s), pushes);
    e.valid = r.valid;
    e.p = r.p;
    e.itinerary = std::move(r.itinerary);
  } catch (const DomainError&) {
    e.valid = false;
  }
  return e;
}

inline double chord_len(const PhasePoint& a, const PhasePoint& b) { return std::hypot(a.x - b.x, a.y - b.y); }

}  // namespace detail

/// Samples one branch of Gamma_i with itinerary-aware splitting.
inline LineBranch sample_branch(const PerturbedMap& T, const BaseBranch& b, int pushes, const LineOptions& opt) {
  LineBranch br;
  br.base = b;
  br.on_discontinuity = branch_on_discontinuity(T, b);
  const Family& fam = T.family();
  const int n = std::max(opt.base_samples, 2);
  const double lo = fam.y_min(), hi = fam.y_max();
  const int last = fam.periodic_y() ? n - 1 : n;

  LineSegment cur;
  auto close_segment = [&] {
    if (cur.samples.size() >= 2) br.segments.push_back(std::move(cur));
    cur = LineSegment{};
  };
  auto open_with = [&](const detail::Eval& e) {
    if (!e.valid) return;
    cur.samples.push_back({e.s, e.p.x, e.p.y});
    cur.itinerary = e.itinerary;
  };
  std::function<void(const detail::Eval&, const detail::Eval&)> link = [&](const detail::Eval& a,
                                                                          const detail::Eval& c) {
    const bool same = a.valid && c.valid && a.itinerary == c.itinerary;
    if (same && detail::chord_len(a.p, c.p) <= opt.max_gap) {
      cur.samples.push_back({c.s, c.p.x, c.p.y});
      return;
    }
    if (c.s - a.s > opt.y_res) {
      detail::Eval m = detail::eval_line(T, b, pushes, 0.5 * (a.s + c.s));
      if (!m.valid) br.truncated = true;
      link(a, m);
      link(m, c);
      return;
    }
    if (same) ++br.unresolved;
    close_segment();
    open_with(c);
  };

  detail::Eval prev = detail::eval_line(T, b, pushes, lo);
  if (!prev.valid) br.truncated = true;
  open_with(prev);
  for (int k = 1; k <= last; ++k) {
    detail::Eval e = detail::eval_line(T, b, pushes, lo + (hi - lo) * k / n);
    if (!e.valid) br.truncated = true;
    link(prev, e);
    prev = std::move(e);
  }
  close_segment();
  return br;
}

inline SymmetryLineSet gamma(const PerturbedMap& T, int i, const LineOptions& opt = {}) {
  if (std::abs(i) > opt.i_max) throw std::invalid_argument("|i| exceeds i_max");
  const LineIndex li = LineIndex::of(i);
  SymmetryLineSet set;
  set.index = i;
  set.pushes = li.pushes;
  set.source = li.base;
  int idx = 0;
  for (const auto& b : base_branches(T, li.base)) {
    LineBranch br = sample_branch(T, b, li.pushes, opt);
    br.branch = idx++;
    set.branches.push_back(std::move(br));
  }
  return set;
}

inline std::pair<SymmetryLineSet, SymmetryLineSet> gamma_primary(const PerturbedMap& T, const LineOptions& opt = {}) {
  return {gamma(T, 0, opt), gamma(T, -1, opt)};
}

/// Tangent (dx, dy) of Gamma_i at z for the unperturbed map, normalized to dy = 1:
/// the base tangent pushed through the shears [[1, omega'], [0, 1]].
inline std::optional<std::array<double, 2>> tangent_unperturbed(const PerturbedMap& T, int i, const PhasePoint& z) {
  const PerturbedMap T0 = T.with_eps(0.0);
  const LineIndex li = LineIndex::of(i);
  Pushed w = push(T0, z, -li.pushes);
  if (!w.valid) return std::nullopt;
  const Family& fam = T.family();
  double dx = 0;
  if (li.base == -1) dx = fam.midpoint_deriv(w.p.y)[w.p.alpha - 1];
  PhasePoint p = w.p;
  for (int k = 0; k < li.pushes; ++k) {
    dx += fam.slice(p.x, p.y).domega;
    p = T0.step(p);
  }
  for (int k = 0; k < -li.pushes; ++k) {
    p = T0.step_inverse(p);
    dx -= fam.slice(p.x, p.y).domega;
  }
  return std::array<double, 2>{dx, 1.0};
}

namespace detail {

struct Chord {
  int branch, segment, index;  // samples[index] -> samples[index+1]
};

inline bool chord_intersect(const LineSample& a, const LineSample& b, const LineSample& c, const LineSample& d,
                            double& t, double& u) {
  const double rx = b.x - a.x, ry = b.y - a.y, sx = d.x - c.x, sy = d.y - c.y;
  const double den = rx * sy - ry * sx;
  if (den == 0) return false;
  const double qx = c.x - a.x, qy = c.y - a.y;
  t = (qx * sy - qy * sx) / den;
  u = (qx * ry - qy * rx) / den;
  const double slack = 1e-12;
  return t >= -slack && t <= 1 + slack && u >= -slack && u <= 1 + slack;
}

/// Bisection of the line residual along the base parameter of line j.
inline std::optional<double> bisect_residual(const PerturbedMap& T, const BaseBranch& b, int k_target, double s0,
                                             double s1, const LineOptions& opt) {
  auto h = [&](double s) -> std::optional<double> {
    try {
      return line_residual(T, base_point(T, b, s), k_target);
    } catch (const DomainError&) {
      return std::nullopt;
    }
  };
  auto h0 = h(s0), h1 = h(s1);
  if (!h0 || !h1) return std::nullopt;
  if (*h0 == 0) return s0;
  if (*h1 == 0) return s1;
  if ((*h0 > 0) == (*h1 > 0)) return std::nullopt;
  double a = s0, c = s1, ha = *h0;
  for (int it = 0; it < 200 && c - a > 1e-15 * std::max(1.0, std::abs(a)); ++it) {
    const double m = 0.5 * (a + c);
    auto hm = h(m);
    if (!hm) return std::nullopt;
    if (*hm == 0) return m;
    if ((*hm > 0) == (ha > 0)) {
      a = m;
      ha = *hm;
    } else {
      c = m;
    }
  }
  const double s = 0.5 * (a + c);
  auto hs = h(s);
  if (!hs || std::abs(*hs) > opt.tol_line) return std::nullopt;
  return s;
}

}  // namespace detail

inline bool close_on_cylinder(const PerturbedMap& T, const PhasePoint& a, const PhasePoint& b, double tol) {
  double dy = a.y - b.y;
  if (T.family().periodic_y()) {
    const double w = T.family().y_max() - T.family().y_min();
    dy = w * wrap_half(dy / w);
  }
  return circle_dist(a.x, b.x) <= tol && std::abs(dy) <= tol;
}

/// Crossings of two sampled symmetry lines, refined along line a's base parameter.
inline std::vector<IntersectionCandidate> intersections(const PerturbedMap& T, const SymmetryLineSet& a,
                                                        const SymmetryLineSet& b, const LineOptions& opt = {}) {
  if (a.index == b.index) throw std::invalid_argument("intersections needs two distinct symmetry lines");
  const Family& fam = T.family();
  const int cells = 64;
  const double ylo = fam.y_min(), yspan = fam.y_max() - fam.y_min();
  auto cx = [&](double x) { return std::clamp(static_cast<int>(x * cells), 0, cells - 1); };
  auto cy = [&](double y) { return std::clamp(static_cast<int>((y - ylo) / yspan * cells), 0, cells - 1); };

  std::vector<detail::Chord> chords_b;
  std::unordered_map<int, std::vector<int>> grid;
  for (std::size_t bi = 0; bi < b.branches.size(); ++bi) {
    const auto& br = b.branches[bi];
    if (br.on_discontinuity && !opt.include_discontinuity_branch) continue;
    for (std::size_t si = 0; si < br.segments.size(); ++si) {
      const auto& sm = br.segments[si].samples;
      for (std::size_t k = 0; k + 1 < sm.size(); ++k) {
        const int id = static_cast<int>(chords_b.size());
        chords_b.push_back({static_cast<int>(bi), static_cast<int>(si), static_cast<int>(k)});
        for (int gx = cx(std::min(sm[k].x, sm[k + 1].x)); gx <= cx(std::max(sm[k].x, sm[k + 1].x)); ++gx)
          for (int gy = cy(std::min(sm[k].y, sm[k + 1].y)); gy <= cy(std::max(sm[k].y, sm[k + 1].y)); ++gy)
            grid[gx * cells + gy].push_back(id);
      }
    }
  }

  std::vector<IntersectionCandidate> out;
  std::vector<int> stamp(chords_b.size(), -1);
  int stamp_id = 0;
  for (const auto& br : a.branches) {
    if (br.on_discontinuity && !opt.include_discontinuity_branch) continue;
    for (const auto& seg : br.segments) {
      const auto& sm = seg.samples;
      for (std::size_t k = 0; k + 1 < sm.size(); ++k, ++stamp_id) {
        const LineSample &p0 = sm[k], &p1 = sm[k + 1];
        for (int gx = cx(std::min(p0.x, p1.x)); gx <= cx(std::max(p0.x, p1.x)); ++gx)
          for (int gy = cy(std::min(p0.y, p1.y)); gy <= cy(std::max(p0.y, p1.y)); ++gy) {
            auto it = grid.find(gx * cells + gy);
            if (it == grid.end()) continue;
            for (int id : it->second) {
              if (stamp[id] == stamp_id) continue;
              stamp[id] = stamp_id;
              const auto& ch = chords_b[id];
              const auto& q = b.branches[ch.branch].segments[ch.segment].samples;
              double t = 0, u = 0;
              if (!detail::chord_intersect(p0, p1, q[ch.index], q[ch.index + 1], t, u)) continue;

              IntersectionCandidate c;
              c.j = a.index;
              c.k = b.index;
              c.divisor_period = std::abs(b.index - a.index);
              c.base = br.base;
              c.x = p0.x + t * (p1.x - p0.x);
              c.y = p0.y + t * (p1.y - p0.y);
              c.y_param = p0.y_param + t * (p1.y_param - p0.y_param);
              const double ux = p1.x - p0.x, uy = p1.y - p0.y;
              const double vx = q[ch.index + 1].x - q[ch.index].x, vy = q[ch.index + 1].y - q[ch.index].y;
              const double sine = std::abs(ux * vy - uy * vx) / (std::hypot(ux, uy) * std::hypot(vx, vy) + 1e-300);
              c.transversal = sine > 1e-6;

              const int k_target = b.index - 2 * a.pushes;
              std::optional<double> s;
              const double s_lo = k > 0 ? sm[k - 1].y_param : p0.y_param;
              const double s_hi = k + 2 < sm.size() ? sm[k + 2].y_param : p1.y_param;
              s = detail::bisect_residual(T, br.base, k_target, p0.y_param, p1.y_param, opt);
              if (!s) s = detail::bisect_residual(T, br.base, k_target, s_lo, s_hi, opt);
              // widen the bracket around the chord estimate, staying inside the segment
              const double seg_lo = std::min(sm.front().y_param, sm.back().y_param);
              const double seg_hi = std::max(sm.front().y_param, sm.back().y_param);
              for (double w = 1e-9; !s && w <= opt.max_gap; w *= 4)
                s = detail::bisect_residual(T, br.base, k_target, std::max(seg_lo, c.y_param - w),
                                            std::min(seg_hi, c.y_param + w), opt);
              if (s) {
                Pushed z = push(T, base_point(T, br.base, *s), a.pushes);
                if (z.valid && z.itinerary == seg.itinerary) {
                  Pushed back = push(T, z.p, c.divisor_period);
                  if (back.valid && close_on_cylinder(T, back.p, z.p, opt.tol_orbit)) {
                    c.refined = true;
                    c.x = z.p.x;
                    c.y = z.p.y;
                    c.y_param = *s;
                  }
                }
              }
              out.push_back(c);
            }
          }
      }
    }
  }

  // canonical order, then drop near-duplicates (refined ones win)
  std::sort(out.begin(), out.end(), [](const auto& l, const auto& r) {
    if (l.refined != r.refined) return l.refined;
    if (l.y != r.y) return l.y < r.y;
    return l.x < r.x;
  });
  std::vector<IntersectionCandidate> kept;
  for (const auto& c : out) {
    bool dup = false;
    for (const auto& k : kept)
      if (circle_dist(k.x, c.x) <= std::max(opt.dedupe, k.refined && !c.refined ? 1e-6 : 0.0) &&
          std::abs(k.y - c.y) <= std::max(opt.dedupe, k.refined && !c.refined ? 1e-6 : 0.0)) {
        dup = true;
        break;
      }
    if (!dup) kept.push_back(c);
  }
  std::sort(kept.begin(), kept.end(), [](const auto& l, const auto& r) {
    if (l.y != r.y) return l.y < r.y;
    return l.x < r.x;
  });
  return kept;
}

/// Points of the primary line Gamma_source (0 or -1) lying on Gamma_k, found by
/// scanning the base parameter and bisecting sign changes of the line residual.
struct PrimaryCrossing {
  BaseBranch base;
  double y_param = 0;
  PhasePoint point;
};

inline std::vector<PrimaryCrossing> primary_crossings(const PerturbedMap& T, int source, int k, int samples,
                                                      const LineOptions& opt = {}) {
  std::vector<PrimaryCrossing> out;
  const Family& fam = T.family();
  const double lo = fam.y_min(), hi = fam.y_max();
  for (const auto& b : base_branches(T, source)) {
    if (branch_on_discontinuity(T, b) && !opt.include_discontinuity_branch) continue;
    struct H {
      double s;
      std::optional<double> h;
      std::vector<int> itin;
    };
    auto eval = [&](double s) {
      H r{s, std::nullopt, {}};
      try {
        r.h = line_residual(T, base_point(T, b, s), k, &r.itin);
      } catch (const DomainError&) {
      }
      return r;
    };
    std::function<void(const H&, const H&)> scan = [&](const H& a, const H& c) {
      if (!a.h || !c.h) {
        if (c.s - a.s > opt.y_res) {
          H m = eval(0.5 * (a.s + c.s));
          scan(a, m);
          scan(m, c);
        }
        return;
      }
      if (a.itin != c.itin) {
        if (c.s - a.s > opt.y_res) {
          H m = eval(0.5 * (a.s + c.s));
          scan(a, m);
          scan(m, c);
        }
        return;
      }
      const bool root_a = *a.h == 0;
      const bool change = (*a.h > 0) != (*c.h > 0) && *c.h != 0;
      if (!root_a && !change) return;
      if (std::abs(*a.h) > 0.2 || std::abs(*c.h) > 0.2) return;  // wrap-around jump
      std::optional<double> s = root_a ? std::optional<double>(a.s)
                                       : detail::bisect_residual(T, b, k, a.s, c.s, opt);
      if (!s) return;
      PrimaryCrossing pc{b, *s, base_point(T, b, *s)};
      out.push_back(pc);
    };
    const int n = std::max(samples, 2);
    H prev = eval(lo);
    for (int i = 1; i <= n; ++i) {
      const double s = (i == n) ? (fam.periodic_y() ? hi - 1e-12 * (hi - lo) : hi) : lo + (hi - lo) * i / n;
      H cur = eval(s);
      scan(prev, cur);
      prev = std::move(cur);
    }
    if (prev.h && *prev.h == 0) out.push_back({b, prev.s, base_point(T, b, prev.s)});
  }
  return out;
}

/// Corollary-style transversality check of the two symmetry lines through a
/// symmetric periodic point of the unperturbed map.
struct TransversalityVerdict {
  bool transversal = false;
  int base_line = 0;         // 0 or -1: primary line through the point
  int other_line = 0;        // base_line + q
  double tangent_gap = 0;    // difference of the x-slopes (dx/dy) of the two lines
  double combination = 0;    // integer combination of omega' (2*gap except for even q on Gamma_0)
  std::vector<int> visits;   // k-hat: visits to each interval over one period
};

inline TransversalityVerdict transversality_test(const PerturbedMap& T, const PhasePoint& z, int q,
                                                 const LineOptions& opt = {}) {
  const PerturbedMap T0 = T.with_eps(0.0);
  const Family& fam = T.family();
  TransversalityVerdict v;
  const PhasePoint p = T0.make_point(z.x, z.y);
  if (std::abs(0.5 * wrap_half(2 * p.x)) <= 1e-9) {
    v.base_line = 0;
  } else if (std::abs(wrap_half(p.x - fam.midpoints(p.y)[p.alpha - 1])) <= 1e-9) {
    v.base_line = -1;
  } else {
    throw std::invalid_argument("point is not on a primary symmetry line");
  }
  v.other_line = v.base_line + q;
  auto t1 = tangent_unperturbed(T0, v.base_line, p);
  auto t2 = tangent_unperturbed(T0, v.other_line, p);
  if (!t1 || !t2) throw std::runtime_error("tangent evaluation escaped the domain");
  v.tangent_gap = (*t2)[0] - (*t1)[0];
  const bool even_on_gamma0 = v.base_line == 0 && q % 2 == 0;
  v.combination = even_on_gamma0 ? v.tangent_gap : 2 * v.tangent_gap;
  v.transversal = std::abs(v.combination) > opt.tol_transversal;
  v.visits.assign(fam.size(), 0);
  PhasePoint w = p;
  for (int k = 0; k < q; ++k) {
    ++v.visits[w.alpha - 1];
    w = T0.step(w);
  }
  return v;
}

}  // namespace fiem
