#pragma once

/// @file perturbed_map.hpp
/// @brief Area-preserving perturbation T(x,y) = (x + omega(y), y + eps f(x')) of a family.

#include "fiem/family.hpp"
#include "fiem/forcing.hpp"

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace fiem {

struct PhasePoint {
  double x = 0;
  double y = 0;
  int alpha = 0;  // elemental subinterval containing x at y (0 if unknown)
};

/// A step left the domain P of a non-periodic family.
class BoundaryEscape : public std::runtime_error {
 public:
  BoundaryEscape(PhasePoint from, PhasePoint to)
      : std::runtime_error("orbit left the domain P"), from_(from), to_(to) {}
  const PhasePoint& from() const { return from_; }
  /// Unclamped state after the step.
  const PhasePoint& to() const { return to_; }

 private:
  PhasePoint from_, to_;
};

using Mat2 = std::array<std::array<double, 2>, 2>;

inline Mat2 mat_mul(const Mat2& a, const Mat2& b) {
  Mat2 c{};
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) c[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
  return c;
}

inline Mat2 mat_identity() { return Mat2{{{1.0, 0.0}, {0.0, 1.0}}}; }

struct StepJacobian {
  Mat2 m{};
  bool near_discontinuity = false;
};

struct Trajectory {
  std::vector<PhasePoint> points;
  bool escaped = false;
};

class PerturbedMap {
 public:
  PerturbedMap(Family fam, Forcing f, double eps) : fam_(std::move(fam)), f_(std::move(f)), eps_(eps) {
    if (!fam_.is_symmetric()) throw std::invalid_argument("perturbed map requires a symmetric (reversing) family");
    if (eps < 0) throw std::invalid_argument("eps must be nonnegative");
  }

  const Family& family() const { return fam_; }
  const Forcing& forcing() const { return f_; }
  double eps() const { return eps_; }
  PerturbedMap with_eps(double eps) const { return PerturbedMap(fam_, f_, eps); }

  PhasePoint make_point(double x, double y) const {
    const double yy = fam_.periodic_y() ? fam_.wrap_y(y) : y;
    fam_.check_y(yy);
    const double xx = wrap01(x);
    return {xx, yy, fam_.slice(xx, yy).alpha};
  }

  PhasePoint step(const PhasePoint& p) const {
    const Slice s = fam_.slice(p.x, p.y);
    const double x1 = wrap01(p.x + s.omega);
    return finish({p.x, p.y, s.alpha}, x1, p.y + eps_ * f_(x1));
  }

  PhasePoint step_inverse(const PhasePoint& p) const {
    double y0 = p.y - eps_ * f_(p.x);
    if (fam_.periodic_y()) y0 = fam_.wrap_y(y0);
    else if (!fam_.contains(y0)) throw BoundaryEscape(p, {p.x, y0, 0});
    const Slice s = fam_.image_slice(p.x, y0);
    const double x0 = wrap01(p.x - s.omega);
    return {x0, y0, fam_.slice(x0, y0).alpha};
  }

  /// S(x, y) = (R(x), y - eps f(x)); an involution conjugating T to its inverse.
  PhasePoint symmetry_S(const PhasePoint& p) const {
    double y = p.y - eps_ * f_(p.x);
    if (fam_.periodic_y()) y = fam_.wrap_y(y);
    const double x = reflection(p.x);
    return {x, y, fam_.contains(y) ? fam_.slice(x, y).alpha : 0};
  }

  /// L(x, y) = (R(F_y(x)), y), reflection of each elemental subinterval about its midpoint.
  PhasePoint local_symmetry_L(const PhasePoint& p) const {
    const Slice s = fam_.slice(p.x, p.y);
    return {reflection(wrap01(p.x + s.omega)), p.y, s.alpha};
  }

  StepJacobian jacobian_step(const PhasePoint& p) const {
    const Slice s = fam_.slice(p.x, p.y);
    const double x1 = wrap01(p.x + s.omega);
    const double g = eps_ * f_.deriv(x1);
    StepJacobian j;
    j.m = Mat2{{{1.0, s.domega}, {g, 1.0 + g * s.domega}}};
    j.near_discontinuity = p.x - s.left < 1e-12 || s.right - p.x < 1e-12;
    return j;
  }

  Trajectory iterate(const PhasePoint& p0, long n, bool record = true) const {
    Trajectory t;
    PhasePoint p = p0;
    if (p.alpha == 0) p.alpha = fam_.slice(p.x, p.y).alpha;
    t.points.push_back(p);
    long done = 0;
    for (; done < n; ++done) {
      try {
        p = step(p);
      } catch (const BoundaryEscape&) {
        t.escaped = true;
        break;
      }
      if (record) t.points.push_back(p);
    }
    if (!record && done > 0) t.points.push_back(p);
    return t;
  }

  /// T^n for n of either sign.
  PhasePoint power(PhasePoint p, int n) const {
    for (int k = 0; k < n; ++k) p = step(p);
    for (int k = 0; k < -n; ++k) p = step_inverse(p);
    return p;
  }

 private:
  PhasePoint finish(const PhasePoint& from, double x1, double y1) const {
    if (fam_.periodic_y()) y1 = fam_.wrap_y(y1);
    else if (!fam_.contains(y1)) throw BoundaryEscape(from, {x1, y1, 0});
    return {x1, y1, fam_.slice(x1, y1).alpha};
  }

  Family fam_;
  Forcing f_;
  double eps_;
};

}  // namespace fiem
