#pragma once

/// @file iem.hpp
/// @brief Interval and circle exchange maps over an exact or float scalar.

#include "fiem/permutation.hpp"
#include "fiem/scalar.hpp"

#include <algorithm>
#include <cfloat>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace fiem {

/// Closed-left reflection of the unit circle, R(x) = -x mod 1.
template <class S>
S reflection(const S& x) {
  return wrap01(S(1) - wrap01(x));
}

template <class S>
class Iem {
 public:
  using Traits = ScalarTraits<S>;

  Iem() : Iem(Permutation::identity(1), {S(1)}) {}

  Iem(Permutation perm, std::vector<S> lengths) : perm_(std::move(perm)), lengths_(std::move(lengths)) {
    const int d = perm_.size();
    if (static_cast<int>(lengths_.size()) != d)
      throw std::invalid_argument("lengths/permutation size mismatch");
    S total(0);
    for (const S& l : lengths_) {
      if (!(l > S(0))) throw std::invalid_argument("interval lengths must be positive");
      total += l;
    }
    if (!Traits::eq(total, S(1))) {
      std::ostringstream os;
      os << "lengths sum to " << Traits::to_double(total) << ", normalizing to 1";
      warn(os.str());
      for (S& l : lengths_) l /= total;
    }
    left_.resize(d);
    S acc(0);
    for (int i = 0; i < d; ++i) {
      left_[i] = acc;
      acc += lengths_[i];
    }
    // image left endpoint of each interval: sum of the lengths placed before it
    std::vector<S> image_left(d);
    acc = S(0);
    for (int k = 0; k < d; ++k) {
      int i = perm_.final_order()[k] - 1;
      image_left[i] = acc;
      acc += lengths_[i];
    }
    omega_.resize(d);
    for (int i = 0; i < d; ++i) omega_[i] = image_left[i] - left_[i];
  }

  /// Piecewise translation given by consecutive pieces and their shifts.
  /// The permutation is read off from the order of the images.
  static Iem from_pieces(const std::vector<S>& lengths, const std::vector<S>& shifts) {
    const int d = static_cast<int>(lengths.size());
    std::vector<S> image_left(d);
    S acc(0);
    for (int i = 0; i < d; ++i) {
      image_left[i] = acc + shifts[i];
      acc += lengths[i];
    }
    std::vector<int> idx(d);
    for (int i = 0; i < d; ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(), [&](int a, int b) { return image_left[a] < image_left[b]; });
    std::vector<int> order(d);
    S pos(0);
    for (int k = 0; k < d; ++k) {
      order[k] = idx[k] + 1;
      if (!Traits::eq(image_left[idx[k]], pos)) throw std::logic_error("pieces do not tile the circle");
      pos += lengths[idx[k]];
    }
    return Iem(Permutation(std::move(order)), lengths);
  }

  int size() const { return perm_.size(); }
  const Permutation& perm() const { return perm_; }
  const std::vector<S>& lengths() const { return lengths_; }
  const std::vector<S>& omega() const { return omega_; }
  const std::vector<S>& left_endpoints() const { return left_; }
  S left(int i) const { return left_.at(i - 1); }
  S right(int i) const { return i == size() ? S(1) : left_.at(i); }

  /// 1-based index of the interval containing x (closed-left).
  int locate(const S& x) const {
    auto it = std::upper_bound(left_.begin(), left_.end(), x);
    int k = static_cast<int>(it - left_.begin());
    return std::max(k, 1);
  }

  /// 1-based index of the interval (l, r] containing x, for left limits.
  int locate_left_limit(const S& x) const {
    auto it = std::lower_bound(left_.begin(), left_.end(), x);
    int k = static_cast<int>(it - left_.begin());
    return k == 0 ? size() : k;
  }

  S evaluate(const S& x) const {
    S u = wrap01(x);
    return wrap01(u + omega_[locate(u) - 1]);
  }

  /// lim_{t -> x-} F(t), taking values in (0, 1].
  S evaluate_left_limit(const S& x) const {
    S u = wrap01(x);
    if (u == S(0)) u = S(1);
    return u + omega_[locate_left_limit(u) - 1];
  }

  Iem inverse() const {
    const int d = size();
    std::vector<S> lens(d), shifts(d);
    for (int k = 0; k < d; ++k) {
      int i = perm_.final_order()[k] - 1;
      lens[k] = lengths_[i];
      shifts[k] = -omega_[i];
    }
    return from_pieces(lens, shifts);
  }

  /// Merges adjacent intervals with equal translation.
  Iem canonical() const {
    std::vector<S> lens, shifts;
    for (int i = 0; i < size(); ++i) {
      if (!lens.empty() && Traits::eq(shifts.back(), omega_[i])) {
        lens.back() += lengths_[i];
      } else {
        lens.push_back(lengths_[i]);
        shifts.push_back(omega_[i]);
      }
    }
    if (static_cast<int>(lens.size()) == size()) return *this;
    return from_pieces(lens, shifts);
  }

  friend bool operator==(const Iem& a, const Iem& b) {
    if (!(a.perm_ == b.perm_)) return false;
    for (int i = 0; i < a.size(); ++i)
      if (!Traits::eq(a.lengths_[i], b.lengths_[i])) return false;
    return true;
  }

 private:
  Permutation perm_;
  std::vector<S> lengths_;
  std::vector<S> left_;
  std::vector<S> omega_;
};

template <class S>
std::vector<S> translation_vector(const Permutation& perm, const std::vector<S>& lengths) {
  return Iem<S>(perm, lengths).omega();
}

inline Iem<double> to_double(const Iem<Rational>& f) {
  std::vector<double> l;
  for (const auto& v : f.lengths()) l.push_back(static_cast<double>(v));
  return Iem<double>(f.perm(), l);
}

/// outer after inner, with degenerate discontinuities merged.
template <class S>
Iem<S> compose(const Iem<S>& outer, const Iem<S>& inner) {
  using Traits = ScalarTraits<S>;
  std::vector<S> lens, shifts;
  auto push = [&](const S& a, const S& b, const S& shift) {
    if (!(b - a > Traits::tol())) return;
    if (!lens.empty() && Traits::eq(shifts.back(), shift)) {
      lens.back() += b - a;
    } else {
      lens.push_back(b - a);
      shifts.push_back(shift);
    }
  };
  bool collision = false;
  for (int i = 1; i <= inner.size(); ++i) {
    const S w = inner.omega()[i - 1];
    S a = inner.left(i);
    const S b = inner.right(i);
    const S img_a = a + w, img_b = b + w;
    for (int j = 1; j <= outer.size(); ++j) {
      const S c = outer.left(j);
      if (!(c > img_a) || !(c < img_b)) continue;
      if (!Traits::exact && (c - img_a <= Traits::tol() || img_b - c <= Traits::tol())) {
        collision = true;
        continue;
      }
      S mid = (a + (c - w)) / 2 + w;
      push(a, c - w, w + outer.omega()[outer.locate(mid) - 1]);
      a = c - w;
    }
    S mid = (a + b) / 2 + w;
    push(a, b, w + outer.omega()[outer.locate(mid) - 1]);
  }
  if (collision) warn("discontinuity collision within tolerance during composition");
  return Iem<S>::from_pieces(lens, shifts);
}

/// Interval [left, right) of an iterated partition with constant itinerary.
template <class S>
struct ItineraryPiece {
  S left, right;
  S shift;                    // total translation of F^k on the piece
  std::vector<int> itinerary; // 1-based interval indices, length k
};

/// Refines the partition of F^k into the partition of F^{k+1}.
template <class S>
std::vector<ItineraryPiece<S>> refine_partition(const Iem<S>& f, const std::vector<ItineraryPiece<S>>& pieces) {
  using Traits = ScalarTraits<S>;
  std::vector<ItineraryPiece<S>> out;
  out.reserve(pieces.size() + f.size());
  for (const auto& p : pieces) {
    const S img_a = p.left + p.shift, img_b = p.right + p.shift;
    S a = p.left;
    auto emit = [&](const S& lo, const S& hi) {
      const S mid = (lo + hi) / 2 + p.shift;
      const int alpha = f.locate(mid);
      ItineraryPiece<S> q{lo, hi, p.shift + f.omega()[alpha - 1], p.itinerary};
      q.itinerary.push_back(alpha);
      out.push_back(std::move(q));
    };
    for (int j = 2; j <= f.size(); ++j) {
      const S c = f.left(j);
      if (!(c - img_a > Traits::tol()) || !(img_b - c > Traits::tol())) continue;
      emit(a, c - p.shift);
      a = c - p.shift;
    }
    emit(a, p.right);
  }
  return out;
}

template <class S>
std::vector<ItineraryPiece<S>> first_partition(const Iem<S>& f) {
  std::vector<ItineraryPiece<S>> v;
  for (int i = 1; i <= f.size(); ++i) v.push_back({f.left(i), f.right(i), f.omega()[i - 1], {i}});
  return v;
}

struct SymmetryWitness {
  bool symmetric = false;
  std::vector<bool> image_is_reflection;  // F(I_i) == R(I_i) per interval
};

template <class S>
SymmetryWitness is_symmetric(const Iem<S>& f) {
  using Traits = ScalarTraits<S>;
  SymmetryWitness w;
  w.symmetric = f.perm().is_reversing();
  for (int i = 1; i <= f.size(); ++i) {
    const S w_i = f.omega()[i - 1];
    w.image_is_reflection.push_back(Traits::eq(f.left(i) + w_i, S(1) - f.right(i)) &&
                                    Traits::eq(f.right(i) + w_i, S(1) - f.left(i)));
  }
  return w;
}

template <class S>
struct SwapDecomposition {
  Iem<S> symmetric;
  Permutation swap;  // involution on interval indices
};

/// G = F o W with F symmetric and W an involution exchanging equal-length
/// intervals, or nullopt when R o G o R != G^{-1}.
template <class S>
std::optional<SwapDecomposition<S>> swap_decompose(const Iem<S>& g_in) {
  using Traits = ScalarTraits<S>;
  const Iem<S> g = g_in.canonical();
  const int d = g.size();
  // R o G o R acts on R(I_i) by x -> x - omega_i, so it is the IEM with the
  // lengths reversed and translations -omega reversed.
  std::vector<S> lens(d), shifts(d);
  for (int k = 0; k < d; ++k) {
    lens[k] = g.lengths()[d - 1 - k];
    shifts[k] = -g.omega()[d - 1 - k];
  }
  const Iem<S> rgr = Iem<S>::from_pieces(lens, shifts).canonical();
  if (!(rgr == g.inverse().canonical())) return std::nullopt;

  std::vector<int> target(d, 0);
  for (int i = 1; i <= d; ++i) {
    const S ra = S(1) - g.right(i), rb = S(1) - g.left(i);
    for (int j = 1; j <= d; ++j) {
      const S ga = g.left(j) + g.omega()[j - 1], gb = g.right(j) + g.omega()[j - 1];
      if (!Traits::lt(ra, ga) && !Traits::lt(gb, rb)) {
        target[i - 1] = j;
        break;
      }
    }
    if (target[i - 1] == 0) return std::nullopt;
  }
  for (int i = 1; i <= d; ++i) {
    const int j = target[i - 1];
    if (target[j - 1] != i) return std::nullopt;
    if (!Traits::eq(g.lengths()[i - 1], g.lengths()[j - 1])) return std::nullopt;
  }
  // W places interval i where interval target(i) sits; as an IEM with equal
  // lengths swapped, its final order is the involution itself.
  Permutation w_perm(target);
  const Iem<S> w(w_perm, g.lengths());
  Iem<S> f = compose(g, w);
  if (!f.perm().is_reversing()) return std::nullopt;
  return SwapDecomposition<S>{std::move(f), std::move(w_perm)};
}

enum class Side { left, right };

inline std::string to_string(Side s) { return s == Side::left ? "left" : "right"; }

struct SaddleConnection {
  int alpha = 0;
  int beta = 0;
  int m = 0;
  Side side = Side::left;
  friend bool operator==(const SaddleConnection&, const SaddleConnection&) = default;
};

template <class S>
S saddle_tolerance() {
  if constexpr (ScalarTraits<S>::exact) return S(0);
  else return 1e-10;
}

/// Left connections follow left endpoints; right connections follow right
/// endpoints under left-limit evaluation. Every hit up to m_max is reported.
template <class S>
std::vector<SaddleConnection> saddle_connections(const Iem<S>& f, int m_max) {
  if (m_max < 1) throw std::invalid_argument("m_max must be >= 1");
  const S tol = saddle_tolerance<S>();
  auto close = [&](const S& a, const S& b) {
    if constexpr (ScalarTraits<S>::exact) return a == b;
    else return circle_dist(a, b) <= tol;
  };
  std::vector<SaddleConnection> out;
  for (int a = 1; a <= f.size(); ++a) {
    S x = f.left(a);
    for (int m = 1; m <= m_max; ++m) {
      x = f.evaluate(x);
      for (int b = 1; b <= f.size(); ++b)
        if (close(x, f.left(b))) {
          out.push_back({a, b, m, Side::left});
          x = f.left(b);  // snap so float drift cannot hop intervals
        }
    }
  }
  for (int a = 1; a <= f.size(); ++a) {
    S x = f.right(a);
    for (int m = 1; m <= m_max; ++m) {
      x = f.evaluate_left_limit(x);
      for (int b = 1; b <= f.size(); ++b)
        if (close(x, f.right(b))) {
          out.push_back({a, b, m, Side::right});
          x = f.right(b);  // snap so float drift cannot hop intervals
        }
    }
  }
  return out;
}

template <class S>
struct PeriodicInterval {
  S left, right;
  int period = 0;
  std::vector<int> itinerary;
  std::optional<int> symmetric_partner_offset;
  int orbit_id = 0;
};

/// Maximal periodic intervals of minimal period q <= q_max, grouped by orbit
/// and sorted by (period, orbit, left).
template <class S>
std::vector<PeriodicInterval<S>> periodic_intervals(const Iem<S>& f, int q_max) {
  using Traits = ScalarTraits<S>;
  if (q_max < 1) throw std::invalid_argument("q_max must be >= 1");
  if (!Traits::exact && static_cast<double>(q_max) * f.size() * DBL_EPSILON > 1e-8)
    warn("accumulated float error may exceed 1e-8 at this q_max; use rational mode");
  std::vector<PeriodicInterval<S>> out;
  int next_orbit = 0;
  auto pieces = first_partition(f);
  for (int q = 1; q <= q_max; ++q) {
    if (q > 1) pieces = refine_partition(f, pieces);
    std::vector<PeriodicInterval<S>> level;
    std::vector<S> keys;
    for (const auto& p : pieces) {
      if (!Traits::is_zero(p.shift)) continue;
      std::vector<S> prefix(q);
      S acc(0);
      bool minimal = true;
      for (int j = 0; j < q; ++j) {
        prefix[j] = acc;
        if (j > 0 && Traits::is_zero(acc)) minimal = false;
        acc += f.omega()[p.itinerary[j] - 1];
      }
      if (!minimal) continue;
      PeriodicInterval<S> pi{p.left, p.right, q, p.itinerary, std::nullopt, 0};
      S key = p.left;
      for (int j = 0; j < q; ++j) {
        const S a = p.left + prefix[j], b = p.right + prefix[j];
        if (a < key) key = a;
        if (!pi.symmetric_partner_offset && Traits::eq(a, S(1) - p.right) && Traits::eq(b, S(1) - p.left))
          pi.symmetric_partner_offset = j;
      }
      level.push_back(std::move(pi));
      keys.push_back(key);
    }
    std::vector<S> distinct;
    for (const S& k : keys)
      if (std::none_of(distinct.begin(), distinct.end(), [&](const S& v) { return Traits::eq(v, k); }))
        distinct.push_back(k);
    std::sort(distinct.begin(), distinct.end());
    for (std::size_t i = 0; i < level.size(); ++i) {
      auto it = std::find_if(distinct.begin(), distinct.end(), [&](const S& v) { return Traits::eq(v, keys[i]); });
      level[i].orbit_id = next_orbit + static_cast<int>(it - distinct.begin());
    }
    next_orbit += static_cast<int>(distinct.size());
    std::stable_sort(level.begin(), level.end(), [](const auto& a, const auto& b) {
      return a.orbit_id != b.orbit_id ? a.orbit_id < b.orbit_id : a.left < b.left;
    });
    for (auto& pi : level) out.push_back(std::move(pi));
  }
  return out;
}

template <class S>
struct NoNonsymmetricReport {
  bool pass = true;
  int checked = 0;
  std::optional<PeriodicInterval<S>> counterexample;
};

template <class S>
NoNonsymmetricReport<S> verify_no_nonsymmetric(const Iem<S>& f, int q_max) {
  if (!f.perm().is_reversing()) throw std::invalid_argument("verify_no_nonsymmetric requires a symmetric IEM");
  NoNonsymmetricReport<S> r;
  for (auto& pi : periodic_intervals(f, q_max)) {
    ++r.checked;
    if (!pi.symmetric_partner_offset && r.pass) {
      r.pass = false;
      r.counterexample = pi;
    }
  }
  return r;
}

/// Circle exchange map: arcs J_i = I_i + theta0, F(x) = x + omega_i - theta0 + theta1.
template <class S>
class Cem {
 public:
  Cem(Iem<S> base, S theta0, S theta1) : base_(std::move(base)), theta0_(wrap01(theta0)), theta1_(wrap01(theta1)) {}
  Cem(Permutation perm, std::vector<S> lengths, S theta0, S theta1)
      : Cem(Iem<S>(std::move(perm), std::move(lengths)), std::move(theta0), std::move(theta1)) {}

  const Iem<S>& base() const { return base_; }
  const Permutation& perm() const { return base_.perm(); }
  const std::vector<S>& lengths() const { return base_.lengths(); }
  const S& theta0() const { return theta0_; }
  const S& theta1() const { return theta1_; }
  int size() const { return base_.size(); }

  int locate(const S& x) const { return base_.locate(wrap01(x - theta0_)); }
  S arc_left(int i) const { return wrap01(base_.left(i) + theta0_); }
  S arc_right(int i) const { return wrap01(base_.right(i) + theta0_); }

  S evaluate(const S& x) const {
    return wrap01(x + base_.omega()[locate(x) - 1] - theta0_ + theta1_);
  }
  S evaluate_left_limit(const S& x) const {
    S u = wrap01(x - theta0_);
    if (u == S(0)) u = S(1);
    return wrap01(x + base_.omega()[base_.locate_left_limit(u) - 1] - theta0_ + theta1_);
  }

  /// Reflection about (theta0 + theta1)/2.
  S reflect(const S& x) const { return wrap01(theta0_ + theta1_ - x); }

  SymmetryWitness is_symmetric() const {
    using Traits = ScalarTraits<S>;
    SymmetryWitness w;
    w.symmetric = perm().is_reversing();
    for (int i = 1; i <= size(); ++i) {
      // F(J_i) = I_i + omega_i + theta1, R(J_i) = theta1 - I_i
      const S a = base_.left(i) + base_.omega()[i - 1], b = base_.right(i) + base_.omega()[i - 1];
      w.image_is_reflection.push_back(Traits::eq(a, S(1) - base_.right(i)) && Traits::eq(b, S(1) - base_.left(i)));
    }
    return w;
  }

 private:
  Iem<S> base_;
  S theta0_, theta1_;
};

template <class S>
std::vector<SaddleConnection> saddle_connections(const Cem<S>& f, int m_max) {
  if (m_max < 1) throw std::invalid_argument("m_max must be >= 1");
  const S tol = saddle_tolerance<S>();
  auto close = [&](const S& a, const S& b) {
    if constexpr (ScalarTraits<S>::exact) return wrap01(a) == wrap01(b);
    else return circle_dist(a, b) <= tol;
  };
  std::vector<SaddleConnection> out;
  for (int a = 1; a <= f.size(); ++a) {
    S x = f.arc_left(a);
    for (int m = 1; m <= m_max; ++m) {
      x = f.evaluate(x);
      for (int b = 1; b <= f.size(); ++b)
        if (close(x, f.arc_left(b))) {
          out.push_back({a, b, m, Side::left});
          x = f.arc_left(b);  // snap so float drift cannot hop intervals
        }
    }
  }
  for (int a = 1; a <= f.size(); ++a) {
    S x = f.arc_right(a);
    for (int m = 1; m <= m_max; ++m) {
      x = f.evaluate_left_limit(x);
      for (int b = 1; b <= f.size(); ++b)
        if (close(x, f.arc_right(b))) {
          out.push_back({a, b, m, Side::right});
          x = f.arc_right(b);  // snap so float drift cannot hop intervals
        }
    }
  }
  return out;
}

}  // namespace fiem
