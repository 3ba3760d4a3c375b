#pragma once

/// @file family.hpp
/// @brief One-parameter families y -> F_y of exchange maps with fixed combinatorics.

#include "fiem/iem.hpp"

#include <array>
#include <cmath>
#include <functional>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace fiem {

class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

inline constexpr int kMaxFamilyIntervals = 32;

/// Everything a step needs about the elemental subinterval containing x at y.
struct Slice {
  int alpha = 0;       // 1-based
  double left = 0, right = 0;
  double omega = 0;    // omega_alpha(y)
  double domega = 0;   // d omega_alpha / dy
};

class Family {
 public:
  enum class Kind { linear, constant, callback };
  using Evaluator = std::function<std::vector<double>(double)>;

  /// lambda(y) = y*lambda1 + (1-y)*lambda0; each endpoint normalized to sum 1.
  static Family linear(Permutation perm, std::vector<Rational> lambda0, std::vector<Rational> lambda1,
                       double y_min = 0.0, double y_max = 1.0, bool periodic_y = false) {
    Family f(std::move(perm), Kind::linear, y_min, y_max, periodic_y);
    f.exact0_ = normalized(std::move(lambda0), "lambda0");
    f.exact1_ = normalized(std::move(lambda1), "lambda1");
    f.finish_linear();
    return f;
  }

  static Family constant(Permutation perm, std::vector<Rational> lambda, double y_min = 0.0, double y_max = 1.0) {
    Family f(std::move(perm), Kind::constant, y_min, y_max, false);
    f.exact0_ = normalized(std::move(lambda), "lambda");
    f.exact1_ = f.exact0_;
    f.finish_linear();
    return f;
  }

  /// User-supplied lambda(y) and lambda'(y); must be pure and re-entrant.
  /// Positivity and normalization are checked on a 1024-point grid.
  static Family callback(Permutation perm, Evaluator lambda, Evaluator lambda_deriv, double y_min, double y_max,
                         bool periodic_y = false) {
    Family f(std::move(perm), Kind::callback, y_min, y_max, periodic_y);
    f.cb_ = std::move(lambda);
    f.cb_deriv_ = std::move(lambda_deriv);
    const int n = 1024;
    for (int k = 0; k <= n; ++k) {
      const double y = y_min + (y_max - y_min) * k / n;
      auto l = f.cb_(y);
      if (static_cast<int>(l.size()) != f.d_) throw std::invalid_argument("callback returned wrong size");
      double s = 0;
      for (double v : l) {
        const bool edge = periodic_y && (k == 0 || k == n);
        if (v < 0 || (v == 0 && !edge)) throw std::invalid_argument("callback family has nonpositive length");
        s += v;
      }
      if (std::abs(s - 1) > 1e-12) throw std::invalid_argument("callback lengths do not sum to 1");
    }
    return f;
  }

  Kind kind() const { return kind_; }
  int size() const { return d_; }
  const Permutation& perm() const { return perm_; }
  double y_min() const { return y_min_; }
  double y_max() const { return y_max_; }
  /// y lives on a circle [y_min, y_max); steps wrap instead of escaping.
  bool periodic_y() const { return periodic_y_; }
  bool is_symmetric() const { return perm_.is_reversing(); }
  const std::vector<Rational>& lambda0_exact() const { return exact0_; }
  const std::vector<Rational>& lambda1_exact() const { return exact1_; }

  bool contains(double y) const { return y >= y_min_ && y <= y_max_; }

  double wrap_y(double y) const {
    const double w = y_max_ - y_min_;
    double r = y - w * std::floor((y - y_min_) / w);
    return r >= y_max_ ? y_min_ : r;
  }

  void check_y(double y) const {
    if (!contains(y)) {
      std::ostringstream os;
      os << "y=" << y << " outside P=[" << y_min_ << ", " << y_max_ << "]";
      throw DomainError(os.str());
    }
  }

  std::vector<double> lambda_at(double y) const {
    check_y(y);
    std::vector<double> v(d_);
    fill_lambda(y, v.data());
    return v;
  }

  std::vector<double> lambda_deriv(double y) const {
    check_y(y);
    std::vector<double> v(d_);
    fill_lambda_deriv(y, v.data());
    return v;
  }

  std::vector<double> omega_at(double y) const {
    check_y(y);
    std::array<double, kMaxFamilyIntervals> l{};
    fill_lambda(y, l.data());
    return translation(l.data());
  }

  std::vector<double> omega_deriv(double y) const {
    check_y(y);
    std::array<double, kMaxFamilyIntervals> l{};
    fill_lambda_deriv(y, l.data());
    return translation(l.data());
  }

  double omega_at(double y, int alpha) const { return omega_at(y).at(alpha - 1); }
  double omega_deriv(double y, int alpha) const { return omega_deriv(y).at(alpha - 1); }

  /// m_i(y) = lambda_i/2 + sum_{j<i} lambda_j
  std::vector<double> midpoints(double y) const {
    auto l = lambda_at(y);
    std::vector<double> m(d_);
    double acc = 0;
    for (int i = 0; i < d_; ++i) {
      m[i] = acc + l[i] / 2;
      acc += l[i];
    }
    return m;
  }

  std::vector<double> midpoint_deriv(double y) const {
    auto l = lambda_deriv(y);
    std::vector<double> m(d_);
    double acc = 0;
    for (int i = 0; i < d_; ++i) {
      m[i] = acc + l[i] / 2;
      acc += l[i];
    }
    return m;
  }

  Iem<double> iem_at(double y) const {
    auto l = lambda_at(y);
    for (double v : l)
      if (!(v > 0)) throw DomainError("zero-length interval at y=" + std::to_string(y));
    return Iem<double>(perm_, l);
  }

  /// Exact IEM at rational y (linear and constant kinds only).
  Iem<Rational> iem_at_exact(const Rational& y) const {
    if (kind_ == Kind::callback) throw std::invalid_argument("exact evaluation needs a linear or constant family");
    check_y(static_cast<double>(y));
    std::vector<Rational> l(d_);
    for (int i = 0; i < d_; ++i) {
      l[i] = exact0_[i] + y * (exact1_[i] - exact0_[i]);
      if (!(l[i] > 0)) throw DomainError("zero-length interval at y=" + rational_to_string(y));
    }
    return Iem<Rational>(perm_, std::move(l));
  }

  /// Elemental subinterval containing x at height y, closed-left.
  Slice slice(double x, double y) const {
    std::array<double, kMaxFamilyIntervals> l{}, dl{};
    fill_lambda(y, l.data());
    fill_lambda_deriv(y, dl.data());
    Slice s;
    double acc = 0;
    int alpha = 0;
    for (int i = 0; i < d_; ++i) {
      if (x >= acc) alpha = i;
      acc += l[i];
    }
    // skip empty intervals sharing the same left endpoint
    while (alpha + 1 < d_ && l[alpha] <= 0) ++alpha;
    s.alpha = alpha + 1;
    fill_slice(s, l.data(), dl.data());
    return s;
  }

  /// Elemental subinterval alpha with x in F_y(I_alpha).
  Slice image_slice(double x, double y) const {
    std::array<double, kMaxFamilyIntervals> l{}, dl{};
    fill_lambda(y, l.data());
    fill_lambda_deriv(y, dl.data());
    double acc = 0;
    int alpha = perm_.final_order()[0] - 1;
    for (int k = 0; k < d_; ++k) {
      const int i = perm_.final_order()[k] - 1;
      if (x >= acc && l[i] > 0) alpha = i;
      acc += l[i];
    }
    Slice s;
    s.alpha = alpha + 1;
    fill_slice(s, l.data(), dl.data());
    return s;
  }

  /// Slice data of interval alpha at y, wherever x is.
  Slice slice_of(int alpha, double y) const {
    std::array<double, kMaxFamilyIntervals> l{}, dl{};
    fill_lambda(y, l.data());
    fill_lambda_deriv(y, dl.data());
    Slice s;
    s.alpha = alpha;
    fill_slice(s, l.data(), dl.data());
    return s;
  }

  /// Subregion membership: (x, y) lies in the elemental subregion alpha.
  bool in_subregion(int alpha, double x, double y) const { return contains(y) && slice(x, y).alpha == alpha; }

  /// Continuity of y -> F_y across y_min ~ y_max for periodic-y families:
  /// the maps at both ends must agree as circle maps.
  bool ends_agree() const {
    std::array<double, kMaxFamilyIntervals> a{}, b{};
    fill_lambda(y_min_, a.data());
    fill_lambda(y_max_, b.data());
    auto wa = translation(a.data()), wb = translation(b.data());
    for (int k = 0; k <= 64; ++k) {
      const double x = (k + 0.5) / 65.0;
      auto image = [&](const double* l, const std::vector<double>& w) {
        double acc = 0;
        int alpha = 0;
        for (int i = 0; i < d_; ++i) {
          if (x >= acc && l[i] > 0) alpha = i;
          acc += l[i];
        }
        return wrap01(x + w[alpha]);
      };
      if (circle_dist(image(a.data(), wa), image(b.data(), wb)) > 1e-12) return false;
    }
    return true;
  }

 private:
  Family(Permutation perm, Kind kind, double y_min, double y_max, bool periodic_y)
      : perm_(std::move(perm)), kind_(kind), d_(perm_.size()), y_min_(y_min), y_max_(y_max), periodic_y_(periodic_y) {
    if (d_ > kMaxFamilyIntervals) throw std::invalid_argument("family has too many intervals");
    if (!(y_max > y_min)) throw std::invalid_argument("domain P must have y_min < y_max");
  }

  static std::vector<Rational> normalized(std::vector<Rational> l, const char* what) {
    Rational s(0);
    for (auto& v : l) {
      if (v < 0) throw std::invalid_argument(std::string(what) + " has a negative entry");
      s += v;
    }
    if (s == 0) throw std::invalid_argument(std::string(what) + " sums to zero");
    if (s != 1) {
      std::ostringstream os;
      os << what << " sums to " << static_cast<double>(s) << ", normalizing to 1";
      warn(os.str());
      for (auto& v : l) v /= s;
    }
    return l;
  }

  void finish_linear() {
    if (static_cast<int>(exact0_.size()) != d_ || static_cast<int>(exact1_.size()) != d_)
      throw std::invalid_argument("lambda size does not match permutation");
    for (int i = 0; i < d_; ++i) {
      l0_.push_back(static_cast<double>(exact0_[i]));
      dl_.push_back(static_cast<double>(exact1_[i] - exact0_[i]));
    }
    // linear in y, so positivity at the two ends of P covers all of P;
    // periodic-y families may pinch to zero exactly at the ends
    for (double y : {y_min_, y_max_}) {
      for (int i = 0; i < d_; ++i) {
        const double v = l0_[i] + y * dl_[i];
        if (v < -1e-15 || (v <= 1e-15 && !periodic_y_))
          throw std::invalid_argument("family has a nonpositive length at y=" + std::to_string(y));
      }
    }
    if (periodic_y_) {
      for (int i = 0; i < d_; ++i) {
        const double v = l0_[i] + 0.5 * (y_min_ + y_max_) * dl_[i];
        if (!(v > 0)) throw std::invalid_argument("family has a nonpositive length inside P");
      }
    }
  }

  void fill_lambda(double y, double* out) const {
    if (kind_ == Kind::callback) {
      auto v = cb_(y);
      for (int i = 0; i < d_; ++i) out[i] = v[i];
      return;
    }
    for (int i = 0; i < d_; ++i) out[i] = l0_[i] + y * dl_[i];
  }

  void fill_lambda_deriv(double y, double* out) const {
    if (kind_ == Kind::callback) {
      auto v = cb_deriv_(y);
      for (int i = 0; i < d_; ++i) out[i] = v[i];
      return;
    }
    for (int i = 0; i < d_; ++i) out[i] = kind_ == Kind::constant ? 0.0 : dl_[i];
  }

  // omega_i = sum_{pos(b) < pos(i)} l_b - sum_{b < i} l_b; linear in l, so the
  // same routine maps lambda' to omega'.
  std::vector<double> translation(const double* l) const {
    std::vector<double> w(d_);
    double acc = 0;
    for (int k = 0; k < d_; ++k) {
      const int i = perm_.final_order()[k] - 1;
      w[i] = acc;
      acc += l[i];
    }
    acc = 0;
    for (int i = 0; i < d_; ++i) {
      w[i] -= acc;
      acc += l[i];
    }
    return w;
  }

  void fill_slice(Slice& s, const double* l, const double* dl) const {
    const int a = s.alpha - 1;
    double left = 0, dleft = 0;
    for (int i = 0; i < a; ++i) {
      left += l[i];
      dleft += dl[i];
    }
    double img = 0, dimg = 0;
    for (int k = 0; k < d_; ++k) {
      const int i = perm_.final_order()[k] - 1;
      if (i == a) break;
      img += l[i];
      dimg += dl[i];
    }
    s.left = left;
    s.right = left + l[a];
    s.omega = img - left;
    s.domega = dimg - dleft;
  }

  Permutation perm_;
  Kind kind_;
  int d_;
  double y_min_, y_max_;
  bool periodic_y_;
  std::vector<Rational> exact0_, exact1_;
  std::vector<double> l0_, dl_;
  Evaluator cb_, cb_deriv_;
};

}  // namespace fiem
