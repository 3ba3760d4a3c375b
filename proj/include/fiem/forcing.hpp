#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <utility>
#include <vector>

namespace fiem {

// sin(2 pi t) and cos(2 pi t) after reduction of t to (-1/2, 1/2], exact at
// multiples of 1/4.
inline double sin2pi(double t) {
  double r = t - std::floor(t + 0.5);
  if (r == 0 || r == -0.5 || r == 0.5) return 0.0;
  if (r == 0.25) return 1.0;
  if (r == -0.25) return -1.0;
  return std::sin(2 * std::numbers::pi * r);
}

inline double cos2pi(double t) {
  double r = t - std::floor(t + 0.5);
  if (r == 0.25 || r == -0.25) return 0.0;
  if (r == 0) return 1.0;
  if (r == 0.5 || r == -0.5) return -1.0;
  return std::cos(2 * std::numbers::pi * r);
}

/// Antisymmetric forcing f(x) = sum a_l sin(2 pi l x).
class Forcing {
 public:
  struct Term {
    int harmonic;
    double amplitude;
  };

  Forcing() = default;
  explicit Forcing(std::vector<Term> terms) : terms_(std::move(terms)) {
    for (const auto& t : terms_)
      if (t.harmonic <= 0) throw std::invalid_argument("forcing harmonics must be positive integers");
  }

  static Forcing sine(int harmonic, double amplitude = 1.0) { return Forcing({{harmonic, amplitude}}); }

  const std::vector<Term>& terms() const { return terms_; }

  double operator()(double x) const {
    double s = 0;
    for (const auto& t : terms_) s += t.amplitude * sin2pi(t.harmonic * x);
    return s;
  }

  double deriv(double x) const {
    double s = 0;
    for (const auto& t : terms_) {
      s += t.amplitude * 2 * std::numbers::pi * t.harmonic * cos2pi(t.harmonic * x);
    }
    return s;
  }

 private:
  std::vector<Term> terms_;
};

}  // namespace fiem
