#pragma once

// Scalar policy shared by the exact (rational) and float code paths.

#include <boost/multiprecision/cpp_int.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <iostream>
#include <stdexcept>
#include <string>
#include <string_view>

namespace fiem {

using Rational = boost::multiprecision::cpp_rational;

enum class Mode { rational, floating };

inline std::string to_string(Mode m) { return m == Mode::rational ? "rational" : "float"; }

inline Mode parse_mode(std::string_view s) {
  if (s == "rational" || s == "exact") return Mode::rational;
  if (s == "float" || s == "double") return Mode::floating;
  throw std::invalid_argument("unknown arithmetic mode '" + std::string(s) + "'");
}

// Warnings raised by constructors and algorithms (normalization, degeneracy
// merging, accumulated float error). Replaceable for tests and the CLI.
using WarningSink = std::function<void(std::string_view)>;

inline WarningSink& warning_sink() {
  static WarningSink sink = [](std::string_view msg) { std::cerr << "warning: " << msg << '\n'; };
  return sink;
}

inline void warn(std::string_view msg) {
  if (warning_sink()) warning_sink()(msg);
}

template <class S>
struct ScalarTraits;

template <>
struct ScalarTraits<Rational> {
  static constexpr bool exact = true;
  static bool eq(const Rational& a, const Rational& b) { return a == b; }
  static bool lt(const Rational& a, const Rational& b) { return a < b; }
  static bool is_zero(const Rational& a) { return a == 0; }
  static double to_double(const Rational& a) { return static_cast<double>(a); }
  static Rational from_double(double v) { return Rational(v); }
  static Rational tol() { return Rational(0); }
};

template <>
struct ScalarTraits<double> {
  static constexpr bool exact = false;
  // Partition/composition tolerance for float mode.
  static constexpr double epsilon = 1e-12;
  static bool eq(double a, double b) { return std::abs(a - b) <= epsilon; }
  static bool lt(double a, double b) { return a < b - epsilon; }
  static bool is_zero(double a) { return std::abs(a) <= epsilon; }
  static double to_double(double a) { return a; }
  static double from_double(double v) { return v; }
  static double tol() { return epsilon; }
};

/// Reduce to [0,1).
inline double wrap01(double v) {
  double r = v - std::floor(v);
  return r >= 1.0 ? 0.0 : r;
}

inline Rational wrap01(const Rational& v) {
  using boost::multiprecision::numerator;
  using boost::multiprecision::denominator;
  boost::multiprecision::cpp_int n = numerator(v), d = denominator(v);
  boost::multiprecision::cpp_int q = n / d;
  if (n < 0 && q * d != n) q -= 1;
  return v - Rational(q);
}

/// Signed representative in (-1/2, 1/2].
inline double wrap_half(double v) {
  double r = v - std::floor(v + 0.5);
  return r <= -0.5 ? r + 1.0 : r;
}

/// Distance on the unit circle.
inline double circle_dist(double a, double b) { return std::abs(wrap_half(a - b)); }

/// "p/q" (or "p" for integers).
inline std::string rational_to_string(const Rational& r) {
  using boost::multiprecision::denominator;
  using boost::multiprecision::numerator;
  if (denominator(r) == 1) return numerator(r).str();
  return numerator(r).str() + "/" + denominator(r).str();
}

/// Accepts "p/q", integers and finite decimals ("0.14", "-2.5e-3" is rejected).
inline Rational parse_rational(std::string_view text) {
  std::string s(text);
  auto bad = [&] { return std::invalid_argument("cannot parse rational '" + s + "'"); };
  if (s.empty()) throw bad();
  using boost::multiprecision::cpp_int;
  try {
    if (auto slash = s.find('/'); slash != std::string::npos) {
      Rational num = parse_rational(s.substr(0, slash));
      Rational den = parse_rational(s.substr(slash + 1));
      if (den == 0) throw bad();
      return num / den;
    }
    bool neg = false;
    std::size_t pos = 0;
    if (s[0] == '-' || s[0] == '+') {
      neg = s[0] == '-';
      pos = 1;
    }
    std::string digits;
    cpp_int den = 1;
    bool seen_dot = false;
    for (; pos < s.size(); ++pos) {
      char c = s[pos];
      if (c == '.' && !seen_dot) {
        seen_dot = true;
      } else if (c >= '0' && c <= '9') {
        digits.push_back(c);
        if (seen_dot) den *= 10;
      } else {
        throw bad();
      }
    }
    if (digits.empty()) throw bad();
    // cpp_int treats a leading 0 as an octal prefix
    digits.erase(0, std::min(digits.find_first_not_of('0'), digits.size() - 1));
    Rational r(cpp_int(digits), den);
    return neg ? Rational(-r) : r;
  } catch (const std::invalid_argument&) {
    throw;
  } catch (const std::exception&) {
    throw bad();
  }
}

}  // namespace fiem
