#pragma once

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace fiem {

/// Combinatorial data of an exchange map. `final_order[k]` is the (1-based)
/// index of the interval that lands in position k+1 after the map; the
/// initial order is the identity.
class Permutation {
 public:
  Permutation() = default;

  explicit Permutation(std::vector<int> final_order) : order_(std::move(final_order)) {
    const int d = size();
    if (d == 0) throw std::invalid_argument("permutation must be nonempty");
    std::vector<bool> seen(d, false);
    for (int v : order_) {
      if (v < 1 || v > d || seen[v - 1])
        throw std::invalid_argument("final_order is not a bijection of 1..d");
      seen[v - 1] = true;
    }
    pos_.assign(d, 0);
    for (int k = 0; k < d; ++k) pos_[order_[k] - 1] = k + 1;
  }

  static Permutation identity(int d) {
    std::vector<int> v(d);
    std::iota(v.begin(), v.end(), 1);
    return Permutation(std::move(v));
  }

  static Permutation reversing(int d) {
    std::vector<int> v(d);
    for (int i = 0; i < d; ++i) v[i] = d - i;
    return Permutation(std::move(v));
  }

  int size() const { return static_cast<int>(order_.size()); }
  const std::vector<int>& final_order() const { return order_; }
  /// 1-based position of interval i (1-based) after the map.
  int position(int i) const { return pos_.at(i - 1); }

  bool is_reversing() const {
    const int d = size();
    for (int k = 0; k < d; ++k)
      if (order_[k] != d - k) return false;
    return true;
  }

  bool is_involution() const {
    for (int i = 1; i <= size(); ++i)
      if (order_[order_[i - 1] - 1] != i) return false;
    return true;
  }

  /// Interval labels A, B, C, ... for d <= 26, numeric beyond.
  static std::string label(int i) {
    if (i >= 1 && i <= 26) return std::string(1, static_cast<char>('A' + i - 1));
    return std::to_string(i);
  }

  friend bool operator==(const Permutation& a, const Permutation& b) { return a.order_ == b.order_; }

 private:
  std::vector<int> order_;
  std::vector<int> pos_;
};

}  // namespace fiem
