#pragma once

#include <cmath>
#include <string>

#include "logts/error.hpp"
#include "logts/linalg.hpp"
#include "logts/model.hpp"

namespace logts {

/// A point on the probability simplex over the K arms.
class Allocation {
 public:
  static Allocation uniform(int k) {
    require(k >= 1, ErrorKind::structural, "allocation over zero arms");
    return Allocation(ArmVector::Constant(k, 1.0 / k), Unchecked{});
  }

  static Allocation vertex(int k, int i) {
    ArmVector w = ArmVector::Zero(k);
    w(i) = 1.0;
    return Allocation(std::move(w), Unchecked{});
  }

  /// Validates nonnegativity and unit mass within 1e-12.
  explicit Allocation(ArmVector w) : w_(std::move(w)) {
    require(w_.size() >= 1, ErrorKind::structural, "allocation over zero arms");
    require((w_.array() >= 0.0).all() && w_.allFinite(), ErrorKind::structural,
            "allocation has negative or non-finite weights");
    if (!(std::abs(w_.sum() - 1.0) <= 1e-12)) {
      fail(ErrorKind::structural, "allocation does not sum to one (sum=" +
                                      std::to_string(w_.sum()) + ")");
    }
  }

  /// Rescales nonnegative weights (e.g. pull counts) onto the simplex.
  static Allocation normalized(const ArmVector& raw) {
    const double s = raw.sum();
    require(s > 0.0, ErrorKind::structural, "cannot normalize zero weights");
    return Allocation(raw / s, Unchecked{});
  }

  int size() const { return static_cast<int>(w_.size()); }
  double operator[](int i) const { return w_(i); }
  const ArmVector& weights() const { return w_; }

 private:
  struct Unchecked {};
  Allocation(ArmVector w, Unchecked) : w_(std::move(w)) {}

  ArmVector w_;
};

/// H_w(theta) = sum_x w_x mu_dot(x'theta) x x'.
inline Mat fisher_weighted(const ArmSet& arms, const Allocation& w, const Vec& theta) {
  return weighted_fisher(arms, w.weights(), theta);
}

}  // namespace logts
