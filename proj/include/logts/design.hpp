#pragma once

#include <atomic>
#include <cmath>
#include <limits>
#include <vector>

#include "logts/allocation.hpp"
#include "logts/error.hpp"
#include "logts/linalg.hpp"
#include "logts/model.hpp"
#include "logts/problems.hpp"

namespace logts {

struct FwConfig {
  int max_iters = 2000;
  /// Early exit once the linearization gap drops below rel_gap_tol * value.
  double rel_gap_tol = 1e-6;
  /// Iterates are mixed with this much uniform mass before H_w is assembled.
  double floor = 1e-9;
  /// Log-TS recomputes w(t) every lazy_stride rounds (1 = every round).
  int lazy_stride = 1;
  bool record_history = false;
  /// Cooperative cancellation; a cancelled run returns its best iterate.
  const std::atomic<bool>* cancel = nullptr;

  void validate() const {
    require(max_iters >= 1, ErrorKind::config, "Frank-Wolfe needs at least one iteration");
    require(lazy_stride >= 1, ErrorKind::config, "lazy stride must be >= 1");
    require(floor >= 0.0 && floor < 1.0, ErrorKind::config, "allocation floor must be in [0,1)");
  }
};

struct DesignResult {
  Allocation allocation = Allocation::uniform(1);
  double value = 0.0;  // psi at `allocation`, a lower bound on psi*
  int iterations = 0;
  double gap_estimate = std::numeric_limits<double>::infinity();
  int active_arm = -1;
  bool cancelled = false;
  std::vector<double> best_history;  // best value after each iteration
};

/// Frank-Wolfe ascent of w -> psi(theta, w) over the simplex. psi is a minimum
/// of smooth terms; each step follows the supergradient of the active term
///   d/dw_a  gap^2 / (2 y'H_w^{-1}y) = gap^2 / (2 q^2) * mu_dot(x_a'theta) (x_a'H_w^{-1}y)^2
/// towards the best vertex with step 2/(k+2). Since psi is not smooth at
/// ties, the best iterate (not the last) is returned.
inline DesignResult optimal_allocation(const ProblemSpec& spec, const ArmSet& arms,
                                       const Vec& theta, const FwConfig& cfg = {}) {
  cfg.validate();
  const auto comps = comparisons(spec, arms, theta);
  const int k_arms = arms.size();
  ArmVector slopes(k_arms);
  for (int a = 0; a < k_arms; ++a) slopes(a) = mu_dot(arms.logit_of(a, theta));

  const auto mix = [&](const ArmVector& w) -> ArmVector {
    return (1.0 - cfg.floor) * w.array() + cfg.floor / k_arms;
  };

  ArmVector w = ArmVector::Constant(k_arms, 1.0 / k_arms);
  ArmVector best_w = mix(w);
  double best = -1.0;
  DesignResult out;

  for (int k = 0; k < cfg.max_iters; ++k) {
    if (cfg.cancel != nullptr && cfg.cancel->load(std::memory_order_relaxed)) {
      out.cancelled = true;
      break;
    }
    const ArmVector wm = mix(w);
    Mat h = zero_matrix(arms.dim());
    for (int a = 0; a < k_arms; ++a) add_outer(h, arms.matrix().row(a).data(), wm(a) * slopes(a));
    const PsiValue psi = psi_from_fisher(comps, h);
    ++out.iterations;
    if (psi.value > best) {
      best = psi.value;
      best_w = wm;
    }
    if (cfg.record_history) out.best_history.push_back(best);

    const auto& c = comps[static_cast<std::size_t>(psi.active)];
    if (c.gap == 0.0) break;  // psi is identically zero
    const SpdSolver solver(h);
    const Vec u = solver.solve(c.direction);
    const double q = c.direction.dot(u);
    const double coef = c.gap * c.gap / (2.0 * q * q);
    const ArmVector xu = arms.matrix() * u;
    const ArmVector grad = coef * slopes.array() * xu.array().square();

    int j = 0;
    grad.maxCoeff(&j);
    out.gap_estimate = grad(j) - grad.dot(wm);
    if (out.gap_estimate < cfg.rel_gap_tol * psi.value) break;

    const double step = 2.0 / (k + 2.0);
    w *= 1.0 - step;
    w(j) += step;
  }

  out.allocation = Allocation::normalized(best_w);
  const PsiValue final_psi = inner_inf(spec, arms, theta, out.allocation);
  out.value = final_psi.value;
  out.active_arm = final_psi.active_arm;
  return out;
}

/// T*(theta) = 1 / psi*(theta); +infinity when psi* = 0.
inline double characteristic_time(double psi_star) {
  return psi_star > 0.0 ? 1.0 / psi_star : std::numeric_limits<double>::infinity();
}

inline double characteristic_time(const DesignResult& r) { return characteristic_time(r.value); }

inline double characteristic_time(const ProblemSpec& spec, const ArmSet& arms, const Vec& theta,
                                  const FwConfig& cfg = {}) {
  return characteristic_time(optimal_allocation(spec, arms, theta, cfg));
}

/// log(1/(2.4 delta)) * T*(theta): the sample-complexity lower bound with the
/// quadratic-approximation correction dropped.
inline double lower_bound_samples(double delta, double t_star) {
  return std::log(1.0 / (2.4 * delta)) * t_star;
}

}  // namespace logts
