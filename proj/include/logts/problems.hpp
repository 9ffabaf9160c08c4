#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "logts/allocation.hpp"
#include "logts/error.hpp"
#include "logts/linalg.hpp"
#include "logts/model.hpp"
#include "logts/run_state.hpp"

namespace logts {

enum class ProblemKind { bai, tbp, topm };

inline const char* to_string(ProblemKind k) {
  switch (k) {
    case ProblemKind::bai: return "bai";
    case ProblemKind::tbp: return "tbp";
    case ProblemKind::topm: return "topm";
  }
  return "?";
}

/// Which pure-exploration question is asked.
struct ProblemSpec {
  ProblemKind kind = ProblemKind::bai;
  double rho = 0.5;  // TBP reward level
  int m = 1;         // TopM set size
  /// TopM only: use ||x||_{H^{-1}} as the denominator instead of
  /// ||x - x_(M)||_{H^{-1}}. Kept for comparison; not a sound alternative set.
  bool topm_stated_denominator = false;

  static ProblemSpec bai() { return {}; }
  static ProblemSpec tbp(double rho) { return {ProblemKind::tbp, rho, 1, false}; }
  static ProblemSpec topm(int m) { return {ProblemKind::topm, 0.5, m, false}; }

  void validate(int num_arms) const {
    if (kind == ProblemKind::tbp) {
      require(rho > 0.0 && rho < 1.0, ErrorKind::config, "TBP threshold rho must lie in (0, 1)");
    } else if (kind == ProblemKind::topm) {
      require(m >= 1 && m <= num_arms - 1, ErrorKind::config, "TopM requires 1 <= m <= K-1");
    }
  }
};

/// BAI: one index. TBP: arms above the threshold. TopM: the m best arms.
/// Indices are sorted ascending.
struct Answer {
  ProblemKind kind = ProblemKind::bai;
  std::vector<int> arms;

  friend bool operator==(const Answer& a, const Answer& b) {
    return a.kind == b.kind && a.arms == b.arms;
  }
};

inline std::string to_string(const Answer& a) {
  std::string s = "{";
  for (std::size_t i = 0; i < a.arms.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(a.arms[i]);
  }
  return s + "}";
}

inline constexpr double kTieTolerance = 1e-12;

namespace detail {

// Arm indices ordered by decreasing logit, lowest index first among equals.
inline std::vector<int> order_by_logit(const ArmVector& z) {
  std::vector<int> idx(static_cast<std::size_t>(z.size()));
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) { return z(a) > z(b); });
  return idx;
}

inline int argmax_lowest(const ArmVector& z) {
  int best = 0;
  for (int i = 1; i < z.size(); ++i) {
    if (z(i) > z(best)) best = i;
  }
  return best;
}

}  // namespace detail

/// i*(theta). Throws ErrorKind::degenerate when the answer is not unique:
/// logits tie (within 1e-12) at the argmax, at the threshold, or at the
/// m-th position.
inline Answer answer(const ProblemSpec& spec, const ArmSet& arms, const Vec& theta) {
  spec.validate(arms.size());
  const ArmVector z = arms.logits(theta);
  Answer a{spec.kind, {}};
  switch (spec.kind) {
    case ProblemKind::bai: {
      const auto order = detail::order_by_logit(z);
      if (z(order[0]) - z(order[1]) <= kTieTolerance) {
        fail(ErrorKind::degenerate, "best arm is not unique: arms " + std::to_string(order[0]) +
                                        " and " + std::to_string(order[1]) + " tie");
      }
      a.arms = {order[0]};
      break;
    }
    case ProblemKind::tbp: {
      const double c = logit(spec.rho);
      for (int i = 0; i < arms.size(); ++i) {
        if (std::abs(z(i) - c) <= kTieTolerance) {
          fail(ErrorKind::degenerate,
               "arm " + std::to_string(i) + " lies exactly at the threshold");
        }
        if (z(i) > c) a.arms.push_back(i);
      }
      break;
    }
    case ProblemKind::topm: {
      const auto order = detail::order_by_logit(z);
      const auto m = static_cast<std::size_t>(spec.m);
      if (z(order[m - 1]) - z(order[m]) <= kTieTolerance) {
        fail(ErrorKind::degenerate, "top-m set is not unique: arms " +
                                        std::to_string(order[m - 1]) + " and " +
                                        std::to_string(order[m]) + " tie");
      }
      a.arms.assign(order.begin(), order.begin() + spec.m);
      std::sort(a.arms.begin(), a.arms.end());
      break;
    }
  }
  return a;
}

/// One halfspace of the alternative set: the infimum of
/// 1/2 ||theta - lambda||^2_H over {lambda : lambda'y crosses theta'y - gap}
/// equals gap^2 / (2 y'H^{-1}y).
struct Comparison {
  int arm;  // the arm defining this halfspace
  double gap;
  Vec direction;
};

/// Halfspace decomposition of Alt(theta). Ties are not an error here: a zero
/// gap simply yields psi = 0.
inline std::vector<Comparison> comparisons(const ProblemSpec& spec, const ArmSet& arms,
                                           const Vec& theta) {
  spec.validate(arms.size());
  const ArmVector z = arms.logits(theta);
  std::vector<Comparison> out;
  out.reserve(static_cast<std::size_t>(arms.size()));
  switch (spec.kind) {
    case ProblemKind::bai: {
      const int best = detail::argmax_lowest(z);
      const Vec xb = arms.arm(best);
      for (int i = 0; i < arms.size(); ++i) {
        if (i != best) out.push_back({i, z(best) - z(i), xb - arms.arm(i)});
      }
      break;
    }
    case ProblemKind::tbp: {
      const double c = logit(spec.rho);
      for (int i = 0; i < arms.size(); ++i) out.push_back({i, z(i) - c, arms.arm(i)});
      break;
    }
    case ProblemKind::topm: {
      const auto order = detail::order_by_logit(z);
      const int pivot = order[static_cast<std::size_t>(spec.m - 1)];
      const Vec xp = arms.arm(pivot);
      for (int i = 0; i < arms.size(); ++i) {
        if (i == pivot) continue;
        const Vec y = spec.topm_stated_denominator ? arms.arm(i) : Vec(arms.arm(i) - xp);
        out.push_back({i, z(i) - z(pivot), y});
      }
      break;
    }
  }
  return out;
}

struct PsiValue {
  double value = 0.0;
  int active_arm = -1;  // arm of the minimizing halfspace
  int active = -1;      // its position in the comparison list
};

/// psi = min over halfspaces of gap^2 / (2 ||y||^2_{H^{-1}}) for a given
/// information matrix H. Terms within 1e-9 (relative) of the minimum resolve
/// to the lowest arm index.
inline PsiValue psi_from_fisher(const std::vector<Comparison>& comps, const Mat& h) {
  require(!comps.empty(), ErrorKind::structural, "empty alternative set");
  const SpdSolver solver(h);
  thread_local std::vector<double> vals;
  vals.resize(comps.size());
  double lo = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < comps.size(); ++i) {
    const auto& c = comps[i];
    if (c.gap == 0.0) {
      vals[i] = 0.0;
    } else {
      const double q = solver.inv_quad(c.direction);
      vals[i] = c.gap * c.gap / (2.0 * q);
    }
    lo = std::min(lo, vals[i]);
  }
  PsiValue out;
  out.value = lo;
  for (std::size_t i = 0; i < comps.size(); ++i) {
    if (vals[i] <= lo * (1.0 + 1e-9)) {
      out.active = static_cast<int>(i);
      out.active_arm = comps[i].arm;
      break;
    }
  }
  return out;
}

/// psi(theta, w) = inf over Alt(theta) of 1/2 ||theta - lambda||^2_{H_w(theta)}.
inline PsiValue inner_inf(const ProblemSpec& spec, const ArmSet& arms, const Vec& theta,
                          const Allocation& w) {
  require(w.size() == arms.size(), ErrorKind::structural,
          "allocation length does not match the number of arms");
  return psi_from_fisher(comparisons(spec, arms, theta), fisher_weighted(arms, w, theta));
}

/// Z(t) = inf over Alt(theta) of 1/2 ||theta - lambda||^2_{H_t(theta)}, which
/// equals t * psi(theta, N/t). Zero before any pull.
inline double glr_statistic(const ProblemSpec& spec, const RunState& s, const Vec& theta) {
  if (s.t() == 0) return 0.0;
  return psi_from_fisher(comparisons(spec, s.arms(), theta), fisher_empirical(s, theta)).value;
}

}  // namespace logts
