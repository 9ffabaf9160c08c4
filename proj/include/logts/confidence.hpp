#pragma once

#include <cmath>
#include <cstdint>
#include <string>

#include "logts/error.hpp"
#include "logts/linalg.hpp"
#include "logts/run_state.hpp"

namespace logts {

enum class BCheckMode {
  exact_kappa0,       // lambda_min(A_t) > kappa0 * lambda(t)
  empirical_hessian,  // lambda_min(H_t(theta_hat)) > lambda(t)
};

inline const char* to_string(BCheckMode m) {
  return m == BCheckMode::exact_kappa0 ? "exact" : "empirical";
}

struct ThresholdConfig {
  double delta = 0.1;
  double S = 1.0;
  int d = 2;
  /// Bound on mu_dot; 1/4 is its supremum for the logistic link.
  double L = 0.25;
  /// lambda(t) = lambda_c * log(t)
  double lambda_c = 2.0;
  BCheckMode b_check_mode = BCheckMode::empirical_hessian;

  static ThresholdConfig with_defaults(double delta, double s, int d) {
    ThresholdConfig cfg;
    cfg.delta = delta;
    cfg.S = s;
    cfg.d = d;
    cfg.lambda_c = d;
    return cfg;
  }

  void validate() const {
    // delta = 1 is admissible for the concentration bound itself; the CLI
    // restricts experiments to (0, 1).
    require(delta > 0.0 && delta <= 1.0, ErrorKind::config, "delta must lie in (0, 1]");
    require(S >= 0.0, ErrorKind::config, "S must be nonnegative");
    require(d >= 1, ErrorKind::config, "dimension must be positive");
    require(lambda_c > 0.0, ErrorKind::config, "lambda coefficient must be positive");
    require(L > 0.0, ErrorKind::config, "L must be positive");
  }
};

/// lambda(t) = c log t, floored at c log 2 for t = 1.
inline double lambda_t(const ThresholdConfig& cfg, std::int64_t t) {
  require(t >= 1, ErrorKind::structural, "lambda_t requires t >= 1");
  return cfg.lambda_c * std::log(static_cast<double>(t < 2 ? 2 : t));
}

/// gamma_t(delta) = sqrt(lambda)/2 + 4/sqrt(lambda) * log((2^d/delta) (L t/(lambda d))^{d/2}),
/// with the logarithm's argument floored at 1.
inline double gamma_t(const ThresholdConfig& cfg, std::int64_t t) {
  const double lam = lambda_t(cfg, t);
  const double d = cfg.d;
  const double log_arg = d * std::log(2.0) - std::log(cfg.delta) +
                         0.5 * d * std::log(cfg.L * static_cast<double>(t) / (lam * d));
  const double root = std::sqrt(lam);
  return 0.5 * root + (4.0 / root) * std::max(log_arg, 0.0);
}

/// beta(delta, t) = 2 ((1 + 2S) gamma_t(delta))^2
inline double beta_threshold(const ThresholdConfig& cfg, std::int64_t t) {
  const double g = (1.0 + 2.0 * cfg.S) * gamma_t(cfg, t);
  return 2.0 * g * g;
}

/// Eigenvalue gate of the stopping rule, checked at the current round only.
inline bool in_B(const ThresholdConfig& cfg, const RunState& s, double kappa0,
                 const Vec& theta_hat) {
  if (s.t() < 1) return false;
  const double lam = lambda_t(cfg, s.t());
  if (cfg.b_check_mode == BCheckMode::exact_kappa0) {
    return min_eigenvalue_exceeds(s.design(), kappa0 * lam);
  }
  return min_eigenvalue_exceeds(fisher_empirical(s, theta_hat), lam);
}

}  // namespace logts
