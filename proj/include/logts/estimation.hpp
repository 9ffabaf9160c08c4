#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include "logts/error.hpp"
#include "logts/linalg.hpp"
#include "logts/model.hpp"
#include "logts/run_state.hpp"

namespace logts {

struct SolverConfig {
  int max_iters = 100;
  double grad_tol = 1e-8;
  double armijo = 1e-4;
  /// Cap on the norm of raw MLE iterates; 10*S by convention.
  double norm_cap = 10.0;
  /// Budget of projected-gradient steps for the projection onto the S-ball.
  int proj_iters = 200;
  /// Projection stops early once a step improves the objective by less than
  /// this fraction.
  double proj_rel_tol = 1e-12;
  bool record_iterates = false;

  static SolverConfig for_radius(double s) {
    SolverConfig cfg;
    cfg.norm_cap = 10.0 * s;
    return cfg;
  }
};

struct EstimatePair {
  Vec mle;        // unconstrained maximizer (possibly capped)
  Vec projected;  // point of the S-ball used by the stopping rule and design
  bool converged = false;
  int newton_iters = 0;
  bool ridge_used = false;
  bool projection_active = false;
  int projection_steps = 0;
  std::vector<Vec> iterates;  // filled when SolverConfig::record_iterates
};

namespace detail {

// Log-likelihood, its gradient and the Fisher matrix in one pass over arms.
// L(theta) = b'theta - sum_x N_x A(x'theta) with b = sum_s r_s x_s.
struct LikelihoodEval {
  double value = 0.0;
  Vec grad;
  Mat fisher;
};

inline LikelihoodEval evaluate_likelihood(const RunState& s, const Vec& theta) {
  const auto& xs = s.arms().matrix();
  const int d = s.dim();
  LikelihoodEval ev{s.reward_moment().dot(theta), s.reward_moment(), zero_matrix(d)};
  for (int i = 0; i < s.num_arms(); ++i) {
    const double n = s.counts()(i);
    if (n == 0.0) continue;
    const auto x = xs.row(i);
    const double z = x.dot(theta);
    const double e = std::exp(-std::abs(z));
    const double p = z >= 0.0 ? 1.0 / (1.0 + e) : e / (1.0 + e);
    ev.value -= n * (std::max(z, 0.0) + std::log1p(e));
    ev.grad -= (n * p) * x.transpose();
    add_outer(ev.fisher, x.data(), n * e / ((1.0 + e) * (1.0 + e)));
  }
  return ev;
}

inline Vec cap_norm(Vec v, double cap) {
  const double n = v.norm();
  if (n > cap) v *= cap / n;
  return v;
}

// F(theta) = ||g(theta) - target||^2_{H(theta)^{-1}} and its gradient
// 2 r - sum_x N_x mu''(x'theta) (x'u)^2 x, with r = g(theta) - target, u = H^{-1} r.
struct ProjectionEval {
  double value = 0.0;
  Vec grad;
};

inline ProjectionEval evaluate_projection(const RunState& s, const Vec& theta, const Vec& target) {
  const auto& xs = s.arms().matrix();
  const int d = s.dim();
  const int k = s.num_arms();
  Vec g = zero_vector(d);
  Mat h = zero_matrix(d);
  ArmVector curv(k);  // N_x mu''(x'theta)
  for (int i = 0; i < k; ++i) {
    const double n = s.counts()(i);
    curv(i) = 0.0;
    if (n == 0.0) continue;
    const auto x = xs.row(i);
    const LinkValues lv = link_values(x.dot(theta));
    g += (n * lv.mu) * x.transpose();
    add_outer(h, x.data(), n * lv.dot);
    curv(i) = n * lv.ddot;
  }
  const Vec r = g - target;
  const SpdSolver solver(h);
  const Vec u = solver.solve(r);
  ProjectionEval out{r.dot(u), 2.0 * r};
  for (int i = 0; i < k; ++i) {
    if (curv(i) == 0.0) continue;
    const auto x = xs.row(i);
    const double xu = x.dot(u);
    out.grad -= (curv(i) * xu * xu) * x.transpose();
  }
  return out;
}

}  // namespace detail

/// sum_s [r_s log mu(x_s'theta) + (1 - r_s) log(1 - mu(x_s'theta))]
inline double log_likelihood(const RunState& s, const Vec& theta) {
  require(s.t() >= 1, ErrorKind::structural, "log_likelihood on an empty history");
  s.arms().check_dim(theta);
  double ll = s.reward_moment().dot(theta);
  for (int i = 0; i < s.num_arms(); ++i) {
    const double n = s.counts()(i);
    if (n != 0.0) ll -= n * log_partition(s.arms().logit_of(i, theta));
  }
  return ll;
}

/// g_t(theta) = sum_s mu(x_s'theta) x_s
inline Vec g_function(const RunState& s, const Vec& theta) {
  require(s.t() >= 1, ErrorKind::structural, "g_function on an empty history");
  s.arms().check_dim(theta);
  Vec g = zero_vector(s.dim());
  for (int i = 0; i < s.num_arms(); ++i) {
    const double n = s.counts()(i);
    if (n != 0.0) g += (n * mu(s.arms().logit_of(i, theta))) * s.arms().arm(i);
  }
  return g;
}

/// Damped Newton ascent on the log-likelihood. Returns the best iterate with
/// converged=false when the first-order condition is not met (e.g. separable
/// histories, where the MLE does not exist and iterates stop at norm_cap).
inline EstimatePair fit_mle(const RunState& s, const Vec& init, const SolverConfig& cfg) {
  require(s.t() >= 1, ErrorKind::structural, "fit_mle on an empty history");
  s.arms().check_dim(init);
  EstimatePair out;
  Vec theta = detail::cap_norm(init, cfg.norm_cap);
  auto ev = detail::evaluate_likelihood(s, theta);
  if (cfg.record_iterates) out.iterates.push_back(theta);

  for (int it = 0; it < cfg.max_iters; ++it) {
    if (ev.grad.norm() <= cfg.grad_tol) {
      out.converged = true;
      break;
    }
    Vec step;
    const Cholesky chol(ev.fisher);
    if (chol.ok()) step = chol.solve(ev.grad);
    if (step.size() == 0 || !step.allFinite()) {
      // singular Hessian: ridge-damped step
      Mat reg = ev.fisher;
      const double tr = std::max(reg.trace(), std::numeric_limits<double>::min());
      reg.diagonal().array() += 1e-10 * tr;
      const Cholesky ridge(reg);
      if (!ridge.ok()) break;
      step = ridge.solve(ev.grad);
      out.ridge_used = true;
      if (!step.allFinite()) break;
    }
    const double slope = ev.grad.dot(step);
    double alpha = 1.0;
    bool accepted = false;
    detail::LikelihoodEval next;
    Vec candidate;
    for (int ls = 0; ls < 60; ++ls) {
      candidate = detail::cap_norm(theta + alpha * step, cfg.norm_cap);
      next = detail::evaluate_likelihood(s, candidate);
      // Near the optimum the ascent is below the rounding error of L itself.
      const double noise = 8.0 * std::numeric_limits<double>::epsilon() * std::abs(ev.value);
      if (next.value >= ev.value + cfg.armijo * alpha * slope - noise) {
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    ++out.newton_iters;
    if (!accepted) break;
    const double moved = (candidate - theta).norm();
    theta = candidate;
    ev = std::move(next);
    if (cfg.record_iterates && moved > 0.0) out.iterates.push_back(theta);
    if (moved <= 1e-15 * (1.0 + theta.norm())) {
      out.converged = ev.grad.norm() <= cfg.grad_tol;
      break;
    }
  }
  if (!out.converged && ev.grad.norm() <= cfg.grad_tol) out.converged = true;
  out.mle = theta;
  out.projected = theta;
  return out;
}

/// Objective minimized by the projection: ||g_t(theta) - g_t(mle)||^2 in the
/// H_t(theta)^{-1} norm.
inline double projection_objective(const RunState& s, const Vec& theta, const Vec& mle) {
  return detail::evaluate_projection(s, theta, g_function(s, mle)).value;
}

struct ProjectionResult {
  Vec theta;
  double objective = 0.0;
  double initial_objective = 0.0;
  int steps = 0;
};

/// Projection of the MLE onto {||theta|| <= S}: identity inside the ball,
/// otherwise projected gradient descent over the sphere of radius S started
/// at the radial point S*mle/||mle||. Local descent only; the objective need
/// not be convex.
inline ProjectionResult project_estimate_detailed(const RunState& s, const Vec& mle, double radius,
                                                  const SolverConfig& cfg) {
  require(radius > 0.0, ErrorKind::config, "S must be positive");
  s.arms().check_dim(mle);
  const double n = mle.norm();
  if (n <= radius) return {mle, 0.0, 0.0, 0};

  const Vec target = g_function(s, mle);
  Vec theta = (radius / n) * mle;
  auto ev = detail::evaluate_projection(s, theta, target);
  ProjectionResult out{theta, ev.value, ev.value, 0};

  // Descent runs along the tangent of the sphere (the radial part of the
  // gradient is undone by the renormalization anyway). Steps follow the
  // Barzilai-Borwein rule, halved until the objective decreases.
  const auto tangent = [&](const Vec& th, const Vec& g) -> Vec {
    return g - (g.dot(th) / (radius * radius)) * th;
  };
  Vec g_tan = tangent(theta, ev.grad);
  double step = 1.0 / (2.0 * std::max(fisher_empirical(s, theta).trace(), 1e-300));
  for (int it = 0; it < cfg.proj_iters && ev.value > 0.0; ++it) {
    bool improved = false;
    Vec prev = theta;
    Vec prev_g = g_tan;
    const double g_norm = g_tan.norm();
    for (int ls = 0; ls < 60 && step * g_norm > 1e-14 * radius; ++ls) {
      Vec cand = theta - step * g_tan;
      cand *= radius / cand.norm();
      auto cev = detail::evaluate_projection(s, cand, target);
      if (cev.value < ev.value) {
        const double gain = (ev.value - cev.value) / ev.value;
        theta = cand;
        ev = std::move(cev);
        improved = gain > cfg.proj_rel_tol;
        break;
      }
      step *= 0.5;
    }
    ++out.steps;
    if (!improved) break;
    g_tan = tangent(theta, ev.grad);
    const Vec ds = theta - prev;
    const double curv = ds.dot(g_tan - prev_g);
    if (curv > 0.0) step = ds.squaredNorm() / curv;
  }
  out.theta = theta;
  out.objective = ev.value;
  return out;
}

inline Vec project_estimate(const RunState& s, const Vec& mle, double radius,
                            const SolverConfig& cfg) {
  return project_estimate_detailed(s, mle, radius, cfg).theta;
}

/// fit_mle followed by project_estimate.
inline EstimatePair estimate(const RunState& s, const Vec& init, double radius,
                             const SolverConfig& cfg) {
  EstimatePair out = fit_mle(s, init, cfg);
  if (out.mle.norm() > radius) {
    const auto proj = project_estimate_detailed(s, out.mle, radius, cfg);
    out.projected = proj.theta;
    out.projection_active = true;
    out.projection_steps = proj.steps;
  }
  return out;
}

}  // namespace logts
