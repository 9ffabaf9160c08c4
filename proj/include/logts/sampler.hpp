#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "logts/allocation.hpp"
#include "logts/confidence.hpp"
#include "logts/design.hpp"
#include "logts/envsim.hpp"
#include "logts/error.hpp"
#include "logts/estimation.hpp"
#include "logts/linalg.hpp"
#include "logts/problems.hpp"
#include "logts/run_state.hpp"

namespace logts {

/// Spanning subset X0 pulled round-robin whenever lambda_min(A_t) falls below
/// f(t) = c_x0 sqrt(t).
struct ExplorationBasis {
  std::vector<int> indices;
  double c_x0 = 0.0;  // lambda_min(sum_{x in X0} x x') / sqrt(d)
  int round_robin_pos = 0;

  double threshold(std::int64_t t) const { return c_x0 * std::sqrt(static_cast<double>(t)); }
};

/// Greedy volume maximization: at each of d steps take the arm with the
/// largest component orthogonal to the span of the arms already chosen.
inline ExplorationBasis select_exploration_basis(const ArmSet& arms) {
  const int d = arms.dim();
  std::vector<Vec> ortho;  // orthonormal basis of the chosen span
  ExplorationBasis basis;
  std::vector<bool> used(static_cast<std::size_t>(arms.size()), false);
  for (int step = 0; step < d; ++step) {
    int best = -1;
    double best_norm = 0.0;
    Vec best_resid;
    for (int i = 0; i < arms.size(); ++i) {
      if (used[static_cast<std::size_t>(i)]) continue;
      Vec r = arms.arm(i);
      for (const auto& q : ortho) r -= q.dot(r) * q;
      const double n = r.norm();
      if (n > best_norm * (1.0 + 1e-12)) {
        best = i;
        best_norm = n;
        best_resid = r;
      }
    }
    require(best >= 0 && best_norm > 1e-10, ErrorKind::structural,
            "arms do not span R^d; no exploration basis exists");
    used[static_cast<std::size_t>(best)] = true;
    basis.indices.push_back(best);
    ortho.push_back(best_resid / best_norm);
  }
  Mat gram = zero_matrix(d);
  for (int i : basis.indices) {
    add_outer(gram, arms.matrix().row(i).data(), 1.0);
  }
  basis.c_x0 = min_eigenvalue(gram) / std::sqrt(static_cast<double>(d));
  require(basis.c_x0 > 0.0, ErrorKind::structural, "exploration basis is singular");
  return basis;
}

/// True when round t+1 must be a forced pull. An empty history always is.
inline bool exploration_forced(const ExplorationBasis& basis, double lambda_min_design,
                               std::int64_t t) {
  return lambda_min_design <= 0.0 || lambda_min_design < basis.threshold(t);
}

inline bool exploration_forced(const ExplorationBasis& basis, const Mat& design, std::int64_t t) {
  return !min_eigenvalue_exceeds(design, std::max(0.0, basis.threshold(t)));
}

/// b_t = argmin over supp(sum_s w(s)) of N_x(t) - sum_s w_x(s); lowest index
/// wins ties.
inline int track(const ArmVector& counts, const ArmVector& w_history_sums) {
  int best = -1;
  double best_deficit = 0.0;
  for (int i = 0; i < counts.size(); ++i) {
    if (!(w_history_sums(i) > 0.0)) continue;
    const double deficit = counts(i) - w_history_sums(i);
    if (best < 0 || deficit < best_deficit) {
      best = i;
      best_deficit = deficit;
    }
  }
  if (best < 0) {  // nothing tracked yet
    counts.minCoeff(&best);
  }
  return best;
}

/// Chooses the next arm: the round-robin X0 arm when exploration is forced
/// (advancing the round-robin index), the tracking arm otherwise.
inline std::pair<int, bool> next_arm(const RunState& s, ExplorationBasis& basis,
                                     const Allocation& w_current,
                                     const ArmVector& w_history_sums) {
  require(w_current.size() == s.num_arms() && w_history_sums.size() == s.num_arms(),
          ErrorKind::structural, "allocation length does not match the number of arms");
  if (exploration_forced(basis, s.design(), s.t())) {
    const int arm = basis.indices[static_cast<std::size_t>(basis.round_robin_pos)];
    basis.round_robin_pos = (basis.round_robin_pos + 1) % static_cast<int>(basis.indices.size());
    return {arm, true};
  }
  return {track(s.counts(), w_history_sums), false};
}

/// First round at which the forced-exploration eigenvalue guarantee applies:
/// ceil(5d/4 + 1/(4d) + 3/2).
inline std::int64_t forced_exploration_horizon(int d) {
  return static_cast<std::int64_t>(std::ceil(1.25 * d + 0.25 / d + 1.5));
}

enum class Algorithm { logts, random };

inline const char* to_string(Algorithm a) { return a == Algorithm::logts ? "logts" : "random"; }

struct RunConfig {
  ThresholdConfig thresholds;
  SolverConfig solver;
  FwConfig fw;
  std::int64_t budget = 1'000'000;
  /// Multiplies the oracle kappa0 (robustness experiments only).
  double kappa0_factor = 1.0;
  bool record_trace = false;

  /// Defaults for an instance: lambda(t) = d log t, norm cap 10 S.
  static RunConfig defaults_for(const Instance& inst, double delta) {
    RunConfig cfg;
    cfg.thresholds = ThresholdConfig::with_defaults(delta, inst.S, inst.dim());
    cfg.solver = SolverConfig::for_radius(inst.S);
    return cfg;
  }
};

struct TraceRow {
  std::int64_t t;
  double lambda_min_design;
  double glr;
  double beta;
  bool in_b;
  bool forced;
  int arm;
};

struct RunResult {
  std::int64_t tau = 0;
  Answer answer;
  bool answered = false;  // false when no well-defined answer at the end
  bool correct = false;
  bool stopped_by_budget = false;
  std::int64_t forced_pulls = 0;
  /// Rounds t >= forced_exploration_horizon(d) where lambda_min(A_t) < f(t-d-1).
  std::int64_t forced_exploration_violations = 0;
  std::int64_t nonconverged_fits = 0;
  std::int64_t allocation_updates = 0;
  double final_glr = 0.0;
  double final_beta = 0.0;
  Vec final_estimate;
  std::vector<TraceRow> trace;
};

namespace detail {

inline RunResult run_loop(const Instance& inst, const RunConfig& cfg, Rng& rng, Algorithm algo) {
  cfg.thresholds.validate();
  cfg.fw.validate();
  require(cfg.budget >= 1, ErrorKind::config, "budget must be >= 1");
  const int k_arms = inst.num_arms();
  const int d = inst.dim();
  const Environment env(inst);
  const double k0 = kappa0(inst) * cfg.kappa0_factor;
  const Answer truth = inst.true_answer();
  const std::int64_t horizon = forced_exploration_horizon(d);

  RunState state(inst.arms);
  ExplorationBasis basis = select_exploration_basis(inst.arms);
  ArmVector w = ArmVector::Constant(k_arms, 1.0 / k_arms);
  ArmVector w_sums = ArmVector::Zero(k_arms);
  Vec init = zero_vector(d);
  std::optional<EstimatePair> est;
  std::int64_t since_update = 0;
  bool have_allocation = false;

  RunResult res;
  while (state.t() < cfg.budget) {
    const std::int64_t t_prev = state.t();
    const bool forced = exploration_forced(basis, state.design(), t_prev);
    int arm = 0;
    if (forced) {
      arm = basis.indices[static_cast<std::size_t>(basis.round_robin_pos)];
      basis.round_robin_pos = (basis.round_robin_pos + 1) % d;
      ++res.forced_pulls;
    } else if (algo == Algorithm::logts) {
      arm = track(state.counts(), w_sums);
    } else {
      arm = static_cast<int>(uniform01(rng) * k_arms);
    }
    state.add(arm, env.pull(arm, rng));
    const std::int64_t t = state.t();
    if (t >= horizon) {
      const double bound = basis.threshold(t - d - 1) * (1.0 - 1e-12);
      if (!min_eigenvalue_exceeds(state.design(), bound)) ++res.forced_exploration_violations;
    }

    // MLE exists only once the design is nonsingular.
    if (min_eigenvalue_exceeds(state.design(), 1e-12 * state.design().trace())) {
      est = estimate(state, init, inst.S, cfg.solver);
      if (!est->converged) ++res.nonconverged_fits;
      init = est->mle;
    }

    double z_stat = 0.0;
    bool b_ok = false;
    if (est) {
      z_stat = glr_statistic(inst.spec, state, est->projected);
      b_ok = in_B(cfg.thresholds, state, k0, est->mle);
    }
    const double beta = beta_threshold(cfg.thresholds, t);
    if (cfg.record_trace) {
      res.trace.push_back({t, min_eigenvalue(state.design()), z_stat, beta, b_ok, forced, arm});
    }

    res.final_glr = z_stat;
    res.final_beta = beta;
    if (b_ok && z_stat > beta) {
      res.tau = t;
      break;
    }

    if (algo == Algorithm::logts && est) {
      ++since_update;
      if (!have_allocation || since_update >= cfg.fw.lazy_stride) {
        w = optimal_allocation(inst.spec, inst.arms, est->projected, cfg.fw).allocation.weights();
        have_allocation = true;
        since_update = 0;
        ++res.allocation_updates;
      }
    }
    w_sums += w;
  }

  if (res.tau == 0) {
    res.tau = state.t();
    res.stopped_by_budget = true;
  }
  if (est) {
    res.final_estimate = est->projected;
    try {
      res.answer = answer(inst.spec, inst.arms, est->projected);
      res.answered = true;
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::degenerate) throw;
    }
  }
  res.correct = res.answered && res.answer == truth;
  return res;
}

}  // namespace detail

/// Log track-and-stop: forced exploration plus tracking of the estimated
/// optimal allocation, stopped by the GLR test Z(t) > beta(delta, t) once the
/// eigenvalue gate holds. Budget exhaustion is flagged, not thrown.
inline RunResult run_log_ts(const Instance& inst, const RunConfig& cfg, Rng& rng) {
  return detail::run_loop(inst, cfg, rng, Algorithm::logts);
}

inline RunResult run_log_ts(const Instance& inst, RunConfig cfg, Rng& rng, std::int64_t budget) {
  cfg.budget = budget;
  return detail::run_loop(inst, cfg, rng, Algorithm::logts);
}

/// Same loop and stopping rule; non-forced arms drawn uniformly at random.
inline RunResult run_random_baseline(const Instance& inst, const RunConfig& cfg, Rng& rng) {
  return detail::run_loop(inst, cfg, rng, Algorithm::random);
}

inline RunResult run_random_baseline(const Instance& inst, RunConfig cfg, Rng& rng,
                                     std::int64_t budget) {
  cfg.budget = budget;
  return detail::run_loop(inst, cfg, rng, Algorithm::random);
}

inline RunResult run(Algorithm algo, const Instance& inst, const RunConfig& cfg, Rng& rng) {
  return detail::run_loop(inst, cfg, rng, algo);
}

}  // namespace logts
