#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <utility>

#include "logts/error.hpp"
#include "logts/linalg.hpp"
#include "logts/model.hpp"
#include "logts/problems.hpp"

namespace logts {

using Rng = std::mt19937_64;

/// Uniform double in [0, 1) from the top 53 bits of one draw.
inline double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

/// splitmix64 finalizer.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Seed of (trial, algo) under a master seed:
///   splitmix64(splitmix64(splitmix64(master) ^ trial) ^ algo)
/// Independent of the order in which runs are scheduled.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t trial, std::uint64_t algo) {
  return splitmix64(splitmix64(splitmix64(master) ^ trial) ^ algo);
}

/// Ground truth of a simulation: arms, hidden parameter, question asked.
struct Instance {
  ArmSet arms;
  Vec theta_star;
  double S = 1.0;
  ProblemSpec spec;
  std::string label;

  Instance(ArmSet a, Vec theta, double s, ProblemSpec p, std::string name)
      : arms(std::move(a)), theta_star(std::move(theta)), S(s), spec(p), label(std::move(name)) {
    validate();
  }

  int num_arms() const { return arms.size(); }
  int dim() const { return arms.dim(); }

  /// i*(theta_star)
  Answer true_answer() const { return answer(spec, arms, theta_star); }

  void validate() const {
    arms.check_dim(theta_star);
    require(S > 0.0, ErrorKind::config, "S must be positive");
    require(theta_star.norm() <= S * (1.0 + 1e-12), ErrorKind::config,
            "||theta_star|| exceeds S");
    spec.validate(arms.size());
    (void)true_answer();  // throws on a degenerate answer
  }
};

/// Bernoulli reward source for one instance; caches mu(x'theta_star).
class Environment {
 public:
  explicit Environment(const Instance& inst) : means_(inst.num_arms()) {
    for (int i = 0; i < inst.num_arms(); ++i) {
      means_(i) = mu(inst.arms.logit_of(i, inst.theta_star));
    }
  }

  int pull(int arm, Rng& rng) const {
    require(arm >= 0 && arm < means_.size(), ErrorKind::structural, "arm index out of range");
    return uniform01(rng) < means_(arm) ? 1 : 0;
  }

  double mean(int arm) const { return means_(arm); }

 private:
  ArmVector means_;
};

inline int pull(const Instance& inst, int arm, Rng& rng) {
  require(arm >= 0 && arm < inst.num_arms(), ErrorKind::structural, "arm index out of range");
  return uniform01(rng) < mu(inst.arms.logit_of(arm, inst.theta_star)) ? 1 : 0;
}

/// kappa0 = max over arms of 1 / mu_dot(x'theta_star); at least 4.
inline double kappa0(const Instance& inst) {
  double k = 0.0;
  for (int i = 0; i < inst.num_arms(); ++i) {
    k = std::max(k, 1.0 / mu_dot(inst.arms.logit_of(i, inst.theta_star)));
  }
  return k;
}

}  // namespace logts
