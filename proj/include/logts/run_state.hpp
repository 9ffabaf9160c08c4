#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "logts/error.hpp"
#include "logts/linalg.hpp"
#include "logts/model.hpp"

namespace logts {

struct Pull {
  int arm;
  int reward;  // 0 or 1
};

/// Round history of one run, kept as per-arm sufficient statistics. The
/// likelihood, g_t and H_t only depend on (N_x, sum of rewards on x), so
/// every per-round quantity costs O(K d^2) regardless of t.
class RunState {
 public:
  explicit RunState(ArmSet arms, bool record_history = false)
      : arms_(std::move(arms)),
        counts_(ArmVector::Zero(arms_.size())),
        successes_(ArmVector::Zero(arms_.size())),
        design_(zero_matrix(arms_.dim())),
        reward_moment_(zero_vector(arms_.dim())),
        record_history_(record_history) {}

  static RunState from_history(ArmSet arms, const std::vector<Pull>& pulls,
                               bool record_history = true) {
    RunState s(std::move(arms), record_history);
    for (const auto& p : pulls) s.add(p.arm, p.reward);
    return s;
  }

  void add(int arm, int reward) {
    require(arm >= 0 && arm < arms_.size(), ErrorKind::structural, "arm index out of range");
    require(reward == 0 || reward == 1, ErrorKind::structural, "reward must be 0 or 1");
    const auto x = arms_.matrix().row(arm);
    counts_(arm) += 1.0;
    successes_(arm) += reward;
    add_outer(design_, x.data(), 1.0);
    if (reward == 1) reward_moment_ += x.transpose();
    ++t_;
    if (record_history_) pulls_.push_back({arm, reward});
  }

  const ArmSet& arms() const { return arms_; }
  std::int64_t t() const { return t_; }
  int dim() const { return arms_.dim(); }
  int num_arms() const { return arms_.size(); }

  /// N_x(t)
  const ArmVector& counts() const { return counts_; }
  /// per-arm reward sums
  const ArmVector& successes() const { return successes_; }
  /// A_t = sum_s x_s x_s'
  const Mat& design() const { return design_; }
  /// sum_s r_s x_s
  const Vec& reward_moment() const { return reward_moment_; }
  /// Empty unless constructed with record_history.
  const std::vector<Pull>& pulls() const { return pulls_; }

 private:
  ArmSet arms_;
  ArmVector counts_;
  ArmVector successes_;
  Mat design_;
  Vec reward_moment_;
  std::int64_t t_ = 0;
  bool record_history_ = false;
  std::vector<Pull> pulls_;
};

/// H_t(theta) = sum_s mu_dot(x_s'theta) x_s x_s', computed from pull counts.
inline Mat fisher_empirical(const RunState& state, const Vec& theta) {
  require(state.t() >= 1, ErrorKind::structural, "fisher_empirical on an empty history");
  return weighted_fisher(state.arms(), state.counts(), theta);
}

}  // namespace logts
