#include <gtest/gtest.h>

#include <atomic>
#include <cmath>

#include "helpers.hpp"
#include "logts/oracles.hpp"
#include "logts/verify.hpp"

using namespace logts;
using test::vec;

namespace {

double psi_at(const ProblemSpec& spec, const ArmSet& arms, const Vec& theta, const ArmVector& w) {
  return inner_inf(spec, arms, theta, Allocation::normalized(w)).value;
}

}  // namespace

TEST(FrankWolfe, TwoArmsMatchesFineLineSearch) {
  const ArmSet arms = test::basis_arms(2);
  const Vec theta = vec({1.0, 0.3});
  const auto r = optimal_allocation(ProblemSpec::bai(), arms, theta);
  double best = 0.0, best_w = 0.0;
  for (int i = 1; i < 10000; ++i) {
    const double w0 = i / 10000.0;
    const double v = psi_at(ProblemSpec::bai(), arms, theta, (ArmVector(2) << w0, 1 - w0).finished());
    if (v > best) {
      best = v;
      best_w = w0;
    }
  }
  EXPECT_NEAR(r.value, best, 0.01 * best);
  EXPECT_NEAR(r.allocation[0], best_w, 0.01);
  // the optimum weights each arm by 1/sqrt(mu_dot)
  const double a = 1.0 / std::sqrt(mu_dot(1.0)), b = 1.0 / std::sqrt(mu_dot(0.3));
  EXPECT_NEAR(r.allocation[0], a / (a + b), 1e-3);
}

TEST(FrankWolfe, SymmetricInstanceGivesSymmetricWeights) {
  // mirror image in the first axis; theta on the axis
  const ArmSet arms = test::arms({{1.0, 0.0}, {0.6, 0.8}, {0.6, -0.8}});
  const auto r = optimal_allocation(ProblemSpec::bai(), arms, vec({1.0, 0.0}));
  EXPECT_NEAR(r.allocation[1], r.allocation[2], 1e-3);
}

TEST(FrankWolfe, HardInstanceNearGridMaximum) {
  for (double alpha : {0.1, 0.3}) {
    const Instance inst = generate(GeneratorConfig::hard_bai(2, alpha));
    const auto r = optimal_allocation(inst.spec, inst.arms, inst.theta_star);
    const double grid = oracle::grid_max_psi(inst.spec, inst.arms, inst.theta_star, 400);
    EXPECT_GE(r.value, 0.98 * grid) << "alpha " << alpha;
    EXPECT_LE(r.value, 1.02 * grid) << "alpha " << alpha;
  }
}

TEST(FrankWolfe, TbpAndTopMNearGridMaximum) {
  Rng rng(51);
  for (const auto& spec : {ProblemSpec::tbp(0.4), ProblemSpec::topm(2)}) {
    for (int c = 0; c < 3; ++c) {
      const auto [arms, theta] = verify::random_instance(rng, 4, 2, spec);
      const auto r = optimal_allocation(spec, arms, theta);
      const double grid = oracle::grid_max_psi(spec, arms, theta, 60);
      EXPECT_GE(r.value, 0.98 * grid);
    }
  }
}

TEST(FrankWolfe, BestHistoryNondecreasingAndAllocationFeasible) {
  const Instance inst = generate(GeneratorConfig::hard_tbp(3, 0.3, 0.3));
  FwConfig cfg;
  cfg.record_history = true;
  cfg.rel_gap_tol = 0.0;
  cfg.max_iters = 500;
  const auto r = optimal_allocation(inst.spec, inst.arms, inst.theta_star, cfg);
  ASSERT_EQ(r.best_history.size(), 500u);
  for (std::size_t i = 1; i < r.best_history.size(); ++i) {
    EXPECT_GE(r.best_history[i], r.best_history[i - 1]);
  }
  EXPECT_NEAR(r.allocation.weights().sum(), 1.0, 1e-12);
  EXPECT_GE(r.allocation.weights().minCoeff(), 0.0);
  EXPECT_NEAR(r.value, r.best_history.back(), 1e-12 * r.value);
}

TEST(FrankWolfe, ValueIsPsiAtReturnedAllocation) {
  Rng rng(52);
  for (int c = 0; c < 10; ++c) {
    const auto [arms, theta] = verify::random_instance(rng, 5, 3, ProblemSpec::bai());
    const auto r = optimal_allocation(ProblemSpec::bai(), arms, theta);
    const PsiValue psi = inner_inf(ProblemSpec::bai(), arms, theta, r.allocation);
    EXPECT_EQ(r.value, psi.value);
    EXPECT_EQ(r.active_arm, psi.active_arm);
    EXPECT_GE(r.value, psi_at(ProblemSpec::bai(), arms, theta, ArmVector::Constant(5, 0.2)));
  }
}

TEST(CharacteristicTime, ReciprocalOfValue) {
  const Instance inst = generate(GeneratorConfig::hard_bai(2, 0.3));
  const auto r = optimal_allocation(inst.spec, inst.arms, inst.theta_star);
  EXPECT_NEAR(characteristic_time(r) * r.value, 1.0, 1e-15);
  EXPECT_EQ(characteristic_time(inst.spec, inst.arms, inst.theta_star), characteristic_time(r));
  EXPECT_TRUE(std::isinf(characteristic_time(0.0)));
  const auto zero = optimal_allocation(ProblemSpec::bai(), test::basis_arms(2), vec({0.5, 0.5}));
  EXPECT_EQ(zero.value, 0.0);
  EXPECT_TRUE(std::isinf(characteristic_time(zero)));
}

TEST(CharacteristicTime, GrowsAsInstanceHardens) {
  double prev = 0.0;
  for (double alpha : {0.4, 0.2, 0.1}) {
    const Instance inst = generate(GeneratorConfig::hard_bai(2, alpha));
    const double t = characteristic_time(inst.spec, inst.arms, inst.theta_star);
    EXPECT_GT(t, prev) << "alpha " << alpha;
    prev = t;
  }
}

TEST(LowerBound, Formula) {
  EXPECT_NEAR(lower_bound_samples(0.1, 1000.0), std::log(1.0 / 0.24) * 1000.0, 1e-9);
  EXPECT_GT(lower_bound_samples(0.01, 1000.0), lower_bound_samples(0.1, 1000.0));
}

TEST(Supergradient, MatchesDirectionalDerivative) {
  // At a point with a unique active halfspace, psi is differentiable and its
  // derivative along e_j - w equals grad_j - <grad, w>.
  Rng rng(53);
  const ArmSet arms = test::arms({{1.0, 0.0}, {0.0, 1.0}, {0.6, 0.8}, {-0.8, 0.6}});
  const Vec theta = vec({1.2, 0.4});
  const auto comps = comparisons(ProblemSpec::bai(), arms, theta);
  for (int c = 0; c < 10; ++c) {
    const auto wv = verify::random_weights(rng, 4);
    const ArmVector w = Eigen::Map<const ArmVector>(wv.data(), 4);
    const Mat h = fisher_weighted(arms, Allocation::normalized(w), theta);
    const PsiValue psi = psi_from_fisher(comps, h);
    const auto& cmp = comps[static_cast<std::size_t>(psi.active)];
    const Vec u = h.ldlt().solve(cmp.direction);
    const double q = cmp.direction.dot(u);
    ArmVector grad(4);
    for (int a = 0; a < 4; ++a) {
      const double xu = arms.arm(a).dot(u);
      grad(a) = cmp.gap * cmp.gap / (2 * q * q) * mu_dot(arms.logit_of(a, theta)) * xu * xu;
    }
    for (int j = 0; j < 4; ++j) {
      ArmVector dir = -w;
      dir(j) += 1.0;
      const double eps = 1e-7;
      const double fd = (psi_at(ProblemSpec::bai(), arms, theta, w + eps * dir) -
                         psi_at(ProblemSpec::bai(), arms, theta, w - eps * dir)) /
                        (2 * eps);
      EXPECT_NEAR(fd, grad.dot(dir), 1e-5 * (1.0 + std::abs(fd)));
    }
  }
}

TEST(Psi, ConcaveInAllocation) {
  Rng rng(54);
  for (const auto& spec : {ProblemSpec::bai(), ProblemSpec::tbp(0.6), ProblemSpec::topm(2)}) {
    const auto [arms, theta] = verify::random_instance(rng, 5, 3, spec);
    for (int c = 0; c < 20; ++c) {
      const auto a = verify::random_weights(rng, 5);
      const auto b = verify::random_weights(rng, 5);
      const ArmVector wa = Eigen::Map<const ArmVector>(a.data(), 5);
      const ArmVector wb = Eigen::Map<const ArmVector>(b.data(), 5);
      const double lam = uniform01(rng);
      const double mid = psi_at(spec, arms, theta, lam * wa + (1 - lam) * wb);
      const double chord =
          lam * psi_at(spec, arms, theta, wa) + (1 - lam) * psi_at(spec, arms, theta, wb);
      EXPECT_GE(mid, chord * (1.0 - 1e-10));
    }
  }
}

TEST(FrankWolfe, CancelReturnsImmediately) {
  const Instance inst = generate(GeneratorConfig::hard_bai(2, 0.3));
  std::atomic<bool> stop{true};
  FwConfig cfg;
  cfg.cancel = &stop;
  const auto r = optimal_allocation(inst.spec, inst.arms, inst.theta_star, cfg);
  EXPECT_TRUE(r.cancelled);
  EXPECT_EQ(r.iterations, 0);
  EXPECT_NEAR(r.allocation.weights().sum(), 1.0, 1e-12);
  EXPECT_THROW(
      [] {
        FwConfig bad;
        bad.lazy_stride = 0;
        bad.validate();
      }(),
      Error);
}
