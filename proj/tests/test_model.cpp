#include <gtest/gtest.h>

#include <cmath>

#include "helpers.hpp"
#include "logts/oracles.hpp"
#include "logts/verify.hpp"

using namespace logts;
using test::vec;

TEST(Mu, ReferenceValues) {
  EXPECT_DOUBLE_EQ(mu(0.0), 0.5);
  EXPECT_NEAR(mu(40.0), 1.0, 1e-15);
  EXPECT_NEAR(mu(1.0), 0.7310585786300049, 1e-15);
  EXPECT_NEAR(mu(-1.0), 0.2689414213699951, 1e-15);
}

TEST(Mu, StableAtExtremes) {
  for (double z : {-700.0, -300.0, 300.0, 700.0}) {
    EXPECT_TRUE(std::isfinite(mu(z)));
    EXPECT_GE(mu(z), 0.0);
    EXPECT_LE(mu(z), 1.0);
  }
  EXPECT_GT(mu(-700.0), 0.0);
}

TEST(Mu, ComplementSymmetry) {
  for (double z = -30.0; z <= 30.0; z += 0.37) {
    EXPECT_GT(mu(z), 0.0);
    EXPECT_LT(mu(z), 1.0);
    EXPECT_NEAR(mu(z) + mu(-z), 1.0, 1e-15);
  }
}

TEST(MuDot, ReferenceValues) {
  EXPECT_DOUBLE_EQ(mu_dot(0.0), 0.25);
  const double p = 0.8807970779778823;  // mu(2)
  EXPECT_NEAR(mu_dot(2.0), p * (1.0 - p), 1e-15);
  for (double z : {0.3, 1.7, 5.0, 12.0}) EXPECT_DOUBLE_EQ(mu_dot(z), mu_dot(-z));
}

TEST(MuDot, MatchesFiniteDifference) {
  const double h = 1e-5;
  for (double z = -10.0; z <= 10.0; z += 0.25) {
    EXPECT_NEAR(mu_dot(z), (mu(z + h) - mu(z - h)) / (2 * h), 1e-6);
    EXPECT_GT(mu_dot(z), 0.0);
    EXPECT_LE(mu_dot(z), 0.25);
  }
}

TEST(MuDdot, MatchesFiniteDifference) {
  const double h = 1e-5;
  for (double z = -8.0; z <= 8.0; z += 0.5) {
    EXPECT_NEAR(mu_ddot(z), (mu_dot(z + h) - mu_dot(z - h)) / (2 * h), 1e-6);
    EXPECT_LE(std::abs(mu_ddot(z)), mu_dot(z));
    const LinkValues lv = link_values(z);
    EXPECT_NEAR(lv.mu, mu(z), 1e-15);
    EXPECT_NEAR(lv.dot, mu_dot(z), 1e-15);
    EXPECT_NEAR(lv.ddot, mu_ddot(z), 1e-15);
  }
}

TEST(ArmSet, RejectsInvalidSets) {
  EXPECT_THROW(test::arms({{1.0, 0.0}}), Error);                    // one arm
  EXPECT_THROW(test::arms({{1.0, 0.0}, {0.5, 0.0}}), Error);        // no span
  EXPECT_THROW(test::arms({{1.0, 0.1}, {0.0, 1.0}}), Error);        // norm > 1
  EXPECT_THROW(test::arms({{1.0, 0.0}, {0.0}}), Error);             // ragged
  const ArmSet a = test::arms({{1.0, 0.0}, {0.0, 1.0}});
  EXPECT_THROW(a.check_dim(vec({1.0, 2.0, 3.0})), Error);
  try {
    test::arms({{1.0, 0.0}, {0.5, 0.0}});
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::structural);
  }
}

TEST(FisherWeighted, Examples) {
  const ArmSet a = test::arms({{0.6, 0.8}, {0.0, 1.0}, {1.0, 0.0}});
  const Vec x1 = a.arm(0);
  const Mat h = fisher_weighted(a, Allocation::vertex(3, 0), Vec::Zero(2));
  EXPECT_LT((h - 0.25 * x1 * x1.transpose()).cwiseAbs().maxCoeff(), 1e-15);

  const ArmSet e = test::basis_arms(2);
  const Mat hu = fisher_weighted(e, Allocation::uniform(2), Vec::Zero(2));
  EXPECT_LT((hu - 0.125 * Mat::Identity(2, 2)).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(FisherWeighted, MatchesNaiveSummation) {
  Rng rng(11);
  const ArmSet a = test::arms({{0.6, 0.8, 0.0}, {0.0, 1.0, 0.0}, {0.3, -0.2, 0.9}});
  for (int c = 0; c < 20; ++c) {
    const Vec theta = 3.0 * detail::random_unit(3, rng);
    std::vector<double> w{uniform01(rng), uniform01(rng), uniform01(rng)};
    const double s = w[0] + w[1] + w[2];
    for (auto& v : w) v /= s;
    const Mat fast =
        fisher_weighted(a, Allocation::normalized(Eigen::Map<ArmVector>(w.data(), 3)), theta);
    const Mat ref = oracle::fisher(a, w, theta);
    EXPECT_LT((fast - ref).cwiseAbs().maxCoeff(), 1e-14);
    EXPECT_EQ(fast, fast.transpose());
    EXPECT_GE(min_eigenvalue(fast), 0.0);
  }
}

TEST(FisherWeighted, LinearInWeights) {
  Rng rng(3);
  const ArmSet a = test::arms({{0.6, 0.8}, {0.0, 1.0}, {1.0, 0.0}, {-0.5, 0.5}});
  const Vec theta = vec({0.7, -1.3});
  const ArmVector w1 = (ArmVector(4) << 0.1, 0.2, 0.3, 0.4).finished();
  const ArmVector w2 = (ArmVector(4) << 0.5, 0.0, 0.25, 0.25).finished();
  for (double al : {0.0, 0.3, 0.77, 1.0}) {
    const Allocation mix(al * w1 + (1 - al) * w2);
    const Mat lhs = fisher_weighted(a, mix, theta);
    const Mat rhs = al * fisher_weighted(a, Allocation(w1), theta) +
                    (1 - al) * fisher_weighted(a, Allocation(w2), theta);
    EXPECT_LT((lhs - rhs).cwiseAbs().maxCoeff(), 1e-13);
  }
  EXPECT_THROW(fisher_weighted(a, Allocation::uniform(3), theta), Error);
}

TEST(FisherEmpirical, SinglePull) {
  const ArmSet a = test::arms({{0.6, 0.8}, {0.0, 1.0}});
  RunState s(a);
  s.add(0, 1);
  const Vec theta = vec({1.0, -0.4});
  const Vec x = a.arm(0);
  const Mat expect = mu_dot(x.dot(theta)) * x * x.transpose();
  EXPECT_LT((fisher_empirical(s, theta) - expect).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_THROW(fisher_empirical(RunState(a), theta), Error);
}

TEST(FisherEmpirical, EqualsTTimesWeightedFisher) {
  Rng rng(5);
  const ArmSet a = test::arms({{0.6, 0.8}, {0.0, 1.0}, {1.0, 0.0}});
  const auto pulls = test::random_pulls(rng, 3, 50);
  const RunState s = RunState::from_history(a, pulls);
  const Vec theta = vec({0.9, 0.2});
  const Mat ht = fisher_empirical(s, theta);
  const Mat hw = static_cast<double>(s.t()) *
                 fisher_weighted(a, Allocation::normalized(s.counts()), theta);
  EXPECT_LT((ht - hw).cwiseAbs().maxCoeff(), 1e-12 * ht.cwiseAbs().maxCoeff());

  Mat naive = Mat::Zero(2, 2);
  for (const auto& p : pulls) {
    const Vec x = a.arm(p.arm);
    naive += mu_dot(x.dot(theta)) * x * x.transpose();
  }
  EXPECT_LT((ht - naive).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Kl, ZeroAtEqualParameters) {
  const Vec x = vec({0.6, 0.8});
  const Vec theta = vec({0.3, -2.0});
  EXPECT_EQ(kl_bernoulli_logit(x, theta, theta), 0.0);
}

TEST(Kl, MatchesBernoulliFormula) {
  Rng rng(17);
  for (int c = 0; c < 200; ++c) {
    const Vec x = detail::random_unit(3, rng);
    const Vec theta = 3.0 * uniform01(rng) * detail::random_unit(3, rng);
    const Vec lambda = 3.0 * uniform01(rng) * detail::random_unit(3, rng);
    const double p = mu(x.dot(theta));
    const double q = mu(x.dot(lambda));
    const double ref = p * std::log(p / q) + (1 - p) * std::log((1 - p) / (1 - q));
    EXPECT_NEAR(kl_bernoulli_logit(x, theta, lambda), ref, 1e-12);
  }
}

TEST(Kl, NonnegativeAndZeroOnlyOnEqualLogits) {
  Rng rng(19);
  for (int c = 0; c < 500; ++c) {
    const Vec x = detail::random_unit(2, rng);
    const Vec theta = 4.0 * detail::random_unit(2, rng);
    const Vec lambda = 4.0 * detail::random_unit(2, rng);
    const double kl = kl_bernoulli_logit(x, theta, lambda);
    EXPECT_GE(kl, 0.0);
    if (std::abs(x.dot(theta) - x.dot(lambda)) > 1e-3) {
      EXPECT_GT(kl, 0.0);
    }
  }
  // lambda differing from theta only orthogonally to x: same logit
  const Vec x = vec({1.0, 0.0});
  EXPECT_EQ(kl_bernoulli_logit(x, vec({0.5, 1.0}), vec({0.5, -3.0})), 0.0);
}

TEST(Kl, QuadraticApproximationDecaysCubically) {
  const auto k = verify::kl_decay(2024);
  ASSERT_EQ(k.max_error.size(), 3u);
  EXPECT_GT(k.max_error[0], k.max_error[1]);
  EXPECT_GT(k.max_error[1], k.max_error[2]);
  EXPECT_NEAR(k.slope, 3.0, 0.3);
}

TEST(Linalg, MinEigenvalueMatchesSolver) {
  Rng rng(23);
  for (int d = 1; d <= 5; ++d) {
    for (int c = 0; c < 10; ++c) {
      Mat m = Mat::Zero(d, d);
      for (int k = 0; k < d + 2; ++k) add_outer(m, detail::random_unit(d, rng), uniform01(rng));
      Eigen::SelfAdjointEigenSolver<Mat> es(m);
      const double ref = es.eigenvalues()(0);
      EXPECT_NEAR(min_eigenvalue(m), ref, 1e-12);
      EXPECT_TRUE(min_eigenvalue_exceeds(m, ref - 1e-9));
      EXPECT_FALSE(min_eigenvalue_exceeds(m, ref + 1e-9));
    }
  }
}

TEST(Linalg, SpdSolverRegularizesOnlyWhenSingular) {
  Mat h = Mat::Identity(2, 2);
  const SpdSolver plain(h);
  EXPECT_FALSE(plain.regularized());
  EXPECT_NEAR(plain.inv_quad(vec({1.0, 2.0})), 5.0, 1e-14);
  Mat rank1 = Mat::Zero(2, 2);
  add_outer(rank1, vec({1.0, 0.0}), 1.0);
  const SpdSolver reg(rank1);
  EXPECT_TRUE(reg.regularized());
  EXPECT_THROW(SpdSolver(Mat::Zero(2, 2)), Error);
}
