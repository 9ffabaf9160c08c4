#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "logts/error.hpp"
#include "logts/linalg.hpp"

namespace logts {

/// Logistic link 1/(1+e^{-z}), evaluated through exp(-|z|) so neither branch
/// overflows.
inline double mu(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

/// Derivative of the link, mu(z)(1 - mu(z)). Written as e/(1+e)^2 with
/// e = exp(-|z|) to avoid the cancellation in 1 - mu for large |z|.
inline double mu_dot(double z) {
  const double e = std::exp(-std::abs(z));
  const double s = 1.0 + e;
  return e / (s * s);
}

inline double mu_ddot(double z) { return mu_dot(z) * (1.0 - 2.0 * mu(z)); }

/// mu, mu_dot and mu_ddot at one point from a single exponential.
struct LinkValues {
  double mu;
  double dot;
  double ddot;
};

inline LinkValues link_values(double z) {
  const double e = std::exp(-std::abs(z));
  const double s = 1.0 + e;
  const double m = z >= 0.0 ? 1.0 / s : e / s;
  const double dot = e / (s * s);
  return {m, dot, dot * (1.0 - 2.0 * m)};
}

/// Bernoulli log-partition A(z) = log(1 + e^z).
inline double log_partition(double z) {
  return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z)));
}

inline double logit(double p) { return std::log(p / (1.0 - p)); }

/// The finite arm set X, stored as a K x d row-major matrix.
class ArmSet {
 public:
  using Storage = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

  ArmSet() = default;

  explicit ArmSet(Storage rows) : x_(std::move(rows)) { validate(); }

  explicit ArmSet(const std::vector<std::vector<double>>& rows) {
    require(!rows.empty(), ErrorKind::structural, "arm set is empty");
    const auto d = rows.front().size();
    x_.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(d));
    for (std::size_t i = 0; i < rows.size(); ++i) {
      require(rows[i].size() == d, ErrorKind::structural,
              "arm " + std::to_string(i) + " has dimension " + std::to_string(rows[i].size()) +
                  ", expected " + std::to_string(d));
      for (std::size_t j = 0; j < d; ++j) {
        x_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
      }
    }
    validate();
  }

  int size() const { return static_cast<int>(x_.rows()); }
  int dim() const { return static_cast<int>(x_.cols()); }

  Vec arm(int i) const { return x_.row(i).transpose(); }
  double logit_of(int i, const Vec& theta) const { return x_.row(i).dot(theta); }

  /// x_i' theta for every arm.
  ArmVector logits(const Vec& theta) const {
    check_dim(theta);
    return x_ * theta;
  }

  const Storage& matrix() const { return x_; }

  std::vector<std::vector<double>> to_rows() const {
    std::vector<std::vector<double>> out(static_cast<std::size_t>(size()));
    for (int i = 0; i < size(); ++i) {
      for (int j = 0; j < dim(); ++j) out[static_cast<std::size_t>(i)].push_back(x_(i, j));
    }
    return out;
  }

  void check_dim(const Vec& v) const {
    if (v.size() != dim()) {
      fail(ErrorKind::structural, "vector of dimension " + std::to_string(v.size()) +
                                      " used with arms of dimension " + std::to_string(dim()));
    }
  }

 private:
  void validate() const {
    require(x_.rows() >= 2, ErrorKind::structural, "need at least two arms");
    require(x_.cols() >= 1 && x_.cols() <= kMaxDim, ErrorKind::structural,
            "arm dimension must be in [1, " + std::to_string(kMaxDim) + "]");
    for (Eigen::Index i = 0; i < x_.rows(); ++i) {
      require(x_.row(i).allFinite(), ErrorKind::structural, "non-finite arm entry");
      require(x_.row(i).norm() <= 1.0 + 1e-12, ErrorKind::structural,
              "arm " + std::to_string(i) + " has norm > 1");
    }
    const Mat gram = x_.transpose() * x_;
    require(min_eigenvalue(gram) > 1e-12 * std::max(1.0, gram.trace()), ErrorKind::structural,
            "arms do not span R^d");
  }

  Storage x_;
};

/// sum_x weight_x * mu_dot(x'theta) * x x'. Accepts any nonnegative weights,
/// so it serves both simplex allocations and raw pull counts.
inline Mat weighted_fisher(const ArmSet& arms, const ArmVector& weights, const Vec& theta) {
  require(weights.size() == arms.size(), ErrorKind::structural,
          "weight vector length does not match the number of arms");
  arms.check_dim(theta);
  const int d = arms.dim();
  Mat h = zero_matrix(d);
  const auto& xs = arms.matrix();
  for (int i = 0; i < arms.size(); ++i) {
    const double wi = weights(i);
    if (wi == 0.0) continue;
    add_outer(h, xs.row(i).data(), wi * mu_dot(xs.row(i).dot(theta)));
  }
  return h;
}

/// KL divergence between Bernoulli(mu(x'theta)) and Bernoulli(mu(x'lambda)),
/// in natural-parameter form (eta1 - eta2) mu(eta1) - A(eta1) + A(eta2).
inline double kl_bernoulli_logit(const Vec& x, const Vec& theta, const Vec& lambda) {
  require(x.size() == theta.size() && x.size() == lambda.size(), ErrorKind::structural,
          "dimension mismatch in kl_bernoulli_logit");
  const double e1 = x.dot(theta);
  const double e2 = x.dot(lambda);
  const double kl = (e1 - e2) * mu(e1) - log_partition(e1) + log_partition(e2);
  return std::max(kl, 0.0);
}

/// Second-order expansion 1/2 mu_dot(x'theta) (x'(theta - lambda))^2.
inline double kl_quadratic(const Vec& x, const Vec& theta, const Vec& lambda) {
  const double e1 = x.dot(theta);
  const double gap = e1 - x.dot(lambda);
  return 0.5 * mu_dot(e1) * gap * gap;
}

}  // namespace logts
