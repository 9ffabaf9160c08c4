#pragma once

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "logts/error.hpp"

namespace logts {

// Feature dimensions stay small; fixing the maximum size keeps every d-sized
// vector and matrix on the stack.
inline constexpr int kMaxDim = 20;

using Vec = Eigen::Matrix<double, Eigen::Dynamic, 1, Eigen::ColMajor, kMaxDim, 1>;
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor,
                          kMaxDim, kMaxDim>;

// K-indexed quantities (weights, counts) are unbounded and live on the heap.
using ArmVector = Eigen::VectorXd;

inline void symmetrize(Mat& m) { m = (0.5 * (m + m.transpose())).eval(); }

// m += c * x x' for a contiguous x of length m.rows(); fills both triangles
// so the result stays exactly symmetric.
inline void add_outer(Mat& m, const double* x, double c) {
  const auto d = m.rows();
  for (Eigen::Index i = 0; i < d; ++i) {
    const double ci = c * x[i];
    for (Eigen::Index j = 0; j <= i; ++j) m(i, j) += ci * x[j];
  }
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = i + 1; j < d; ++j) m(i, j) = m(j, i);
  }
}

inline void add_outer(Mat& m, const Vec& x, double c) { add_outer(m, x.data(), c); }

inline Mat zero_matrix(int d) { return Mat::Zero(d, d); }
inline Vec zero_vector(int d) { return Vec::Zero(d); }

// Smallest eigenvalue of a symmetric matrix. d <= 2 uses the closed form,
// larger sizes the tridiagonal QL solver.
inline double min_eigenvalue(const Mat& m) {
  const auto d = m.rows();
  if (d == 1) return m(0, 0);
  if (d == 2) {
    const double half_tr = 0.5 * (m(0, 0) + m(1, 1));
    const double half_diff = 0.5 * (m(0, 0) - m(1, 1));
    const double off = 0.5 * (m(0, 1) + m(1, 0));
    return half_tr - std::hypot(half_diff, off);
  }
  Eigen::SelfAdjointEigenSolver<Mat> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

// lambda_min(m) > c. For d > 2 this is a Cholesky test of m - c*I, which is
// much cheaper than an eigendecomposition when only the comparison matters.
inline bool min_eigenvalue_exceeds(const Mat& m, double c) {
  const auto d = m.rows();
  if (d <= 2) return min_eigenvalue(m) > c;
  double l[kMaxDim * kMaxDim];
  for (Eigen::Index j = 0; j < d; ++j) {
    double diag = m(j, j) - c;
    for (Eigen::Index k = 0; k < j; ++k) diag -= l[j * d + k] * l[j * d + k];
    if (!(diag > 0.0)) return false;
    const double ljj = std::sqrt(diag);
    l[j * d + j] = ljj;
    for (Eigen::Index i = j + 1; i < d; ++i) {
      double v = m(i, j);
      for (Eigen::Index k = 0; k < j; ++k) v -= l[i * d + k] * l[j * d + k];
      l[i * d + j] = v / ljj;
    }
  }
  return true;
}

// Plain Cholesky factorization for the small dense matrices used here;
// Eigen's blocked LLT costs more than the arithmetic at d <= 20.
class Cholesky {
 public:
  Cholesky() = default;
  explicit Cholesky(const Mat& m) { compute(m); }

  // Returns false when m is not numerically positive definite.
  bool compute(const Mat& m) {
    const auto d = m.rows();
    l_ = zero_matrix(static_cast<int>(d));
    ok_ = false;
    for (Eigen::Index j = 0; j < d; ++j) {
      double diag = m(j, j);
      for (Eigen::Index k = 0; k < j; ++k) diag -= l_(j, k) * l_(j, k);
      if (!(diag > 0.0) || !std::isfinite(diag)) return false;
      const double ljj = std::sqrt(diag);
      l_(j, j) = ljj;
      for (Eigen::Index i = j + 1; i < d; ++i) {
        double v = m(i, j);
        for (Eigen::Index k = 0; k < j; ++k) v -= l_(i, k) * l_(j, k);
        l_(i, j) = v / ljj;
      }
    }
    ok_ = true;
    return true;
  }

  bool ok() const { return ok_; }

  // L^{-1} y
  Vec forward(const Vec& y) const {
    const auto d = l_.rows();
    Vec z(d);
    for (Eigen::Index i = 0; i < d; ++i) {
      double v = y(i);
      for (Eigen::Index k = 0; k < i; ++k) v -= l_(i, k) * z(k);
      z(i) = v / l_(i, i);
    }
    return z;
  }

  // M^{-1} y
  Vec solve(const Vec& y) const {
    Vec z = forward(y);
    for (Eigen::Index i = l_.rows() - 1; i >= 0; --i) {
      double v = z(i);
      for (Eigen::Index k = i + 1; k < l_.rows(); ++k) v -= l_(k, i) * z(k);
      z(i) = v / l_(i, i);
    }
    return z;
  }

 private:
  Mat l_;
  bool ok_ = false;
};

// Factorization of an information matrix H. When H is not numerically
// positive definite it is replaced by H + eps*I, eps = rel_floor * trace(H) / d.
class SpdSolver {
 public:
  explicit SpdSolver(const Mat& h, double rel_floor = 1e-10) {
    const auto d = h.rows();
    const double tr = h.trace();
    if (!(tr > 0.0) || !std::isfinite(tr)) {
      fail(ErrorKind::degenerate, "information matrix has zero trace");
    }
    if (chol_.compute(h)) return;
    Mat reg = h;
    reg.diagonal().array() += rel_floor * tr / static_cast<double>(d);
    regularized_ = true;
    if (!chol_.compute(reg)) {
      fail(ErrorKind::degenerate, "information matrix is not positive definite");
    }
  }

  bool regularized() const { return regularized_; }

  Vec solve(const Vec& y) const { return chol_.solve(y); }

  // y' H^{-1} y
  double inv_quad(const Vec& y) const { return chol_.forward(y).squaredNorm(); }

 private:
  Cholesky chol_;
  bool regularized_ = false;
};

}  // namespace logts
