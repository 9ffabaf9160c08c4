#pragma once

// Slow reference computations used to cross-check the fast paths. None of
// them calls the closed forms they are compared against.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <vector>

#include "logts/error.hpp"
#include "logts/linalg.hpp"
#include "logts/model.hpp"
#include "logts/problems.hpp"
#include "logts/run_state.hpp"

namespace logts::oracle {

inline double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

/// H_w(theta) = sum_x w_x mu_dot(x'theta) x x', straight from the definition.
inline Mat fisher(const ArmSet& arms, const std::vector<double>& w, const Vec& theta) {
  Mat h = Mat::Zero(arms.dim(), arms.dim());
  for (int i = 0; i < arms.size(); ++i) {
    const Vec x = arms.arm(i);
    const double p = sigmoid(x.dot(theta));
    h += w[static_cast<std::size_t>(i)] * p * (1.0 - p) * (x * x.transpose());
  }
  return h;
}

/// Golden-section minimization of a unimodal f on [a, b].
inline double golden_section(const std::function<double(double)>& f, double a, double b,
                             double tol = 1e-13) {
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - g * (b - a), d = a + g * (b - a);
  double fc = f(c), fd = f(d);
  for (int it = 0; it < 400 && (b - a) > tol * (1.0 + std::abs(a) + std::abs(b)); ++it) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - g * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + g * (b - a);
      fd = f(d);
    }
  }
  return 0.5 * (a + b);
}

/// Line minimum of a convex f along one coordinate: expand a bracket around
/// s0, then golden section.
inline double line_minimize(const std::function<double(double)>& f, double s0) {
  double step = 1.0 + std::abs(s0);
  double lo = s0 - step, hi = s0 + step;
  for (int i = 0; i < 200 && f(lo) < f(s0); ++i) lo -= (step *= 2.0);
  step = 1.0 + std::abs(s0);
  for (int i = 0; i < 200 && f(hi) < f(s0); ++i) hi += (step *= 2.0);
  return golden_section(f, lo, hi);
}

/// min over {lambda : y'lambda = b} of 1/2 ||theta - lambda||^2_H, by
/// coordinate-wise golden-section search in an orthonormal parametrization
/// of the hyperplane.
inline double hyperplane_min(const Vec& theta, const Mat& h, const Vec& y, double b) {
  const int d = static_cast<int>(theta.size());
  const double yy = y.squaredNorm();
  const Vec base = theta - ((y.dot(theta) - b) / yy) * y;  // Euclidean foot point
  // orthonormal basis of y-perp by Gram-Schmidt over the unit vectors
  std::vector<Vec> basis;
  std::vector<Vec> span{y / std::sqrt(yy)};
  for (int i = 0; i < d && static_cast<int>(basis.size()) < d - 1; ++i) {
    Vec v = Vec::Zero(d);
    v(i) = 1.0;
    for (const auto& q : span) v -= q.dot(v) * q;
    if (v.norm() < 1e-8) continue;
    v.normalize();
    span.push_back(v);
    basis.push_back(v);
  }
  std::vector<double> s(basis.size(), 0.0);
  const auto point = [&] {
    Vec lam = base;
    for (std::size_t k = 0; k < basis.size(); ++k) lam += s[k] * basis[k];
    return lam;
  };
  const auto objective = [&](const Vec& lam) {
    const Vec diff = theta - lam;
    return 0.5 * diff.dot(h * diff);
  };
  double best = objective(point());
  for (int sweep = 0; sweep < 500 && !basis.empty(); ++sweep) {
    const double before = best;
    for (std::size_t k = 0; k < basis.size(); ++k) {
      const auto along = [&](double v) {
        const double keep = s[k];
        s[k] = v;
        const double f = objective(point());
        s[k] = keep;
        return f;
      };
      s[k] = line_minimize(along, s[k]);
    }
    best = objective(point());
    if (basis.size() == 1 || before - best <= 1e-15 * std::abs(before)) break;
  }
  return best;
}

/// One face of the alternative set: {lambda : y'lambda = b}.
struct Face {
  Vec y;
  double b;
};

/// Boundaries of the halfspaces whose union covers Alt(theta), built from
/// the problem definitions: BAI, some arm overtakes the best one; TBP, some
/// arm crosses the threshold; TopM, some arm crosses the m-th best arm.
inline std::vector<Face> alternative_faces(const ProblemSpec& spec, const ArmSet& arms,
                                           const Vec& theta) {
  std::vector<double> z(static_cast<std::size_t>(arms.size()));
  for (int i = 0; i < arms.size(); ++i) z[static_cast<std::size_t>(i)] = arms.arm(i).dot(theta);
  std::vector<Face> faces;
  if (spec.kind == ProblemKind::bai) {
    int best = 0;
    for (int i = 1; i < arms.size(); ++i) {
      if (z[static_cast<std::size_t>(i)] > z[static_cast<std::size_t>(best)]) best = i;
    }
    for (int i = 0; i < arms.size(); ++i) {
      if (i != best) faces.push_back({Vec(arms.arm(best) - arms.arm(i)), 0.0});
    }
  } else if (spec.kind == ProblemKind::tbp) {
    const double c = std::log(spec.rho / (1.0 - spec.rho));
    for (int i = 0; i < arms.size(); ++i) faces.push_back({arms.arm(i), c});
  } else {
    std::vector<int> order(static_cast<std::size_t>(arms.size()));
    for (int i = 0; i < arms.size(); ++i) order[static_cast<std::size_t>(i)] = i;
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
      return z[static_cast<std::size_t>(a)] > z[static_cast<std::size_t>(b)];
    });
    const int pivot = order[static_cast<std::size_t>(spec.m - 1)];
    for (int i = 0; i < arms.size(); ++i) {
      if (i != pivot) faces.push_back({Vec(arms.arm(i) - arms.arm(pivot)), 0.0});
    }
  }
  return faces;
}

/// psi(theta, w) by numerical minimization over every face.
inline double psi_bruteforce(const ProblemSpec& spec, const ArmSet& arms, const Vec& theta,
                             const std::vector<double>& w) {
  const Mat h = fisher(arms, w, theta);
  double best = std::numeric_limits<double>::infinity();
  for (const auto& f : alternative_faces(spec, arms, theta)) {
    best = std::min(best, hyperplane_min(theta, h, f.y, f.b));
  }
  return best;
}

/// Visits every w on the simplex grid {n / resolution : sum n = resolution}.
inline void for_each_grid_point(int k, int resolution,
                                const std::function<void(const ArmVector&)>& visit) {
  std::vector<int> n(static_cast<std::size_t>(k), 0);
  ArmVector w(k);
  std::function<void(int, int)> rec = [&](int pos, int left) {
    if (pos == k - 1) {
      n[static_cast<std::size_t>(pos)] = left;
      for (int i = 0; i < k; ++i) w(i) = static_cast<double>(n[static_cast<std::size_t>(i)]) / resolution;
      visit(w);
      return;
    }
    for (int c = 0; c <= left; ++c) {
      n[static_cast<std::size_t>(pos)] = c;
      rec(pos + 1, left - c);
    }
  };
  rec(0, resolution);
}

/// Largest psi(theta, w) over the barycentric grid of the given resolution.
/// psi at each grid point comes from the halfspace closed form, which is
/// checked separately against psi_bruteforce.
inline double grid_max_psi(const ProblemSpec& spec, const ArmSet& arms, const Vec& theta,
                           int resolution = 200) {
  const auto comps = comparisons(spec, arms, theta);
  const int k = arms.size();
  std::vector<Mat> outer;
  for (int i = 0; i < k; ++i) {
    const Vec x = arms.arm(i);
    const double p = sigmoid(x.dot(theta));
    outer.push_back(p * (1.0 - p) * (x * x.transpose()));
  }
  double best = 0.0;
  for_each_grid_point(k, resolution, [&](const ArmVector& w) {
    Mat h = Mat::Zero(arms.dim(), arms.dim());
    for (int i = 0; i < k; ++i) {
      if (w(i) > 0.0) h += w(i) * outer[static_cast<std::size_t>(i)];
    }
    if (min_eigenvalue(h) <= 1e-12 * h.trace()) return;  // zero information somewhere
    best = std::max(best, psi_from_fisher(comps, h).value);
  });
  return best;
}

/// Largest lambda_min(sum_{x in X0} x x') over all d-subsets X0.
inline double best_basis_lambda_min(const ArmSet& arms) {
  const int k = arms.size();
  const int d = arms.dim();
  double best = 0.0;
  std::vector<int> pick(static_cast<std::size_t>(d));
  std::function<void(int, int)> rec = [&](int pos, int start) {
    if (pos == d) {
      Mat g = Mat::Zero(d, d);
      for (int i : pick) {
        const Vec x = arms.arm(i);
        g += x * x.transpose();
      }
      best = std::max(best, min_eigenvalue(g));
      return;
    }
    for (int i = start; i < k; ++i) {
      pick[static_cast<std::size_t>(pos)] = i;
      rec(pos + 1, i + 1);
    }
  };
  rec(0, 0);
  return best;
}

/// log-likelihood by a loop over the individual pulls.
inline double log_likelihood_naive(const ArmSet& arms, const std::vector<Pull>& pulls,
                                   const Vec& theta) {
  double ll = 0.0;
  for (const auto& p : pulls) {
    const double m = sigmoid(arms.arm(p.arm).dot(theta));
    ll += p.reward == 1 ? std::log(m) : std::log(1.0 - m);
  }
  return ll;
}

inline Vec g_function_naive(const ArmSet& arms, const std::vector<Pull>& pulls, const Vec& theta) {
  Vec g = Vec::Zero(arms.dim());
  for (const auto& p : pulls) {
    const Vec x = arms.arm(p.arm);
    g += sigmoid(x.dot(theta)) * x;
  }
  return g;
}

/// F(theta) = ||g(theta) - g(mle)||^2_{H(theta)^{-1}}, recomputed from pulls.
inline double projection_objective_naive(const ArmSet& arms, const std::vector<Pull>& pulls,
                                         const Vec& theta, const Vec& mle) {
  const Vec r = g_function_naive(arms, pulls, theta) - g_function_naive(arms, pulls, mle);
  Mat h = Mat::Zero(arms.dim(), arms.dim());
  for (const auto& p : pulls) {
    const Vec x = arms.arm(p.arm);
    const double m = sigmoid(x.dot(theta));
    h += m * (1.0 - m) * (x * x.transpose());
  }
  return r.dot(h.ldlt().solve(r));
}

/// Minimum of the projection objective over n equispaced points of the
/// radius-S circle (d = 2 only).
inline double sphere_grid_min(const ArmSet& arms, const std::vector<Pull>& pulls, const Vec& mle,
                              double radius, int n) {
  require(arms.dim() == 2, ErrorKind::structural, "sphere grid oracle is two-dimensional");
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i) {
    const double a = 2.0 * 3.14159265358979323846 * i / n;
    Vec t(2);
    t << radius * std::cos(a), radius * std::sin(a);
    best = std::min(best, projection_objective_naive(arms, pulls, t, mle));
  }
  return best;
}

}  // namespace logts::oracle
