#pragma once

#include <initializer_list>
#include <vector>

#include "logts/logts.hpp"

namespace logts::test {

inline Vec vec(std::initializer_list<double> v) {
  Vec out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

inline ArmSet arms(std::initializer_list<std::initializer_list<double>> rows) {
  std::vector<std::vector<double>> r;
  for (const auto& row : rows) r.emplace_back(row);
  return ArmSet(r);
}

inline ArmSet basis_arms(int d) {
  ArmSet::Storage x = ArmSet::Storage::Identity(d, d);
  return ArmSet(x);
}

inline std::vector<Pull> random_pulls(Rng& rng, int k, int n) {
  std::vector<Pull> out;
  for (int i = 0; i < n; ++i) {
    const int a = static_cast<int>(uniform01(rng) * k);
    out.push_back({a, uniform01(rng) < 0.5 ? 1 : 0});
  }
  return out;
}

/// Pulls drawn from theta: arm a at position i is round-robin, reward
/// Bernoulli(mu(x'theta)).
inline std::vector<Pull> model_pulls(Rng& rng, const ArmSet& a, const Vec& theta, int n) {
  std::vector<Pull> out;
  for (int i = 0; i < n; ++i) {
    const int arm = i % a.size();
    out.push_back({arm, uniform01(rng) < mu(a.logit_of(arm, theta)) ? 1 : 0});
  }
  return out;
}

inline double rel_err(double a, double b) {
  return std::abs(a - b) / std::max(std::abs(b), 1e-300);
}

}  // namespace logts::test
