#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "logts/design.hpp"
#include "logts/envsim.hpp"
#include "logts/error.hpp"
#include "logts/linalg.hpp"
#include "logts/model.hpp"
#include "logts/problems.hpp"

namespace logts {

enum class Family { hard_bai, hard_tbp, sphere_bai, sphere_tbp };

inline const char* to_string(Family f) {
  switch (f) {
    case Family::hard_bai: return "hard_bai";
    case Family::hard_tbp: return "hard_tbp";
    case Family::sphere_bai: return "sphere_bai";
    case Family::sphere_tbp: return "sphere_tbp";
  }
  return "?";
}

inline Family parse_family(const std::string& s) {
  if (s == "hard_bai") return Family::hard_bai;
  if (s == "hard_tbp") return Family::hard_tbp;
  if (s == "sphere_bai") return Family::sphere_bai;
  if (s == "sphere_tbp") return Family::sphere_tbp;
  fail(ErrorKind::config, "unknown family '" + s + "'");
}

struct GeneratorConfig {
  Family family = Family::hard_bai;
  int d = 2;
  double alpha = 0.3;  // hard families
  double p = 0.5;      // hard TBP
  int K = 100;         // sphere families
  std::uint64_t seed = 0;
  double rho = 0.5;  // sphere TBP
  /// Accepted range of 1/T*(theta_star) for the sphere families.
  double band_lo = 5e-4;
  double band_hi = 1e-2;
  double norm_theta = 1.0;
  int max_redraws = 1000;
  FwConfig fw;

  static GeneratorConfig hard_bai(int d, double alpha) {
    GeneratorConfig c;
    c.family = Family::hard_bai;
    c.d = d;
    c.alpha = alpha;
    return c;
  }
  static GeneratorConfig hard_tbp(int d, double alpha, double p) {
    GeneratorConfig c = hard_bai(d, alpha);
    c.family = Family::hard_tbp;
    c.p = p;
    return c;
  }
  static GeneratorConfig sphere_bai(int k, std::uint64_t seed, double lo = 5e-4, double hi = 1e-2) {
    GeneratorConfig c;
    c.family = Family::sphere_bai;
    c.K = k;
    c.seed = seed;
    c.band_lo = lo;
    c.band_hi = hi;
    return c;
  }
  static GeneratorConfig sphere_tbp(int k, std::uint64_t seed, double rho = 0.5, double lo = 5e-4,
                                    double hi = 1e-2) {
    GeneratorConfig c = sphere_bai(k, seed, lo, hi);
    c.family = Family::sphere_tbp;
    c.rho = rho;
    return c;
  }

  bool is_sphere() const { return family == Family::sphere_bai || family == Family::sphere_tbp; }

  void validate() const {
    require(d >= 1 && d <= kMaxDim, ErrorKind::config, "d must lie in [1, 20]");
    require(norm_theta > 0.0, ErrorKind::config, "norm_theta must be positive");
    if (is_sphere()) {
      require(d >= 2, ErrorKind::config, "sphere families need d >= 2");
      require(K >= 2, ErrorKind::config, "sphere families need K >= 2");
      require(band_lo > 0.0 && band_lo < band_hi, ErrorKind::config,
              "complexity band must satisfy 0 < lo < hi");
      require(max_redraws >= 1, ErrorKind::config, "max_redraws must be >= 1");
      if (family == Family::sphere_tbp) {
        require(rho > 0.0 && rho < 1.0, ErrorKind::config, "rho must lie in (0, 1)");
      }
    } else {
      require(d >= 2, ErrorKind::config, "hard families need d >= 2");
      require(alpha > 0.0 && alpha < std::numbers::pi / 4, ErrorKind::config,
              "alpha must lie in (0, pi/4)");
      if (family == Family::hard_tbp) {
        require(p > 0.0 && p < 1.0, ErrorKind::config, "p must lie in (0, 1)");
      }
    }
  }
};

namespace detail {

inline Vec unit(int d, int i) {
  Vec e = zero_vector(d);
  e(i) = 1.0;
  return e;
}

inline Vec planar(int d, double scale, double angle) {
  Vec v = zero_vector(d);
  v(0) = scale * std::cos(angle);
  v(1) = scale * std::sin(angle);
  return v;
}

inline ArmSet::Storage stack(const std::vector<Vec>& rows) {
  ArmSet::Storage x(static_cast<Eigen::Index>(rows.size()), rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i) x.row(static_cast<Eigen::Index>(i)) = rows[i];
  return x;
}

// Standard normal by Box-Muller on our own uniforms, so draws do not depend
// on the standard library's distribution implementation.
inline double gaussian(Rng& rng) {
  const double u1 = 1.0 - uniform01(rng);  // (0, 1]
  const double u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

inline Vec random_unit(int d, Rng& rng) {
  Vec v(d);
  if (d == 2) {
    const double a = 2.0 * std::numbers::pi * uniform01(rng);
    v << std::cos(a), std::sin(a);
    return v;
  }
  double n = 0.0;
  do {
    for (int i = 0; i < d; ++i) v(i) = gaussian(rng);
    n = v.norm();
  } while (n < 1e-12);
  return v / n;
}

inline std::string fmt(double x) {
  std::ostringstream os;
  os << x;
  return os.str();
}

inline Instance hard_bai(const GeneratorConfig& c) {
  std::vector<Vec> rows;
  for (int i = 0; i < c.d; ++i) rows.push_back(unit(c.d, i));
  rows.push_back(planar(c.d, 1.0, c.alpha));
  return {ArmSet(stack(rows)), Vec(c.norm_theta * unit(c.d, 0)), c.norm_theta, ProblemSpec::bai(),
          "hard_bai(d=" + std::to_string(c.d) + ",alpha=" + fmt(c.alpha) + ")"};
}

inline Instance hard_tbp(const GeneratorConfig& c) {
  std::vector<Vec> rows;
  for (int i = 0; i < c.d; ++i) rows.push_back(unit(c.d, i));
  const Vec x1 = planar(c.d, c.p, c.alpha);
  const Vec x2 = planar(c.d, 1.0 - c.p, -c.alpha);
  rows.push_back(x1);
  rows.push_back(x2);
  const Vec theta = c.norm_theta * unit(c.d, 0);
  const double rho = 0.5 * (mu(x1.dot(theta)) + mu(x2.dot(theta)));
  return {ArmSet(stack(rows)), theta, c.norm_theta, ProblemSpec::tbp(rho),
          "hard_tbp(d=" + std::to_string(c.d) + ",alpha=" + fmt(c.alpha) + ",p=" + fmt(c.p) + ")"};
}

inline Instance sphere(const GeneratorConfig& c) {
  Rng rng(c.seed);
  const ProblemSpec spec =
      c.family == Family::sphere_bai ? ProblemSpec::bai() : ProblemSpec::tbp(c.rho);
  double seen_lo = std::numeric_limits<double>::infinity();
  double seen_hi = 0.0;
  for (int draw = 0; draw < c.max_redraws; ++draw) {
    std::vector<Vec> rows;
    rows.reserve(static_cast<std::size_t>(c.K));
    for (int i = 0; i < c.K; ++i) rows.push_back(random_unit(c.d, rng));
    const Vec theta = c.norm_theta * random_unit(c.d, rng);
    const ArmSet arms(stack(rows));
    double value = 0.0;
    try {
      (void)answer(spec, arms, theta);
      value = optimal_allocation(spec, arms, theta, c.fw).value;
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::degenerate && e.kind() != ErrorKind::structural) throw;
      continue;
    }
    seen_lo = std::min(seen_lo, value);
    seen_hi = std::max(seen_hi, value);
    if (value >= c.band_lo && value <= c.band_hi) {
      return {arms, theta, c.norm_theta, spec,
              std::string(to_string(c.family)) + "(K=" + std::to_string(c.K) +
                  ",seed=" + std::to_string(c.seed) + ")"};
    }
  }
  fail(ErrorKind::config, "no draw with 1/T* in [" + fmt(c.band_lo) + ", " + fmt(c.band_hi) +
                              "] after " + std::to_string(c.max_redraws) +
                              " redraws; achieved range [" + fmt(seen_lo) + ", " + fmt(seen_hi) +
                              "]");
}

}  // namespace detail

/// Builds an instance of one of the benchmark families. Sphere families are
/// redrawn until 1/T*(theta_star) falls inside the configured band.
inline Instance generate(const GeneratorConfig& cfg) {
  cfg.validate();
  switch (cfg.family) {
    case Family::hard_bai: return detail::hard_bai(cfg);
    case Family::hard_tbp: return detail::hard_tbp(cfg);
    case Family::sphere_bai:
    case Family::sphere_tbp: return detail::sphere(cfg);
  }
  fail(ErrorKind::config, "unknown family");
}

}  // namespace logts
