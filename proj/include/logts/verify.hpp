#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "logts/design.hpp"
#include "logts/envsim.hpp"
#include "logts/error.hpp"
#include "logts/instances.hpp"
#include "logts/model.hpp"
#include "logts/oracles.hpp"
#include "logts/problems.hpp"
#include "logts/sampler.hpp"

namespace logts::verify {

struct Options {
  std::uint64_t seed = 2024;
  /// Test hook: scales the closed-form psi before comparison. Any nonzero
  /// value beyond the tolerance must make the inner_inf suite fail.
  double closed_form_perturbation = 0.0;
  int grid_resolution = 200;
};

struct Report {
  std::string suite;
  bool passed = true;
  int cases = 0;
  double worst = 0.0;  // largest discrepancy, in the suite's own units
  std::vector<std::string> failures;

  void check(bool ok, const std::string& what) {
    ++cases;
    if (!ok) {
      passed = false;
      failures.push_back(what);
    }
  }
};

/// Random arm set in the unit disk plus a parameter of norm in [0.5, 2],
/// redrawn until the answer for `spec` is unique.
inline std::pair<ArmSet, Vec> random_instance(Rng& rng, int k, int d, const ProblemSpec& spec) {
  for (;;) {
    ArmSet::Storage x(k, d);
    for (int i = 0; i < k; ++i) {
      Vec u = detail::random_unit(d, rng);
      x.row(i) = (0.3 + 0.7 * std::sqrt(uniform01(rng))) * u.transpose();
    }
    Vec theta = (0.5 + 1.5 * uniform01(rng)) * detail::random_unit(d, rng);
    try {
      ArmSet arms(x);
      (void)answer(spec, arms, theta);
      return {arms, theta};
    } catch (const Error&) {
    }
  }
}

inline std::vector<double> random_weights(Rng& rng, int k) {
  std::vector<double> w(static_cast<std::size_t>(k));
  double s = 0.0;
  for (auto& v : w) s += (v = 0.05 + uniform01(rng));
  for (auto& v : w) v /= s;
  return w;
}

inline std::string describe(const std::string& tag, double got, double want) {
  std::ostringstream os;
  os.precision(12);
  os << tag << ": got " << got << ", reference " << want;
  return os.str();
}

/// Closed-form inner infimum against numerical minimization over each face,
/// 20 random d=2 instances with K in {3, 4} per problem kind.
inline Report inner_inf_suite(const Options& opt) {
  Report rep;
  rep.suite = "inner_inf";
  Rng rng(opt.seed);
  const std::vector<ProblemSpec> specs{ProblemSpec::bai(), ProblemSpec::tbp(0.6),
                                       ProblemSpec::topm(2)};
  for (const auto& spec : specs) {
    for (int c = 0; c < 20; ++c) {
      const int k = 3 + c % 2;
      const auto [arms, theta] = random_instance(rng, k, 2, spec);
      const auto w = random_weights(rng, k);
      ArmVector wv(k);
      for (int i = 0; i < k; ++i) wv(i) = w[static_cast<std::size_t>(i)];
      const double fast =
          inner_inf(spec, arms, theta, Allocation(wv)).value * (1.0 + opt.closed_form_perturbation);
      const double ref = oracle::psi_bruteforce(spec, arms, theta, w);
      const double rel = std::abs(fast - ref) / std::max(ref, 1e-300);
      rep.worst = std::max(rep.worst, rel);
      rep.check(rel <= 1e-8, describe(std::string(to_string(spec.kind)) + " K=" +
                                          std::to_string(k) + " case " + std::to_string(c),
                                      fast, ref));
    }
  }
  return rep;
}

/// Frank-Wolfe psi* against the best point of the barycentric grid, d = 2,
/// K in {3, 4, 5}; relative gap at most 2%.
inline Report frank_wolfe_suite(const Options& opt, int cases_per_k = 3) {
  Report rep;
  rep.suite = "frank_wolfe";
  Rng rng(opt.seed + 1);
  const std::vector<ProblemSpec> specs{ProblemSpec::bai(), ProblemSpec::tbp(0.6)};
  for (int k = 3; k <= 5; ++k) {
    for (int c = 0; c < cases_per_k; ++c) {
      const auto& spec = specs[static_cast<std::size_t>(c) % specs.size()];
      const auto [arms, theta] = random_instance(rng, k, 2, spec);
      const double fw = optimal_allocation(spec, arms, theta).value;
      const int res = k == 5 ? std::min(opt.grid_resolution, 100) : opt.grid_resolution;
      const double grid = oracle::grid_max_psi(spec, arms, theta, res);
      const double rel = std::abs(fw - grid) / grid;
      rep.worst = std::max(rep.worst, rel);
      rep.check(rel <= 0.02, describe("K=" + std::to_string(k) + " case " + std::to_string(c) +
                                          " (grid " + std::to_string(res) + ")",
                                      fw, grid));
    }
  }
  return rep;
}

/// max |KL - quadratic| over sampled (x, theta) at logit gaps eps; the
/// returned slope is the least-squares fit of log error against log eps.
struct KlDecay {
  std::vector<double> eps;
  std::vector<double> max_error;
  double slope = 0.0;
};

inline KlDecay kl_decay(std::uint64_t seed, int samples = 200) {
  KlDecay out;
  out.eps = {1e-1, 1e-2, 1e-3};
  Rng rng(seed);
  std::vector<std::pair<Vec, Vec>> pts;
  for (int i = 0; i < samples; ++i) {
    Vec x = detail::random_unit(3, rng);
    Vec theta = (2.0 * uniform01(rng)) * detail::random_unit(3, rng);
    pts.push_back({x, theta});
  }
  for (double e : out.eps) {
    double worst = 0.0;
    for (const auto& [x, theta] : pts) {
      // lambda moves x'theta by exactly e
      const Vec lambda = theta - e * x / x.squaredNorm();
      worst = std::max(worst, std::abs(kl_bernoulli_logit(x, theta, lambda) -
                                       kl_quadratic(x, theta, lambda)));
    }
    out.max_error.push_back(worst);
  }
  double mx = 0, my = 0;
  const double n = static_cast<double>(out.eps.size());
  for (std::size_t i = 0; i < out.eps.size(); ++i) {
    mx += std::log(out.eps[i]) / n;
    my += std::log(out.max_error[i]) / n;
  }
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < out.eps.size(); ++i) {
    const double dx = std::log(out.eps[i]) - mx;
    sxy += dx * (std::log(out.max_error[i]) - my);
    sxx += dx * dx;
  }
  out.slope = sxy / sxx;
  return out;
}

inline Report kl_quadratic_suite(const Options& opt) {
  Report rep;
  rep.suite = "kl_quadratic";
  const KlDecay k = kl_decay(opt.seed + 2);
  rep.worst = std::abs(k.slope - 3.0);
  std::ostringstream os;
  os << "log-log slope " << k.slope << " (expected 3 +- 0.3)";
  rep.check(std::abs(k.slope - 3.0) <= 0.3, os.str());
  return rep;
}

/// Largest shortfall of lambda_min(A_t) below f(t-d-1) over a recorded trace,
/// for t >= forced_exploration_horizon(d). Zero when the bound always holds.
inline std::int64_t forced_exploration_shortfalls(const RunResult& r, const ExplorationBasis& b,
                                                  int d) {
  std::int64_t bad = 0;
  for (const auto& row : r.trace) {
    if (row.t < forced_exploration_horizon(d)) continue;
    if (row.lambda_min_design < b.threshold(row.t - d - 1) * (1.0 - 1e-12)) ++bad;
  }
  return bad;
}

/// Log-TS on hard BAI instances, d = 2..6, checking the eigenvalue bound of
/// the forced-exploration rule on every traced round.
inline Report forced_exploration_suite(const Options& opt, std::int64_t budget = 20000) {
  Report rep;
  rep.suite = "forced_exploration";
  for (int d = 2; d <= 6; ++d) {
    const Instance inst = generate(GeneratorConfig::hard_bai(d, 0.5));
    RunConfig cfg = RunConfig::defaults_for(inst, 0.1);
    cfg.budget = budget;
    cfg.record_trace = true;
    cfg.fw.lazy_stride = 100;
    Rng rng(derive_seed(opt.seed, static_cast<std::uint64_t>(d), 0));
    const RunResult r = run_log_ts(inst, cfg, rng);
    const auto basis = select_exploration_basis(inst.arms);
    const auto bad = forced_exploration_shortfalls(r, basis, d);
    rep.worst = std::max(rep.worst, static_cast<double>(bad));
    rep.check(bad == 0 && r.forced_exploration_violations == 0,
              "d=" + std::to_string(d) + ": " + std::to_string(bad) + " rounds below the bound");
  }
  return rep;
}

/// Greedy exploration basis against exhaustive search over d-subsets: on the
/// hard instances the greedy lambda_min is at least half the best one; on
/// random arm sets it is positive.
inline Report exploration_basis_suite(const Options& opt) {
  Report rep;
  rep.suite = "exploration_basis";
  for (int d = 2; d <= 4; ++d) {
    for (double alpha : {0.1, 0.3, 0.6}) {
      const Instance inst = generate(GeneratorConfig::hard_bai(d, alpha));
      const auto b = select_exploration_basis(inst.arms);
      const double greedy = b.c_x0 * std::sqrt(static_cast<double>(d));
      const double best = oracle::best_basis_lambda_min(inst.arms);
      rep.worst = std::max(rep.worst, 1.0 - greedy / best);
      rep.check(greedy >= 0.5 * best, describe(inst.label, greedy, best));
    }
  }
  Rng rng(opt.seed + 3);
  for (int d = 2; d <= 4; ++d) {
    for (int c = 0; c < 5; ++c) {
      const auto [arms, theta] = random_instance(rng, d + 3, d, ProblemSpec::bai());
      const auto b = select_exploration_basis(arms);
      rep.check(b.c_x0 > 0.0, "random d=" + std::to_string(d) + " case " + std::to_string(c) +
                                  ": singular basis");
    }
  }
  return rep;
}

struct SuiteEntry {
  std::string name;
  std::function<Report(const Options&)> run;
};

inline std::vector<SuiteEntry> all_suites() {
  return {{"inner_inf", [](const Options& o) { return inner_inf_suite(o); }},
          {"frank_wolfe", [](const Options& o) { return frank_wolfe_suite(o); }},
          {"kl_quadratic", [](const Options& o) { return kl_quadratic_suite(o); }},
          {"forced_exploration", [](const Options& o) { return forced_exploration_suite(o); }},
          {"exploration_basis", [](const Options& o) { return exploration_basis_suite(o); }}};
}

}  // namespace logts::verify
