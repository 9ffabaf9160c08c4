// Acceptance run: prints one PASS/FAIL line per criterion. Progress and
// per-experiment summaries go to stderr.
//
//   acceptance [--quick]
//
// --quick divides every trial count by ten (smoke testing only).

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "logts/logts.hpp"
#include "logts/verify.hpp"

using namespace logts;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
  // failure that follows from the criterion's own definition (see below)
  bool infeasible = false;
};

int g_trial_div = 1;
std::vector<ExperimentResult> g_experiments;

ExperimentConfig config(int trials, std::uint64_t seed) {
  ExperimentConfig c;
  c.trials = std::max(1, trials / g_trial_div);
  c.master_seed = seed;
  c.delta = 0.1;
  // no run should end on the budget; the random baseline reaches ~1e7 on the sphere instances
  c.budget = 50'000'000;
  c.fw.lazy_stride = 1000;
  return c;
}

const AlgoSummary& summary_of(const ExperimentResult& r, const std::string& algo) {
  for (const auto& s : r.summaries) {
    if (s.algo == algo) return s;
  }
  throw std::runtime_error("no summary for " + algo);
}

std::string fmt(double x, int prec = 3) {
  std::ostringstream os;
  os << std::setprecision(prec) << x;
  return os.str();
}

ExperimentResult experiment(const Instance& inst, const ExperimentConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  std::cerr << "  running " << inst.label << " x" << cfg.trials << " ..." << std::flush;
  ExperimentResult r = run_experiment(inst, cfg);
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::cerr << " " << fmt(secs, 4) << "s\n";
  for (const auto& s : r.summaries) {
    std::cerr << "    " << std::setw(6) << s.algo << "  tau(k)=" << fmt(s.mean_tau_k, 5) << " ("
              << fmt(s.std_tau_k, 4) << ")  log tau=" << fmt(s.mean_log_tau, 5)
              << "  errors=" << s.errors << "/" << s.runs << "  capped=" << s.budget_capped << '\n';
  }
  std::cerr << "    1/T*=" << fmt(r.t_star_inv, 4) << "  lower bound=" << fmt(r.lower_bound_samples, 5)
            << '\n';
  g_experiments.push_back(r);
  return r;
}

Verdict suite(const std::string& name) {
  for (const auto& s : verify::all_suites()) {
    if (s.name != name) continue;
    const auto r = s.run(verify::Options{});
    Verdict v;
    v.pass = r.passed;
    v.detail = name + ": " + std::to_string(r.cases) + " cases, worst " + fmt(r.worst);
    for (const auto& f : r.failures) v.detail += "; " + f;
    return v;
  }
  return {false, "missing suite " + name};
}

// δ-correctness: at most 29 errors in 200 trials per algorithm.
Verdict criterion1() {
  Verdict v;
  // 29 of 200; scaled up for the reduced trial counts of --quick
  const auto limit_for = [](int runs) { return (29 * runs + 199) / 200; };
  const auto bai = experiment(generate(GeneratorConfig::hard_bai(2, 0.3)), config(200, 101));
  bool bai_ok = true;
  std::string d = "HardBAI errors";
  for (const auto& s : bai.summaries) {
    d += " " + s.algo + "=" + std::to_string(s.errors) + "/" + std::to_string(s.runs);
    bai_ok = bai_ok && s.errors <= limit_for(s.runs) && s.budget_capped == 0;
  }

  // The TBP variant at p = 1/2 places both boundary arms exactly on the
  // threshold (equal logits), so no correct answer exists.
  bool tbp_ok = false;
  try {
    const auto tbp = experiment(generate(GeneratorConfig::hard_tbp(2, 0.3, 0.5)), config(200, 102));
    tbp_ok = std::all_of(tbp.summaries.begin(), tbp.summaries.end(),
                         [&](const AlgoSummary& s) { return s.errors <= limit_for(s.runs); });
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::degenerate) throw;
    d += "; HardTBP(p=0.5) not runnable: " + std::string(e.what());
    v.infeasible = bai_ok;
  }
  // nearest well-posed variant, for information
  const auto info = experiment(generate(GeneratorConfig::hard_tbp(2, 0.3, 0.25)), config(200, 103));
  d += "; HardTBP(p=0.25) errors";
  for (const auto& s : info.summaries) {
    d += " " + s.algo + "=" + std::to_string(s.errors) + "/" + std::to_string(s.runs);
  }
  v.pass = bai_ok && tbp_ok;
  v.detail = d;
  return v;
}

// MLE consistency under round-robin sampling.
Verdict criterion5() {
  const Instance inst(ArmSet(std::vector<std::vector<double>>{
                          {1.0, 0.0, 0.0}, {0.0, 1.0, 0.0}, {0.0, 0.0, 1.0}, {0.6, 0.8, 0.0}}),
                      (Vec(3) << 0.7, -0.5, 0.3).finished(), 1.0, ProblemSpec::bai(), "rr");
  int good = 0;
  double worst = 0.0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Rng rng(derive_seed(55, seed, 0));
    RunState s(inst.arms);
    for (int t = 0; t < 100000; ++t) {
      const int arm = t % inst.num_arms();
      s.add(arm, pull(inst, arm, rng));
    }
    const auto est = fit_mle(s, Vec::Zero(3), SolverConfig::for_radius(inst.S));
    const double err = (est.mle - inst.theta_star).norm();
    worst = std::max(worst, err);
    good += est.converged && err <= 0.05;
  }
  return {good >= 9, std::to_string(good) + "/10 seeds within 0.05, worst error " + fmt(worst)};
}

// Log-TS against random on a sphere instance: ratio of mean tau.
Verdict ratio_check(const GeneratorConfig& g, int trials, std::uint64_t seed, double need,
                    std::string& detail) {
  const auto r = experiment(generate(g), config(trials, seed));
  const auto& a = summary_of(r, "logts");
  const auto& b = summary_of(r, "random");
  const double ratio = b.mean_tau_k / a.mean_tau_k;
  const bool ok = ratio >= need && a.budget_capped == 0 && b.budget_capped == 0;
  detail += (detail.empty() ? "" : "; ") + r.label + " tau(k) " + fmt(a.mean_tau_k, 4) + " vs " +
            fmt(b.mean_tau_k, 4) + ", ratio " + fmt(ratio);
  return {ok, ""};
}

Verdict criterion6() {
  std::string d;
  const Verdict v = ratio_check(GeneratorConfig::sphere_bai(100, 1), 10, 106, 1.5, d);
  return {v.pass, d};
}

Verdict criterion7() {
  std::string d;
  bool ok = true;
  for (int k : {20, 30}) {
    ok = ratio_check(GeneratorConfig::sphere_tbp(k, static_cast<std::uint64_t>(k)), 10,
                     107 + static_cast<std::uint64_t>(k), 2.0, d)
             .pass &&
         ok;
  }
  return {ok, d};
}

// Sweeps over d: mean log tau nondecreasing in d, Log-TS below random.
Verdict criterion8() {
  std::string d;
  bool ok = true;
  const std::vector<std::pair<std::string, std::function<GeneratorConfig(int)>>> sweeps{
      {"HardBAI(alpha=0.6)", [](int dim) { return GeneratorConfig::hard_bai(dim, 0.6); }},
      {"HardTBP(alpha=0.6,p=0.25)",
       [](int dim) { return GeneratorConfig::hard_tbp(dim, 0.6, 0.25); }}};
  for (const auto& [name, make] : sweeps) {
    std::map<std::string, std::vector<double>> curve;
    for (int dim = 2; dim <= 6; ++dim) {
      const auto r = experiment(generate(make(dim)), config(4, 200 + static_cast<std::uint64_t>(dim)));
      for (const auto& s : r.summaries) curve[s.algo].push_back(s.mean_log_tau);
    }
    bool mono = true, below = true;
    for (const auto& [algo, c] : curve) {
      for (std::size_t i = 1; i < c.size(); ++i) mono = mono && c[i] >= c[i - 1];
    }
    for (std::size_t i = 0; i < curve["logts"].size(); ++i) {
      below = below && curve["logts"][i] < curve["random"][i];
    }
    ok = ok && mono && below;
    d += (d.empty() ? "" : "; ") + name + " log tau logts";
    for (double x : curve["logts"]) d += " " + fmt(x, 4);
    d += " random";
    for (double x : curve["random"]) d += " " + fmt(x, 4);
    if (!mono) d += " (not monotone)";
    if (!below) d += " (Log-TS not below)";
  }
  return {ok, d};
}

Verdict criterion9() {
  const auto k = verify::kl_decay(2024);
  Verdict v;
  v.pass = std::abs(k.slope - 3.0) <= 0.3;
  v.detail = "log-log slope " + fmt(k.slope, 4) + ", max errors";
  for (double e : k.max_error) v.detail += " " + fmt(e);
  return v;
}

// Forced-exploration bound on every logged run, plus the dedicated suite.
Verdict criterion4() {
  Verdict v = suite("forced_exploration");
  std::int64_t bad = 0;
  for (const auto& r : g_experiments) bad += r.forced_exploration_violations;
  v.pass = v.pass && bad == 0;
  v.detail += "; " + std::to_string(g_experiments.size()) + " experiments, " +
              std::to_string(bad) + " violations";
  return v;
}

Verdict criterion10() {
  int bad = 0;
  double tightest = std::numeric_limits<double>::infinity();
  for (const auto& r : g_experiments) {
    const auto& s = summary_of(r, "logts");
    if (!s.lower_bound_respected) ++bad;
    tightest = std::min(tightest, s.mean_tau_k * 1000.0 / r.lower_bound_samples);
  }
  return {bad == 0 && !g_experiments.empty(),
          std::to_string(g_experiments.size()) + " experiments, " + std::to_string(bad) +
              " below the bound, smallest mean tau / bound " + fmt(tightest)};
}

}  // namespace

int main(int argc, char** argv) {
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--quick") == 0) {
      g_trial_div = 10;
    } else {
      std::cerr << "usage: acceptance [--quick]\n";
      return 2;
    }
  }

  std::map<int, Verdict> verdicts;
  const std::vector<std::pair<int, std::function<Verdict()>>> order{
      {2, [] { return suite("inner_inf"); }},
      {3, [] { return suite("frank_wolfe"); }},
      {9, criterion9},
      {5, criterion5},
      {6, criterion6},
      {7, criterion7},
      {8, criterion8},
      {1, criterion1},
      {4, criterion4},
      {10, criterion10}};
  for (const auto& [id, fn] : order) {
    std::cerr << "criterion " << id << '\n';
    try {
      verdicts[id] = fn();
    } catch (const std::exception& e) {
      verdicts[id] = {false, std::string("error: ") + e.what()};
    }
    std::cerr << "  -> " << (verdicts[id].pass ? "PASS" : "FAIL") << '\n';
  }

  int unexpected = 0;
  for (const auto& [id, v] : verdicts) {
    std::cout << (v.pass ? "PASS" : "FAIL") << " " << id << "  " << v.detail;
    if (!v.pass && v.infeasible) std::cout << "  [known infeasible]";
    std::cout << '\n';
    if (!v.pass && !v.infeasible) ++unexpected;
  }
  if (g_trial_div != 1) std::cout << "(quick mode: trial counts divided by " << g_trial_div << ")\n";
  return unexpected == 0 ? 0 : 1;
}
