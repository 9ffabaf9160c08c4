#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <stdexcept>
#include <istream>
#include <mutex>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "logts/design.hpp"
#include "logts/envsim.hpp"
#include "logts/error.hpp"
#include "logts/sampler.hpp"

namespace logts {

struct ExperimentConfig {
  std::vector<Algorithm> algos{Algorithm::logts, Algorithm::random};
  double delta = 0.1;
  int trials = 10;
  std::uint64_t master_seed = 0;
  std::int64_t budget = 1'000'000;
  /// 0 selects the default lambda(t) = d log t.
  double lambda_c = 0.0;
  BCheckMode b_check_mode = BCheckMode::empirical_hessian;
  /// 0 keeps the instance's radius.
  double S = 0.0;
  FwConfig fw;
  double kappa0_factor = 1.0;
  int parallel = 1;

  void validate() const {
    require(trials >= 1, ErrorKind::config, "trials must be >= 1");
    require(delta > 0.0 && delta < 1.0, ErrorKind::config, "delta must lie in (0, 1)");
    require(budget >= 1, ErrorKind::config, "budget must be >= 1");
    require(lambda_c >= 0.0, ErrorKind::config, "lambda-c must be nonnegative");
    require(S >= 0.0, ErrorKind::config, "S must be nonnegative");
    require(parallel >= 1, ErrorKind::config, "parallel must be >= 1");
    require(kappa0_factor > 0.0, ErrorKind::config, "kappa0 factor must be positive");
    require(!algos.empty(), ErrorKind::config, "no algorithm selected");
    fw.validate();
  }

  RunConfig run_config(const Instance& inst) const {
    RunConfig rc = RunConfig::defaults_for(inst, delta);
    if (S > 0.0) {
      rc.thresholds.S = S;
      rc.solver = SolverConfig::for_radius(S);
    }
    if (lambda_c > 0.0) rc.thresholds.lambda_c = lambda_c;
    rc.thresholds.b_check_mode = b_check_mode;
    rc.fw = fw;
    rc.fw.cancel = nullptr;
    rc.budget = budget;
    rc.kappa0_factor = kappa0_factor;
    return rc;
  }
};

/// One CSV row.
struct TrialRow {
  int trial = 0;
  std::string algo;
  std::string family;
  int K = 0;
  int d = 0;
  double delta = 0.0;
  std::uint64_t seed = 0;
  std::int64_t tau = 0;
  bool correct = false;
  bool stopped_by_budget = false;
  double t_star_inv = 0.0;
  double lower_bound_samples = 0.0;
};

inline constexpr const char* kCsvHeader =
    "trial,algo,family,K,d,delta,seed,tau,correct,stopped_by_budget,t_star_inv,"
    "lower_bound_samples";

inline std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline void write_csv(std::ostream& out, const std::vector<TrialRow>& rows) {
  out << kCsvHeader << '\n';
  for (const auto& r : rows) {
    out << r.trial << ',' << r.algo << ',' << r.family << ',' << r.K << ',' << r.d << ','
        << format_double(r.delta) << ',' << r.seed << ',' << r.tau << ',' << (r.correct ? 1 : 0)
        << ',' << (r.stopped_by_budget ? 1 : 0) << ',' << format_double(r.t_star_inv) << ','
        << format_double(r.lower_bound_samples) << '\n';
  }
}

/// Strict reader for write_csv output: exact header, twelve fields per row.
inline std::vector<TrialRow> read_csv(std::istream& in) {
  std::string line;
  require(static_cast<bool>(std::getline(in, line)) && line == kCsvHeader, ErrorKind::config,
          "unexpected CSV header");
  std::vector<TrialRow> rows;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    if (f.size() != 12) {
      fail(ErrorKind::config, "CSV line " + std::to_string(lineno) + ": expected 12 fields");
    }
    try {
      const auto flag = [&](const std::string& s) {
        require(s == "0" || s == "1", ErrorKind::config, "flag must be 0 or 1");
        return s == "1";
      };
      // std::sto* accept trailing garbage; a strict reader must not.
      const auto whole = [&](auto parse, const std::string& s) {
        std::size_t pos = 0;
        const auto v = parse(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
      };
      const auto to_i = [](const std::string& s, std::size_t* p) { return std::stoll(s, p); };
      const auto to_u = [](const std::string& s, std::size_t* p) { return std::stoull(s, p); };
      const auto to_d = [](const std::string& s, std::size_t* p) { return std::stod(s, p); };
      TrialRow r;
      r.trial = static_cast<int>(whole(to_i, f[0]));
      r.algo = f[1];
      r.family = f[2];
      r.K = static_cast<int>(whole(to_i, f[3]));
      r.d = static_cast<int>(whole(to_i, f[4]));
      r.delta = whole(to_d, f[5]);
      r.seed = whole(to_u, f[6]);
      r.tau = whole(to_i, f[7]);
      r.correct = flag(f[8]);
      r.stopped_by_budget = flag(f[9]);
      r.t_star_inv = whole(to_d, f[10]);
      r.lower_bound_samples = whole(to_d, f[11]);
      rows.push_back(std::move(r));
    } catch (const std::logic_error&) {
      fail(ErrorKind::config, "CSV line " + std::to_string(lineno) + ": malformed field");
    }
  }
  return rows;
}

struct AlgoSummary {
  std::string algo;
  int runs = 0;
  double mean_tau_k = 0.0;  // thousands
  double std_tau_k = 0.0;   // thousands, n-1 denominator
  double mean_log_tau = 0.0;
  int errors = 0;
  double error_rate = 0.0;
  int budget_capped = 0;
  /// mean tau >= log(1/(2.4 delta)) T*
  bool lower_bound_respected = true;
};

/// Per-algorithm statistics over rows (in row order).
inline std::vector<AlgoSummary> summarize(const std::vector<TrialRow>& rows) {
  std::vector<AlgoSummary> out;
  for (const auto& r : rows) {
    auto it = std::find_if(out.begin(), out.end(), [&](const auto& s) { return s.algo == r.algo; });
    if (it == out.end()) {
      out.push_back({});
      out.back().algo = r.algo;
    }
  }
  for (auto& s : out) {
    double sum = 0.0, sum_log = 0.0, bound = 0.0;
    std::vector<double> taus;
    for (const auto& r : rows) {
      if (r.algo != s.algo) continue;
      const double tau = static_cast<double>(r.tau);
      taus.push_back(tau);
      sum += tau;
      sum_log += std::log(tau);
      if (!r.correct) ++s.errors;
      if (r.stopped_by_budget) ++s.budget_capped;
      bound = r.lower_bound_samples;
    }
    s.runs = static_cast<int>(taus.size());
    const double mean = sum / s.runs;
    double ss = 0.0;
    for (double t : taus) ss += (t - mean) * (t - mean);
    s.mean_tau_k = mean / 1000.0;
    s.std_tau_k = s.runs > 1 ? std::sqrt(ss / (s.runs - 1)) / 1000.0 : 0.0;
    s.mean_log_tau = sum_log / s.runs;
    s.error_rate = static_cast<double>(s.errors) / s.runs;
    s.lower_bound_respected = mean >= bound;
  }
  return out;
}

struct ExperimentResult {
  std::string label;
  std::string family;
  int K = 0;
  int d = 0;
  double delta = 0.0;
  double t_star_inv = 0.0;
  double lower_bound_samples = 0.0;
  std::vector<TrialRow> rows;  // ordered by (trial, algo)
  std::vector<AlgoSummary> summaries;
  std::int64_t forced_exploration_violations = 0;
  double runtime_seconds = 0.0;
};

inline std::string family_of(const std::string& label) {
  return label.substr(0, label.find('('));
}

/// trials x algorithms independent runs. Run (i, j) uses
/// derive_seed(master_seed, i, j), j being the algorithm's position in
/// Algorithm (logts = 0, random = 1), so results do not depend on the order
/// or parallelism of execution.
inline ExperimentResult run_experiment(const Instance& inst, const ExperimentConfig& cfg) {
  cfg.validate();
  const auto start = std::chrono::steady_clock::now();
  const RunConfig rc = cfg.run_config(inst);
  rc.thresholds.validate();

  ExperimentResult res;
  res.label = inst.label;
  res.family = family_of(inst.label);
  res.K = inst.num_arms();
  res.d = inst.dim();
  res.delta = cfg.delta;
  FwConfig design_fw = cfg.fw;
  design_fw.cancel = nullptr;
  res.t_star_inv = optimal_allocation(inst.spec, inst.arms, inst.theta_star, design_fw).value;
  res.lower_bound_samples = lower_bound_samples(cfg.delta, characteristic_time(res.t_star_inv));

  struct Job {
    int trial;
    Algorithm algo;
  };
  std::vector<Job> jobs;
  for (int i = 0; i < cfg.trials; ++i) {
    for (Algorithm a : cfg.algos) jobs.push_back({i, a});
  }
  std::vector<TrialRow> rows(jobs.size());
  std::vector<std::int64_t> violations(jobs.size(), 0);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;

  const auto worker = [&] {
    for (;;) {
      const std::size_t j = next.fetch_add(1);
      if (j >= jobs.size()) return;
      try {
        const auto& job = jobs[j];
        const std::uint64_t seed = derive_seed(cfg.master_seed, static_cast<std::uint64_t>(job.trial),
                                               static_cast<std::uint64_t>(job.algo));
        Rng rng(seed);
        const RunResult r = run(job.algo, inst, rc, rng);
        rows[j] = {job.trial,  to_string(job.algo), res.family, res.K,
                   res.d,      cfg.delta,          seed,       r.tau,
                   r.correct,  r.stopped_by_budget, res.t_star_inv, res.lower_bound_samples};
        violations[j] = r.forced_exploration_violations;
      } catch (...) {
        const std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next.store(jobs.size());
      }
    }
  };
  const int n_threads = std::min<int>(cfg.parallel, static_cast<int>(jobs.size()));
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < n_threads; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);

  res.rows = std::move(rows);
  for (auto v : violations) res.forced_exploration_violations += v;
  res.summaries = summarize(res.rows);
  res.runtime_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return res;
}

inline nlohmann::json summary_json(const ExperimentResult& r) {
  nlohmann::json algos = nlohmann::json::object();
  for (const auto& s : r.summaries) {
    algos[s.algo] = {{"runs", s.runs},
                     {"mean_tau_thousands", s.mean_tau_k},
                     {"std_tau_thousands", s.std_tau_k},
                     {"mean_log_tau", s.mean_log_tau},
                     {"errors", s.errors},
                     {"error_rate", s.error_rate},
                     {"budget_capped", s.budget_capped},
                     {"lower_bound_respected", s.lower_bound_respected}};
  }
  return {{"label", r.label},
          {"family", r.family},
          {"K", r.K},
          {"d", r.d},
          {"delta", r.delta},
          {"t_star_inv", r.t_star_inv},
          {"lower_bound_samples", r.lower_bound_samples},
          {"forced_exploration_violations", r.forced_exploration_violations},
          {"runtime_seconds", r.runtime_seconds},
          {"algorithms", algos}};
}

}  // namespace logts
