#pragma once

#include <cstdint>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "logts/design.hpp"
#include "logts/envsim.hpp"
#include "logts/error.hpp"
#include "logts/experiment.hpp"
#include "logts/instances.hpp"
#include "logts/io.hpp"
#include "logts/plot.hpp"
#include "logts/verify.hpp"

namespace logts::cli {

enum ExitCode { kOk = 0, kFailure = 1, kUsage = 2 };

/// Flag values shared by the subcommands.
struct Options {
  std::string instance;
  std::string config;
  std::string family;
  int K = 100;
  std::vector<int> d{2};
  double alpha = 0.3;
  double p = 0.5;
  std::optional<double> rho;
  std::optional<int> m;
  std::vector<double> band;
  double norm_theta = 1.0;
  std::optional<std::uint64_t> gen_seed;
  double delta = 0.1;
  int trials = 10;
  std::uint64_t seed = 0;
  std::int64_t budget = 1'000'000;
  std::vector<std::string> algo{"logts", "random"};
  double lambda_c = 0.0;
  std::string b_check = "empirical";
  double S = 0.0;
  int fw_iters = 2000;
  int lazy_stride = 1;
  double kappa0_factor = 1.0;
  std::string out;
  bool json = false;
  std::string plot;
  int parallel = 1;
  std::string suite = "all";
  double perturb = 0.0;
  // raw comma lists; a repeated flag replaces the earlier list
  std::string d_list, band_list, algo_list;
};

/// Splits a comma list, converting each item with `conv`.
template <class T, class F>
std::vector<T> split_list(const std::string& text, const std::string& flag, F conv) {
  std::vector<T> out;
  std::istringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(conv(item, &used));
      require(used == item.size(), ErrorKind::config, "");
    } catch (const std::exception&) {
      fail(ErrorKind::config, flag + ": cannot parse '" + item + "'");
    }
  }
  require(!out.empty(), ErrorKind::config, flag + " needs at least one value");
  return out;
}

inline void apply_lists(Options& o) {
  if (!o.d_list.empty()) {
    o.d = split_list<int>(o.d_list, "--d",
                          [](const std::string& s, std::size_t* n) { return std::stoi(s, n); });
  }
  if (!o.band_list.empty()) {
    o.band = split_list<double>(o.band_list, "--band",
                                [](const std::string& s, std::size_t* n) { return std::stod(s, n); });
  }
  if (!o.algo_list.empty()) {
    o.algo = split_list<std::string>(o.algo_list, "--algo", [](const std::string& s, std::size_t* n) {
      *n = s.size();
      return s;
    });
  }
}

inline FwConfig fw_config(const Options& o) {
  FwConfig fw;
  fw.max_iters = o.fw_iters;
  fw.lazy_stride = o.lazy_stride;
  fw.validate();
  return fw;
}

inline GeneratorConfig generator_config(const Options& o, int d) {
  GeneratorConfig g;
  g.family = parse_family(o.family);
  g.d = d;
  g.alpha = o.alpha;
  g.p = o.p;
  g.K = o.K;
  g.seed = o.gen_seed.value_or(o.seed);
  g.norm_theta = o.norm_theta;
  g.fw = fw_config(o);
  g.fw.lazy_stride = 1;
  if (g.family == Family::sphere_tbp) {
    g.rho = o.rho.value_or(0.5);
  }
  if (!o.band.empty()) {
    require(o.band.size() == 2, ErrorKind::config, "--band takes two values: lo,hi");
    g.band_lo = o.band[0];
    g.band_hi = o.band[1];
  }
  return g;
}

/// Instances named by the flags: a file, or one generated instance per --d.
inline std::vector<Instance> load_instances(const Options& o) {
  require(o.instance.empty() != o.family.empty(), ErrorKind::config,
          "give exactly one of --instance or --family");
  std::vector<Instance> out;
  if (!o.instance.empty()) {
    out.push_back(load_instance(o.instance));
  } else {
    for (int d : o.d) {
      try {
        out.push_back(generate(generator_config(o, d)));
      } catch (const Error& e) {
        if (e.kind() == ErrorKind::degenerate) {
          fail(ErrorKind::config, std::string("generated instance is degenerate: ") + e.what());
        }
        throw;
      }
    }
  }
  for (auto& inst : out) {
    if (o.m) {
      inst = Instance(inst.arms, inst.theta_star, inst.S, ProblemSpec::topm(*o.m), inst.label);
    } else if (o.rho && !o.instance.empty()) {
      inst = Instance(inst.arms, inst.theta_star, inst.S, ProblemSpec::tbp(*o.rho), inst.label);
    }
  }
  return out;
}

inline ExperimentConfig experiment_config(const Options& o) {
  ExperimentConfig c;
  c.algos.clear();
  for (const auto& a : o.algo) {
    if (a == "logts") {
      c.algos.push_back(Algorithm::logts);
    } else if (a == "random") {
      c.algos.push_back(Algorithm::random);
    } else if (a == "both") {
      c.algos = {Algorithm::logts, Algorithm::random};
    } else {
      fail(ErrorKind::config, "unknown algorithm '" + a + "' (logts, random)");
    }
  }
  c.delta = o.delta;
  c.trials = o.trials;
  c.master_seed = o.seed;
  c.budget = o.budget;
  c.lambda_c = o.lambda_c;
  c.b_check_mode = o.b_check == "exact" ? BCheckMode::exact_kappa0 : BCheckMode::empirical_hessian;
  c.S = o.S;
  c.fw = fw_config(o);
  c.kappa0_factor = o.kappa0_factor;
  c.parallel = o.parallel;
  c.validate();
  return c;
}

inline int cmd_run(const Options& o, std::ostream& out, std::ostream& err) {
  const ExperimentConfig cfg = experiment_config(o);
  const auto instances = load_instances(o);
  std::vector<ExperimentResult> results;
  for (const auto& inst : instances) results.push_back(run_experiment(inst, cfg));

  std::vector<TrialRow> rows;
  nlohmann::json experiments = nlohmann::json::array();
  for (const auto& r : results) {
    rows.insert(rows.end(), r.rows.begin(), r.rows.end());
    experiments.push_back(summary_json(r));
  }
  nlohmann::json per_d = nlohmann::json::array();
  for (const auto& r : results) {
    nlohmann::json e = {{"d", r.d}};
    for (const auto& s : r.summaries) e[s.algo] = s.mean_log_tau;
    per_d.push_back(e);
  }
  const nlohmann::json summary = {{"experiments", experiments}, {"per_d_mean_log_tau", per_d}};

  std::ostringstream csv;
  write_csv(csv, rows);
  if (o.out.empty()) {
    out << csv.str();
    err << summary.dump(2) << '\n';
  } else {
    write_text_file(o.out + ".csv", csv.str());
    write_text_file(o.out + ".json", summary.dump(2) + "\n");
    if (o.json) {
      out << summary.dump(2) << '\n';
    } else {
      for (const auto& r : results) {
        out << r.label << "  1/T*=" << r.t_star_inv << "  lower bound=" << r.lower_bound_samples
            << '\n';
        for (const auto& s : r.summaries) {
          out << "  " << std::setw(7) << s.algo << "  tau(k)=" << s.mean_tau_k << " ("
              << s.std_tau_k << ")  errors=" << s.errors << "/" << s.runs
              << "  capped=" << s.budget_capped << '\n';
        }
      }
    }
  }
  if (!o.plot.empty()) {
    std::vector<Series> series;
    for (const auto& a : cfg.algos) {
      Series s{to_string(a), {}, {}};
      for (const auto& r : results) {
        for (const auto& sm : r.summaries) {
          if (sm.algo == to_string(a)) {
            s.x.push_back(r.d);
            s.y.push_back(sm.mean_tau_k * 1000.0);
          }
        }
      }
      series.push_back(s);
    }
    write_text_file(o.plot, svg_plot(series, instances.front().label, "d", "mean tau", true));
  }
  return kOk;
}

inline int cmd_design(const Options& o, std::ostream& out) {
  const auto instances = load_instances(o);
  require(o.delta > 0.0 && o.delta < 1.0, ErrorKind::config, "delta must lie in (0, 1)");
  const FwConfig fw = fw_config(o);
  nlohmann::json all = nlohmann::json::array();
  for (const auto& inst : instances) {
    const DesignResult r = optimal_allocation(inst.spec, inst.arms, inst.theta_star, fw);
    const double t_star = characteristic_time(r);
    const double bound = lower_bound_samples(o.delta, t_star);
    std::vector<double> w(r.allocation.weights().data(),
                          r.allocation.weights().data() + r.allocation.size());
    if (o.json) {
      all.push_back({{"label", inst.label},
                     {"t_star_inv", r.value},
                     {"t_star", t_star},
                     {"allocation", w},
                     {"active_arm", r.active_arm},
                     {"iterations", r.iterations},
                     {"gap_estimate", r.gap_estimate},
                     {"delta", o.delta},
                     {"lower_bound_samples", bound}});
      continue;
    }
    out << inst.label << '\n';
    out << "  T*^-1       " << std::setprecision(10) << r.value << '\n';
    out << "  T*          " << t_star << '\n';
    out << "  w*         ";
    out << std::fixed << std::setprecision(6);
    for (double v : w) out << ' ' << v;
    out << std::defaultfloat << '\n';
    out << "  active arm  " << r.active_arm << '\n';
    out << "  log(1/(2.4 delta)) T*  " << std::setprecision(10) << bound << "  (delta=" << o.delta
        << ")\n";
  }
  if (o.json) out << (all.size() == 1 ? all[0] : all).dump(2) << '\n';
  return kOk;
}

inline int cmd_verify(const Options& o, std::ostream& out) {
  verify::Options vo;
  vo.closed_form_perturbation = o.perturb;
  bool ok = true;
  bool any = false;
  for (const auto& s : verify::all_suites()) {
    if (o.suite != "all" && o.suite != s.name) continue;
    any = true;
    const verify::Report r = s.run(vo);
    out << (r.passed ? "PASS " : "FAIL ") << s.name << "  (" << r.cases
        << " cases, worst=" << r.worst << ")\n";
    for (const auto& f : r.failures) out << "    " << f << '\n';
    ok = ok && r.passed;
  }
  require(any, ErrorKind::config, "unknown suite '" + o.suite + "'");
  return ok ? kOk : kFailure;
}

inline int cmd_gen(const Options& o, std::ostream& out) {
  require(o.instance.empty(), ErrorKind::config, "gen takes --family, not --instance");
  const auto instances = load_instances(o);
  nlohmann::json j = instances.size() == 1 ? instance_to_json(instances.front())
                                           : nlohmann::json::array();
  if (instances.size() > 1) {
    for (const auto& inst : instances) j.push_back(instance_to_json(inst));
  }
  if (o.out.empty()) {
    out << j.dump(2) << '\n';
  } else {
    write_text_file(o.out, j.dump(2) + "\n");
  }
  return kOk;
}

/// JSON config file: keys are long flag names without dashes; explicit
/// command-line flags take precedence.
inline std::vector<std::string> config_arguments(const std::string& path) {
  const nlohmann::json j = read_json_file(path);
  require(j.is_object(), ErrorKind::config, "config file must hold a JSON object");
  std::vector<std::string> args;
  for (const auto& [key, value] : j.items()) {
    std::string v;
    if (value.is_array()) {
      for (const auto& e : value) {
        if (!v.empty()) v += ",";
        v += e.is_string() ? e.get<std::string>() : e.dump();
      }
    } else if (value.is_string()) {
      v = value.get<std::string>();
    } else {
      v = value.dump();
    }
    if (value.is_boolean()) {
      if (value.get<bool>()) args.push_back("--" + key);
    } else {
      args.push_back("--" + key + "=" + v);
    }
  }
  return args;
}

inline int main(int argc, const char* const* argv, std::ostream& out = std::cout,
                std::ostream& err = std::cerr) {
  Options o;
  CLI::App app{"Log track-and-stop for logistic pure-exploration bandits"};
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

  const auto instance_flags = [&](CLI::App* c) {
    c->add_option("--instance", o.instance, "instance JSON file");
    c->add_option("--family", o.family, "hard_bai, hard_tbp, sphere_bai or sphere_tbp");
    c->add_option("--K", o.K, "number of arms (sphere families)");
    c->add_option("--d", o.d_list, "dimension; a list runs a sweep (hard families)");
    c->add_option("--alpha", o.alpha, "angle of the confusing arm (hard families)");
    c->add_option("--p", o.p, "boundary arm scale (hard_tbp)");
    c->add_option("--rho", o.rho, "TBP threshold");
    c->add_option("--m", o.m, "turn the problem into top-m identification");
    c->add_option("--band", o.band_list, "accepted 1/T* range lo,hi (sphere families)");
    c->add_option("--norm-theta", o.norm_theta, "norm of the generated parameter");
    c->add_option("--gen-seed", o.gen_seed, "generator seed (default: --seed)");
    c->add_option("--seed", o.seed, "master seed");
    c->add_option("--delta", o.delta, "confidence level");
    c->add_option("--fw-iters", o.fw_iters, "Frank-Wolfe iteration budget");
    c->add_option("--lazy-stride", o.lazy_stride, "rounds between allocation updates");
    c->add_option("--out", o.out, "output path");
    c->add_flag("--json", o.json, "JSON output");
  };

  auto* run = app.add_subcommand("run", "run trials and summarize");
  instance_flags(run);
  run->add_option("--config", o.config, "JSON config file (keys = flag names)");
  run->add_option("--trials", o.trials, "trials per algorithm");
  run->add_option("--budget", o.budget, "round budget per run");
  run->add_option("--algo", o.algo_list, "logts, random or both (comma list)");
  run->add_option("--lambda-c", o.lambda_c, "lambda(t) = c log t (default c = d)");
  run->add_option("--b-check", o.b_check, "eigenvalue gate: exact or empirical")
      ->check(CLI::IsMember({"exact", "empirical"}));
  run->add_option("--S", o.S, "radius of the parameter ball (default: instance S)");
  run->add_option("--kappa0-factor", o.kappa0_factor, "multiplies the oracle kappa0");
  run->add_option("--plot", o.plot, "SVG plot of mean tau against d");
  run->add_option("--parallel", o.parallel, "concurrent runs");

  auto* design = app.add_subcommand("design", "optimal allocation and T* of an instance");
  instance_flags(design);

  auto* ver = app.add_subcommand("verify", "run the oracle cross-check suites");
  ver->add_option("--suite", o.suite, "suite name or all");
  ver->add_option("--perturb", o.perturb, "test hook: perturb the closed form")->group("");

  auto* gen = app.add_subcommand("gen", "emit a generated instance as JSON");
  instance_flags(gen);

  std::vector<std::string> args;
  for (int i = argc - 1; i >= 1; --i) args.emplace_back(argv[i]);
  try {
    // A config file's settings go right after the subcommand so that explicit
    // flags, parsed later, win.
    for (std::size_t i = 0; i + 1 < args.size(); ++i) {
      const std::string& a = args[args.size() - 1 - i];
      std::string path;
      if (a == "--config") path = args[args.size() - 2 - i];
      if (a.rfind("--config=", 0) == 0) path = a.substr(9);
      if (path.empty()) continue;
      const auto extra = config_arguments(path);
      args.insert(args.end() - 1, extra.rbegin(), extra.rend());
      break;
    }
    app.parse(args);
    apply_lists(o);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kOk : kUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  }

  try {
    if (*run) return cmd_run(o, out, err);
    if (*design) return cmd_design(o, out);
    if (*ver) return cmd_verify(o, out);
    if (*gen) return cmd_gen(o, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return e.kind() == ErrorKind::config || e.kind() == ErrorKind::degenerate ? kUsage : kFailure;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kFailure;
  }
  return kUsage;
}

}  // namespace logts::cli
