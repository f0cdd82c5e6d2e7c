// stagewise: command-line front end.
//
//   stagewise gen        --example b --n 50 --p 500 --seed 7 --out data/
//   stagewise fit        --csv data/X_y.csv --response y --algo lsboost --eps 0.01 --iters 500
//   stagewise profile    --synthetic a --algo fse --eps 0.01,0.1 --iters 2000
//   stagewise verify     --out report/
//   stagewise rho-sweep  --n 50 --p 50,100,500 --repeats 10
//
// Every subcommand that runs algorithms also takes --config file.json; flags
// given on the command line override the file.

#include "stagewise/error.hpp"
#include "stagewise/harness.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

using namespace stagewise;
namespace fs = std::filesystem;

namespace {

// Raw option values; empty/unset means "keep what the config file says".
struct ExperimentFlags {
  std::string config;
  std::string csv;
  std::string response;
  std::string synthetic;
  bool no_center = false;
  std::optional<std::size_t> n, p, support;
  std::optional<double> snr;
  std::optional<std::uint64_t> seed;
  std::vector<double> rhos;
  std::vector<std::string> algos;
  std::vector<double> eps;
  std::optional<double> delta;
  std::vector<double> delta_fracs;
  std::string grid;
  std::optional<std::size_t> iters;
  std::optional<double> tol;
  std::optional<double> oracle_tol;
  std::string out;
  std::string emit;
  std::optional<std::size_t> threads;
};

void add_experiment_options(CLI::App* cmd, ExperimentFlags& f) {
  cmd->add_option("--config", f.config, "JSON experiment config")->check(CLI::ExistingFile);
  cmd->add_option("--csv", f.csv, "CSV dataset with a header row")->check(CLI::ExistingFile);
  cmd->add_option("--response", f.response, "response column: header name or zero-based index");
  cmd->add_flag("--no-center", f.no_center, "only rescale columns, do not center");
  cmd->add_option("--synthetic", f.synthetic, "generate the data: a (Eg-A) or b (Eg-B)")
      ->check(CLI::IsMember({"a", "b", "A", "B"}));
  cmd->add_option("--n", f.n, "synthetic sample size");
  cmd->add_option("--p", f.p, "synthetic number of covariates");
  cmd->add_option("--snr", f.snr, "synthetic signal-to-noise ratio");
  cmd->add_option("--support", f.support, "synthetic number of leading unit coefficients");
  cmd->add_option("--seed", f.seed, "synthetic seed");
  cmd->add_option("--rho", f.rhos, "synthetic pairwise correlation(s)")->delimiter(',');
  cmd->add_option("--algo", f.algos, "lsboost, fse, fsek, rfs, path-rfs")->delimiter(',');
  cmd->add_option("--eps", f.eps, "learning rate(s)")->delimiter(',');
  cmd->add_option("--delta", f.delta, "R-FS budget (absolute)");
  cmd->add_option("--delta-frac", f.delta_fracs, "R-FS budget(s) as fractions of delta_max")->delimiter(',');
  cmd->add_option("--grid", f.grid, "PATH-R-FS grid: comma list, or geom:LO:HI:COUNT[:HOLD]");
  cmd->add_option("--iters", f.iters, "maximum boosting iterations");
  cmd->add_option("--tol", f.tol, "stop once ||X^T r||_inf <= tol (default 0: run all iterations)");
  cmd->add_option("--oracle-tol", f.oracle_tol, "tolerance for the Lasso and delta_max oracles");
  cmd->add_option("--out", f.out, "output directory");
  cmd->add_option("--emit", f.emit, "comma list of trace,bounds,certificates,profile_pairs (or all)");
  cmd->add_option("--threads", f.threads, "worker threads (0 = all cores)");
}

std::vector<double> parse_grid(const std::string& text) {
  std::vector<double> grid;
  if (text.rfind("geom:", 0) == 0) {
    std::stringstream ss(text.substr(5));
    std::string part;
    std::vector<std::string> parts;
    while (std::getline(ss, part, ':')) parts.push_back(part);
    if (parts.size() < 3 || parts.size() > 4) {
      throw Error(ErrorCode::InvalidArgument, "--grid geom form is geom:LO:HI:COUNT[:HOLD]");
    }
    const double lo = std::stod(parts[0]);
    const double hi = std::stod(parts[1]);
    const auto count = static_cast<std::size_t>(std::stoul(parts[2]));
    const std::size_t hold = parts.size() == 4 ? std::stoul(parts[3]) : 1;
    if (count == 0 || hold == 0 || !(lo > 0.0) || !(hi >= lo)) {
      throw Error(ErrorCode::InvalidArgument, "--grid needs 0 < LO <= HI and COUNT, HOLD >= 1");
    }
    for (std::size_t i = 0; i < count; ++i) {
      const double t = count == 1 ? 1.0 : static_cast<double>(i) / static_cast<double>(count - 1);
      grid.insert(grid.end(), hold, lo * std::pow(hi / lo, t));
    }
    return grid;
  }
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) grid.push_back(std::stod(item));
  return grid;
}

ExperimentConfig resolve(const ExperimentFlags& f) {
  ExperimentConfig c;
  if (!f.config.empty()) c = load_config(f.config);

  if (!f.csv.empty()) {
    c.data.synthetic.reset();
    c.data.csv = f.csv;
  }
  if (!f.synthetic.empty()) {
    c.data.csv.clear();
    SyntheticSpec s = c.data.synthetic.value_or(SyntheticSpec{});
    s.beta_pop_support = (f.synthetic == "b" || f.synthetic == "B") ? 10 : 5;
    c.data.synthetic = s;
  }
  if (c.data.synthetic) {
    SyntheticSpec& s = *c.data.synthetic;
    if (f.n) s.n = *f.n;
    if (f.p) s.p = *f.p;
    if (f.snr) s.snr = *f.snr;
    if (f.support) s.beta_pop_support = *f.support;
    if (f.seed) s.seed = *f.seed;
    if (f.rhos.size() == 1) s.rho = f.rhos.front();
  }
  if (f.rhos.size() > 1) c.rhos = f.rhos;
  if (!f.response.empty()) {
    const bool numeric = f.response.find_first_not_of("0123456789") == std::string::npos;
    if (numeric) c.data.response = static_cast<std::size_t>(std::stoul(f.response));
    else c.data.response = f.response;
  }
  if (f.no_center) c.data.center = false;

  if (!f.algos.empty()) {
    c.algorithms.clear();
    for (const std::string& name : f.algos) {
      AlgorithmConfig a;
      a.variant = parse_variant(name);
      c.algorithms.push_back(a);
    }
  }
  if (c.algorithms.empty()) c.algorithms.push_back(AlgorithmConfig{});
  if (f.eps.size() == 1) {
    for (AlgorithmConfig& a : c.algorithms) a.epsilon = f.eps.front();
  } else if (f.eps.size() > 1) {
    c.epsilons = f.eps;
  }
  const std::vector<double> grid = f.grid.empty() ? std::vector<double>{} : parse_grid(f.grid);
  for (AlgorithmConfig& a : c.algorithms) {
    if (f.delta) a.delta = *f.delta;
    if (!grid.empty()) a.delta_grid = grid;
    if (f.iters) a.max_iters = *f.iters;
    if (f.tol) a.stop_tolerance = *f.tol;
  }
  if (!f.delta_fracs.empty()) c.delta_fracs = f.delta_fracs;
  if (f.oracle_tol) c.oracle_tol = *f.oracle_tol;
  if (!f.out.empty()) c.out_dir = f.out;
  if (!f.emit.empty()) c.emit = parse_emit(f.emit);
  if (f.threads) c.threads = *f.threads;
  if (!c.data.synthetic && c.data.csv.empty()) {
    throw Error(ErrorCode::InvalidArgument, "no dataset: pass --csv FILE, --synthetic a|b, or a --config");
  }
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Boosting for linear regression: stagewise engines, guarantees and oracles"};
  app.require_subcommand(1);

  // gen
  auto* gen = app.add_subcommand("gen", "write a synthetic dataset (X.csv, y.csv, meta.json)");
  std::string gen_example = "a";
  SyntheticSpec gen_spec;
  std::optional<std::size_t> gen_support;
  std::string gen_out = "data";
  gen->add_option("--example", gen_example, "a (5 leading ones) or b (10 leading ones, SNR 1)")
      ->check(CLI::IsMember({"a", "b", "A", "B"}));
  gen->add_option("--n", gen_spec.n, "sample size");
  gen->add_option("--p", gen_spec.p, "number of covariates");
  gen->add_option("--rho", gen_spec.rho, "pairwise correlation in [0, 1)");
  gen->add_option("--snr", gen_spec.snr, "signal-to-noise ratio (Eg-A only)");
  gen->add_option("--support", gen_support, "override the number of leading unit coefficients");
  gen->add_option("--seed", gen_spec.seed, "random seed");
  gen->add_option("--out", gen_out, "output directory");

  ExperimentFlags fit_flags, profile_flags;
  auto* fit = app.add_subcommand("fit", "run boosting engines and write traces, bounds, certificates");
  add_experiment_options(fit, fit_flags);
  auto* profile = app.add_subcommand("profile", "write observed and theoretical (train error, l1) pairs");
  add_experiment_options(profile, profile_flags);

  // verify
  auto* verify = app.add_subcommand("verify", "run the invariant suite and write report.json");
  VerifyOptions vopt;
  bool self_test = false;
  std::string verify_out = ".";
  verify->add_option("--seed", vopt.seed, "instance seed");
  verify->add_option("--instances", vopt.instances, "number of seeded instances");
  verify->add_option("--iters", vopt.iterations, "iterations per engine run");
  verify->add_option("--tol", vopt.oracle_tol, "Lasso oracle tolerance");
  verify->add_option("--gamma-shift", vopt.gamma_shift, "perturb gamma in the LS-Boost checks");
  verify->add_flag("--self-test", self_test,
                   "negative control: shrink gamma by 0.1 and succeed only if the LS-Boost checks fail");
  verify->add_option("--out", verify_out, "output directory");
  verify->add_option("--threads", vopt.threads, "worker threads (0 = all cores)");

  // rho-sweep
  auto* sweep = app.add_subcommand("rho-sweep", "lambda_pmin and gamma(eps=1) over a (rho, p) grid");
  RhoSweepConfig scfg;
  std::string sweep_out = ".";
  sweep->add_option("--n", scfg.n, "sample size");
  sweep->add_option("--p", scfg.ps, "covariate counts")->delimiter(',');
  sweep->add_option("--rho", scfg.rhos, "correlations")->delimiter(',');
  sweep->add_option("--repeats", scfg.repeats, "instances averaged per cell");
  sweep->add_option("--seed", scfg.seed, "base seed");
  sweep->add_option("--out", sweep_out, "output directory");
  sweep->add_option("--threads", scfg.threads, "worker threads (0 = all cores)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) {
      SyntheticSpec spec = gen_spec;
      if (gen_example == "b" || gen_example == "B") {
        spec = example_b(spec.n, spec.p, spec.rho, spec.seed);
      } else {
        spec = example_a(spec.n, spec.p, spec.rho, spec.snr, spec.seed);
      }
      if (gen_support) spec.beta_pop_support = *gen_support;
      const nlohmann::json meta = cmd_gen(spec, gen_out);
      std::cout << "wrote " << (fs::path(gen_out) / "X.csv").string() << ", y.csv, meta.json (sigma2 = "
                << meta["sigma2"].get<double>() << ")\n";
      return 0;
    }
    if (*fit) {
      const FitResult result = cmd_fit(resolve(fit_flags));
      for (const FitOutput& o : result.outputs) {
        std::cout << o.cell.label << ": " << o.iterations << " iterations, train_error=" << o.final_train_error
                  << ", l1_norm=" << o.final_l1_norm << '\n';
      }
      for (std::size_t i = 0; i < result.delta_max.size(); ++i) {
        std::cout << "delta_max[" << i << "] = " << result.delta_max[i] << '\n';
      }
      return 0;
    }
    if (*profile) {
      const fs::path path = cmd_profile(resolve(profile_flags));
      std::cout << "wrote " << path.string() << '\n';
      return 0;
    }
    if (*verify) {
      if (self_test) vopt.gamma_shift = -0.1;
      const VerifyReport report = cmd_verify(vopt);
      fs::create_directories(verify_out);
      const fs::path path = fs::path(verify_out) / "report.json";
      std::ofstream(path) << report.to_json().dump(2) << '\n';
      for (const FamilyResult& f : report.families) {
        std::cout << (f.passed ? "PASS " : "FAIL ") << f.name << "  checks=" << f.checks
                  << "  max_violation=" << f.max_violation << '\n';
      }
      std::cout << "report: " << path.string() << '\n';
      if (self_test) {
        const bool caught = std::any_of(report.families.begin(), report.families.end(), [](const FamilyResult& f) {
          return !f.passed && (f.name == "lsboost_contraction" || f.name == "lsboost_bounds_check");
        });
        std::cout << (caught ? "self-test: corrupted gamma detected\n" : "self-test: corruption NOT detected\n");
        return caught ? 0 : 1;
      }
      return report.passed() ? 0 : 1;
    }
    if (*sweep) {
      const RhoSweepResult result = cmd_rho_sweep(scfg, sweep_out);
      for (const std::string& w : result.warnings) std::cerr << "warning: " << w << '\n';
      std::cout << "wrote " << (fs::path(sweep_out) / "gamma_vs_p.csv").string() << " (" << result.rows.size()
                << " rows)\n";
      return 0;
    }
  } catch (const Error& e) {
    std::cerr << "error [" << to_string(e.code()) << "]: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
