#include "stagewise/harness.hpp"

#include "stagewise/error.hpp"
#include "stagewise/guarantees.hpp"
#include "stagewise/oracles.hpp"
#include "stagewise/spectral.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

namespace stagewise {

using nlohmann::json;
namespace fs = std::filesystem;

void parallel_for(std::size_t count, std::size_t threads, const std::function<void(std::size_t)>& fn) {
  if (count == 0) return;
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, count);
  if (threads == 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next.store(count);
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}

EmitFlags parse_emit(const std::string& list) {
  EmitFlags flags{false, false, false, false};
  std::stringstream ss(list);
  std::string item;
  bool any = false;
  while (std::getline(ss, item, ',')) {
    item.erase(std::remove_if(item.begin(), item.end(), ::isspace), item.end());
    if (item.empty()) continue;
    any = true;
    if (item == "trace") flags.trace = true;
    else if (item == "bounds") flags.bounds = true;
    else if (item == "certificates") flags.certificates = true;
    else if (item == "profile_pairs" || item == "profile") flags.profile_pairs = true;
    else if (item == "all") flags = {true, true, true, true};
    else if (item == "none") flags = {true, false, false, false};
    else throw Error(ErrorCode::InvalidArgument, "unknown emit flag '" + item +
                                                     "' (expected trace, bounds, certificates, profile_pairs)");
  }
  // The trace is the product of every fit; it is always written.
  flags.trace = true;
  if (!any) flags = EmitFlags{};
  return flags;
}

void ExperimentConfig::validate() const {
  if (algorithms.empty()) throw Error(ErrorCode::InvalidArgument, "config needs at least one algorithm");
  if (data.synthetic.has_value() == !data.csv.empty()) {
    throw Error(ErrorCode::InvalidArgument, "config needs exactly one data source (synthetic or csv)");
  }
  if (data.synthetic) data.synthetic->validate();
  for (double e : epsilons) {
    if (!(e > 0.0) || !std::isfinite(e)) throw Error(ErrorCode::EpsilonOutOfRange, "sweep epsilons must be > 0");
  }
  for (double f : delta_fracs) {
    if (!(f > 0.0 && f <= 1.0)) {
      throw Error(ErrorCode::InvalidArgument, "delta fractions must lie in (0, 1], got " + format_double(f));
    }
  }
  if (!rhos.empty() && !data.synthetic) throw Error(ErrorCode::InvalidArgument, "rho sweeps need a synthetic source");
  for (double r : rhos) {
    if (!(r >= 0.0 && r < 1.0)) throw Error(ErrorCode::InvalidArgument, "rho must lie in [0, 1)");
  }
  if (!(oracle_tol > 0.0)) throw Error(ErrorCode::InvalidArgument, "oracle tolerance must be > 0");
  // Fraction sweeps fill in delta later; everything else must already be valid.
  for (const AlgorithmConfig& a : algorithms) {
    AlgorithmConfig probe = a;
    if (!epsilons.empty()) probe.epsilon = epsilons.front();
    if (probe.variant == Variant::RFS && !delta_fracs.empty()) continue;
    probe.validate();
  }
}

// ---- JSON config ------------------------------------------------------------

namespace {

void reject_unknown(const json& j, std::initializer_list<const char*> keys, const std::string& where) {
  if (!j.is_object()) throw Error(ErrorCode::ParseError, where + " must be a JSON object");
  const std::set<std::string> known(keys.begin(), keys.end());
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!known.count(it.key())) throw Error(ErrorCode::ParseError, "unknown key '" + it.key() + "' in " + where);
  }
}

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
  return j.contains(key) ? j.at(key).get<T>() : fallback;
}

AlgorithmConfig algorithm_from_json(const json& j) {
  reject_unknown(j,
                 {"variant", "epsilon", "epsilon_schedule", "delta", "delta_grid", "clamp_grid", "max_iters",
                  "stop_tolerance", "store_vectors"},
                 "algorithm");
  AlgorithmConfig a;
  a.variant = parse_variant(j.at("variant").get<std::string>());
  a.epsilon = get_or(j, "epsilon", a.epsilon);
  a.epsilon_schedule = get_or(j, "epsilon_schedule", a.epsilon_schedule);
  if (j.contains("delta")) {
    const json& d = j.at("delta");
    a.delta = d.is_string() && d.get<std::string>() == "inf" ? kUnboundedDelta : d.get<double>();
  }
  a.delta_grid = get_or(j, "delta_grid", a.delta_grid);
  a.clamp_grid = get_or(j, "clamp_grid", a.clamp_grid);
  a.max_iters = get_or(j, "max_iters", a.max_iters);
  a.stop_tolerance = get_or(j, "stop_tolerance", a.stop_tolerance);
  a.store_vectors = get_or(j, "store_vectors", a.store_vectors);
  return a;
}

}  // namespace

ExperimentConfig config_from_json(const json& j) {
  try {
    reject_unknown(j, {"data", "algorithms", "epsilons", "delta_fracs", "rhos", "out", "emit", "oracle_tol", "threads"},
                   "config");
    ExperimentConfig c;
    const json& data = j.at("data");
    reject_unknown(data, {"synthetic", "csv", "response", "center"}, "data");
    if (data.contains("synthetic")) {
      const json& s = data.at("synthetic");
      reject_unknown(s, {"example", "n", "p", "rho", "snr", "support", "seed"}, "data.synthetic");
      SyntheticSpec spec;
      const std::string example = get_or<std::string>(s, "example", "a");
      if (example == "b" || example == "B") spec.beta_pop_support = 10;
      else if (example != "a" && example != "A") throw Error(ErrorCode::ParseError, "example must be 'a' or 'b'");
      spec.n = get_or(s, "n", spec.n);
      spec.p = get_or(s, "p", spec.p);
      spec.rho = get_or(s, "rho", spec.rho);
      spec.snr = get_or(s, "snr", spec.snr);
      spec.beta_pop_support = get_or(s, "support", spec.beta_pop_support);
      spec.seed = get_or(s, "seed", spec.seed);
      c.data.synthetic = spec;
    }
    if (data.contains("csv")) c.data.csv = data.at("csv").get<std::string>();
    if (data.contains("response")) {
      const json& r = data.at("response");
      if (r.is_number_unsigned()) c.data.response = r.get<std::size_t>();
      else c.data.response = r.get<std::string>();
    }
    c.data.center = get_or(data, "center", c.data.center);

    for (const json& a : j.at("algorithms")) c.algorithms.push_back(algorithm_from_json(a));
    c.epsilons = get_or(j, "epsilons", c.epsilons);
    c.delta_fracs = get_or(j, "delta_fracs", c.delta_fracs);
    c.rhos = get_or(j, "rhos", c.rhos);
    if (j.contains("out")) c.out_dir = j.at("out").get<std::string>();
    if (j.contains("emit")) {
      const json& e = j.at("emit");
      if (e.is_string()) {
        c.emit = parse_emit(e.get<std::string>());
      } else {
        std::string joined;
        for (const json& item : e) joined += item.get<std::string>() + ",";
        c.emit = parse_emit(joined);
      }
    }
    c.oracle_tol = get_or(j, "oracle_tol", c.oracle_tol);
    c.threads = get_or(j, "threads", c.threads);
    return c;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("config: ") + e.what());
  }
}

ExperimentConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open config " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, path.string() + ": " + e.what());
  }
  return config_from_json(j);
}

RawDataset load_dataset(const DatasetSource& source) {
  if (source.synthetic) return generate_synthetic(*source.synthetic).data;
  return load_csv(source.csv, source.response);
}

// ---- shared helpers -----------------------------------------------------------

namespace {

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::Io, "cannot create " + dir.string() + ": " + ec.message());
}

void write_json(const fs::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out << j.dump(2) << '\n';
}

json double_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

// Everything derived from one dataset that every cell on it reuses.
struct ProblemContext {
  double rho = 0.0;
  StandardizedProblem problem;
  SpectralSummary summary;
  LeastSquaresSolution ls;
  std::optional<DeltaMaxResult> dmax;
};

std::vector<ProblemContext> build_contexts(const ExperimentConfig& config, bool need_delta_max) {
  std::vector<double> rhos = config.rhos;
  if (rhos.empty()) rhos.push_back(config.data.synthetic ? config.data.synthetic->rho : 0.0);

  std::vector<std::optional<ProblemContext>> slots(rhos.size());
  parallel_for(rhos.size(), config.threads, [&](std::size_t i) {
    DatasetSource source = config.data;
    if (source.synthetic) source.synthetic->rho = rhos[i];
    StandardizedProblem problem = standardize(load_dataset(source), source.center);
    const SpectralDecomposition factors = decompose(problem);
    LeastSquaresSolution ls = solve_least_squares(problem, factors);
    std::optional<DeltaMaxResult> dmax;
    if (need_delta_max) dmax = compute_delta_max(problem, config.oracle_tol);
    slots[i] = ProblemContext{rhos[i], std::move(problem), factors.summary, std::move(ls), std::move(dmax)};
  });
  std::vector<ProblemContext> out;
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

std::string label_for(const FitCell& cell, bool with_rho) {
  std::string label = std::string(to_string(cell.config.variant));
  if (cell.config.variant != Variant::FSek) label += "_eps" + format_double(cell.config.epsilon);
  if (cell.delta_frac) label += "_frac" + format_double(*cell.delta_frac);
  else if (cell.config.variant == Variant::RFS && std::isfinite(cell.config.delta))
    label += "_delta" + format_double(cell.config.delta);
  if (with_rho) label += "_rho" + format_double(cell.rho);
  return label;
}

// Cells for one context, in a fixed order: algorithm, epsilon, fraction.
std::vector<FitCell> expand_cells(const ExperimentConfig& config, const ProblemContext& ctx, bool with_rho) {
  std::vector<FitCell> cells;
  for (const AlgorithmConfig& base : config.algorithms) {
    std::vector<double> eps_axis = config.epsilons;
    if (eps_axis.empty() || base.variant == Variant::FSek) eps_axis = {base.epsilon};
    for (double eps : eps_axis) {
      AlgorithmConfig a = base;
      a.epsilon = eps;
      if (a.variant == Variant::RFS && !config.delta_fracs.empty()) {
        for (double frac : config.delta_fracs) {
          FitCell cell{"", a, ctx.rho, frac};
          cell.config.delta = frac * ctx.dmax->value;
          cell.label = label_for(cell, with_rho);
          cells.push_back(std::move(cell));
        }
      } else {
        FitCell cell{"", a, ctx.rho, std::nullopt};
        cell.label = label_for(cell, with_rho);
        cells.push_back(std::move(cell));
      }
    }
  }
  return cells;
}

bool needs_delta_max(const ExperimentConfig& config) {
  if (config.delta_fracs.empty()) return false;
  return std::any_of(config.algorithms.begin(), config.algorithms.end(),
                     [](const AlgorithmConfig& a) { return a.variant == Variant::RFS; });
}

struct Job {
  const ProblemContext* ctx;
  FitCell cell;
};

std::vector<Job> expand_jobs(const ExperimentConfig& config, const std::vector<ProblemContext>& contexts) {
  std::vector<Job> jobs;
  const bool with_rho = contexts.size() > 1;
  for (const ProblemContext& ctx : contexts) {
    for (FitCell& cell : expand_cells(config, ctx, with_rho)) jobs.push_back({&ctx, std::move(cell)});
  }
  return jobs;
}

fs::path output_path(const ExperimentConfig& config, const std::string& stem, const std::string& label,
                     bool single) {
  return config.out_dir / (single ? stem + ".csv" : stem + "_" + label + ".csv");
}

void write_trace(const fs::path& path, const BoostTrace& trace) {
  std::vector<std::vector<double>> rows;
  rows.reserve(trace.records.size());
  for (const IterationRecord& r : trace.records) {
    rows.push_back({static_cast<double>(r.k), static_cast<double>(r.j), static_cast<double>(r.sign), r.step,
                    r.train_error, r.l1_norm, static_cast<double>(r.l0_norm), r.inf_corr});
  }
  write_csv(path, {"iter", "j_k", "sign", "step", "train_error", "l1_norm", "l0_norm", "inf_corr"}, rows);
}

// Lower sandwich values L*_{n, lk}, warm-started along increasing lk.
std::vector<double> lasso_along_lk(const ProblemContext& ctx, const GuaranteeConstants& c, std::size_t K, double tol) {
  std::vector<double> out;
  out.reserve(K + 1);
  LassoOptions options;
  options.tol = tol;
  const double dmax = ctx.dmax ? ctx.dmax->value : std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k <= K; ++k) {
    const double lk = lsboost_bounds(c, k).lk;
    if (!(lk > 0.0)) {
      out.push_back(null_loss(ctx.problem));
    } else if (lk >= dmax) {
      out.push_back(ctx.ls.loss_star);
    } else {
      try {
        const LassoSolution sol = solve_lasso(ctx.problem, lk, options);
        options.start = sol.beta_star;
        out.push_back(sol.loss_star_delta);
      } catch (const LassoNotConverged& e) {
        out.push_back(e.best().loss_star_delta);
      }
    }
  }
  return out;
}

// Bounds columns, keeping only the quantities that apply to the variant.
void write_bounds(const fs::path& path, const GuaranteeProfile& profile) {
  const std::vector<std::pair<const char*, double GuaranteeRow::*>> all = {
      {"train_error_bound", &GuaranteeRow::train_error_bound},
      {"coeff_dist_bound", &GuaranteeRow::coeff_dist_bound},
      {"prediction_dist_bound", &GuaranteeRow::prediction_dist_bound},
      {"gradient_bound", &GuaranteeRow::gradient_bound},
      {"l1_shrink_bound", &GuaranteeRow::l1_shrink_bound},
      {"lk_estimate", &GuaranteeRow::lk_estimate},
      {"lower_sandwich", &GuaranteeRow::lower_sandwich},
      {"upper_sandwich", &GuaranteeRow::upper_sandwich},
  };
  std::vector<std::string> header{"k"};
  std::vector<double GuaranteeRow::*> used;
  for (const auto& [name, member] : all) {
    const bool finite = std::all_of(profile.rows.begin(), profile.rows.end(),
                                    [m = member](const GuaranteeRow& r) { return std::isfinite(r.*m); });
    if (finite && !profile.rows.empty()) {
      header.emplace_back(name);
      used.push_back(member);
    }
  }
  std::vector<std::vector<double>> rows;
  for (const GuaranteeRow& r : profile.rows) {
    std::vector<double> row{static_cast<double>(r.k)};
    for (auto m : used) row.push_back(r.*m);
    rows.push_back(std::move(row));
  }
  write_csv(path, header, rows);
}

void write_certificates(const fs::path& path, const ProblemContext& ctx, const BoostTrace& trace) {
  std::vector<std::vector<double>> rows;
  for (const IterationRecord& r : trace.records) {
    const DualCertificate c = certify(ctx.problem, r.beta, r.delta);
    rows.push_back({static_cast<double>(r.k), r.delta, c.omega, c.gap_bound, c.primal_value, c.dual_value});
  }
  write_csv(path, {"k", "delta", "omega", "gap_bound", "primal_value", "dual_value"}, rows);
}

// Profile pairs for one run. Columns follow kProfileHeader.
const std::vector<std::string> kProfileHeader = {
    "cell",          "k",           "epsilon",     "delta",          "train_error",
    "l1_norm",       "train_error_rel", "l1_norm_rel", "l1_normalizer", "bound_train_error",
    "bound_l1",      "bound_train_rel", "bound_l1_rel", "bound_l1_normalizer"};

std::vector<std::vector<double>> profile_rows(std::size_t cell_index, const ProblemContext& ctx, const FitCell& cell,
                                              const BoostTrace& trace, double oracle_tol) {
  const AlgorithmConfig& a = cell.config;
  const std::size_t K = trace.iterations();
  std::vector<double> bound_train(K + 1), bound_l1(K + 1);
  switch (a.variant) {
    case Variant::LSBoost: {
      const GuaranteeConstants c = make_constants(ctx.problem, ctx.summary, ctx.ls, a.epsilon);
      for (std::size_t k = 0; k <= K; ++k) {
        const LsBoostBounds b = lsboost_bounds(c, k);
        bound_train[k] = ctx.ls.loss_star + b.train_gap;
        bound_l1[k] = b.lk;
      }
      break;
    }
    case Variant::FSe: {
      const GuaranteeConstants c = make_constants(ctx.problem, ctx.summary, ctx.ls, a.epsilon);
      for (std::size_t k = 0; k <= K; ++k) {
        const FseBounds b = fse_bounds(c, k);
        bound_train[k] = ctx.ls.loss_star + b.train_gap;
        bound_l1[k] = b.l1_shrink;
      }
      break;
    }
    case Variant::RFS: {
      const GuaranteeConstants c = make_constants(ctx.problem, ctx.summary, ctx.ls, a.epsilon, a.delta);
      LassoOptions options;
      options.tol = oracle_tol;
      double lasso_star;
      try {
        lasso_star = solve_lasso(ctx.problem, a.delta, options).loss_star_delta;
      } catch (const LassoNotConverged& e) {
        lasso_star = e.best().loss_star_delta;
      }
      for (std::size_t k = 0; k <= K; ++k) {
        const RfsBounds b = rfs_bounds(c, k);
        bound_train[k] = lasso_star + b.train_gap;
        bound_l1[k] = b.l1_shrink;
      }
      break;
    }
    default:
      throw Error(ErrorCode::InvalidArgument, "profile pairs are defined for lsboost, fse and rfs runs");
  }

  auto normalizer_of = [](double v) { return v > 0.0 ? v : 1.0; };
  double l1_max = 0.0;
  for (const IterationRecord& r : trace.records) l1_max = std::max(l1_max, r.l1_norm);
  const double l1_norm = normalizer_of(l1_max);
  const double train0 = normalizer_of(trace.records.front().train_error);
  const double bound_l1_norm = normalizer_of(*std::max_element(bound_l1.begin(), bound_l1.end()));
  const double bound0 = normalizer_of(bound_train.front());

  std::vector<std::vector<double>> rows;
  rows.reserve(K + 1);
  for (std::size_t k = 0; k <= K; ++k) {
    const IterationRecord& r = trace.records[k];
    const double delta = std::isfinite(r.delta) ? r.delta : 0.0;
    rows.push_back({static_cast<double>(cell_index), static_cast<double>(k), r.epsilon, delta, r.train_error,
                    r.l1_norm, r.train_error / train0, r.l1_norm / l1_norm, l1_norm, bound_train[k], bound_l1[k],
                    bound_train[k] / bound0, bound_l1[k] / bound_l1_norm, bound_l1_norm});
  }
  return rows;
}

json cell_json(const FitCell& cell, const ProblemContext& ctx) {
  json j;
  j["label"] = cell.label;
  j["variant"] = std::string(to_string(cell.config.variant));
  j["epsilon"] = cell.config.epsilon;
  j["delta"] = double_or_null(cell.config.delta);
  j["delta_frac"] = cell.delta_frac ? json(*cell.delta_frac) : json(nullptr);
  j["rho"] = ctx.rho;
  j["max_iters"] = cell.config.max_iters;
  return j;
}

json context_json(const ProblemContext& ctx) {
  json j;
  j["rho"] = ctx.rho;
  j["n"] = ctx.problem.n();
  j["p"] = ctx.problem.p();
  j["lambda_pmin"] = ctx.summary.lambda_pmin;
  j["rank"] = ctx.summary.rank;
  j["fitted_norm"] = ctx.ls.fitted_norm;
  j["loss_star"] = ctx.ls.loss_star;
  if (ctx.dmax) {
    j["delta_max"] = ctx.dmax->value;
    j["delta_max_lower_bound"] = ctx.dmax->lower_bound;
    j["delta_max_exact"] = ctx.dmax->exact;
  }
  return j;
}

}  // namespace

// ---- gen --------------------------------------------------------------------------

json cmd_gen(const SyntheticSpec& spec, const fs::path& out_dir) {
  const SyntheticDataset ds = generate_synthetic(spec);
  ensure_dir(out_dir);
  write_matrix_csv(out_dir / "X.csv", ds.data.X, "x");
  write_matrix_csv(out_dir / "y.csv", ds.data.y, "y");

  json meta;
  meta["seed"] = spec.seed;
  meta["n"] = spec.n;
  meta["p"] = spec.p;
  meta["rho"] = spec.rho;
  meta["snr"] = spec.snr;
  meta["beta_pop_support"] = spec.beta_pop_support;
  meta["beta_pop"] = std::vector<double>(ds.beta_pop.data(), ds.beta_pop.data() + ds.beta_pop.size());
  meta["signal_variance"] = ds.signal_variance;
  meta["sigma2"] = ds.noise_variance;
  meta["generator"] = "mt19937_64 + Box-Muller, one-factor equicorrelated design";
  write_json(out_dir / "meta.json", meta);
  return meta;
}

// ---- fit ----------------------------------------------------------------------------

FitResult cmd_fit(const ExperimentConfig& config) {
  config.validate();
  const std::vector<ProblemContext> contexts = build_contexts(config, needs_delta_max(config));
  const std::vector<Job> jobs = expand_jobs(config, contexts);
  const bool single = jobs.size() == 1;
  ensure_dir(config.out_dir);

  std::vector<FitOutput> outputs(jobs.size());
  std::vector<std::vector<std::vector<double>>> profile_blocks(jobs.size());
  parallel_for(jobs.size(), config.threads, [&](std::size_t i) {
    const Job& job = jobs[i];
    const ProblemContext& ctx = *job.ctx;
    AlgorithmConfig a = job.cell.config;
    const bool finite_delta = a.variant == Variant::PathRFS || (a.variant == Variant::RFS && std::isfinite(a.delta));
    const bool want_certificates = config.emit.certificates && finite_delta;
    if (want_certificates) a.store_vectors = true;
    const BoostTrace trace = run(ctx.problem, a);

    FitOutput& out = outputs[i];
    out.cell = job.cell;
    out.iterations = trace.iterations();
    out.final_train_error = trace.records.back().train_error;
    out.final_l1_norm = trace.records.back().l1_norm;

    const fs::path trace_path = output_path(config, "trace", job.cell.label, single);
    write_trace(trace_path, trace);
    out.files.push_back(trace_path);

    if (config.emit.bounds && a.variant != Variant::FSek) {
      const GuaranteeConstants c = make_constants(ctx.problem, ctx.summary, ctx.ls, a.epsilon, a.delta);
      std::vector<double> lower;
      if (a.variant == Variant::LSBoost) lower = lasso_along_lk(ctx, c, trace.iterations(), config.oracle_tol);
      const GuaranteeProfile profile = guarantee_profile(a.variant, c, trace.iterations(), a.delta_grid, lower);
      const fs::path p = output_path(config, "bounds", job.cell.label, single);
      write_bounds(p, profile);
      out.files.push_back(p);
    }
    if (want_certificates) {
      const fs::path p = output_path(config, "certificates", job.cell.label, single);
      write_certificates(p, ctx, trace);
      out.files.push_back(p);
    }
    if (config.emit.profile_pairs && a.variant != Variant::FSek && a.variant != Variant::PathRFS) {
      profile_blocks[i] = profile_rows(i, ctx, job.cell, trace, config.oracle_tol);
    }
  });

  FitResult result;
  result.outputs = std::move(outputs);
  json meta;
  meta["contexts"] = json::array();
  for (const ProblemContext& ctx : contexts) {
    meta["contexts"].push_back(context_json(ctx));
    if (ctx.dmax) result.delta_max.push_back(ctx.dmax->value);
  }
  meta["cells"] = json::array();
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    json cj = cell_json(jobs[i].cell, *jobs[i].ctx);
    cj["iterations"] = result.outputs[i].iterations;
    cj["final_train_error"] = result.outputs[i].final_train_error;
    cj["final_l1_norm"] = result.outputs[i].final_l1_norm;
    json files = json::array();
    for (const fs::path& f : result.outputs[i].files) files.push_back(f.filename().string());
    cj["files"] = files;
    meta["cells"].push_back(cj);
  }

  if (config.emit.profile_pairs) {
    std::vector<std::vector<double>> rows;
    for (auto& block : profile_blocks) rows.insert(rows.end(), block.begin(), block.end());
    write_csv(config.out_dir / "profile_pairs.csv", kProfileHeader, rows);
  }
  if (!config.delta_fracs.empty()) write_json(config.out_dir / "fit.json", meta);
  result.metadata = std::move(meta);
  return result;
}

// ---- profile ------------------------------------------------------------------------

fs::path cmd_profile(const ExperimentConfig& config) {
  config.validate();
  for (const AlgorithmConfig& a : config.algorithms) {
    if (a.variant == Variant::FSek || a.variant == Variant::PathRFS) {
      throw Error(ErrorCode::InvalidArgument, "profile supports lsboost, fse and rfs");
    }
  }
  const std::vector<ProblemContext> contexts = build_contexts(config, needs_delta_max(config));
  const std::vector<Job> jobs = expand_jobs(config, contexts);
  ensure_dir(config.out_dir);

  std::vector<std::vector<std::vector<double>>> blocks(jobs.size());
  parallel_for(jobs.size(), config.threads, [&](std::size_t i) {
    AlgorithmConfig a = jobs[i].cell.config;
    a.store_vectors = false;
    const BoostTrace trace = run(jobs[i].ctx->problem, a);
    blocks[i] = profile_rows(i, *jobs[i].ctx, jobs[i].cell, trace, config.oracle_tol);
  });

  std::vector<std::vector<double>> rows;
  for (auto& b : blocks) rows.insert(rows.end(), b.begin(), b.end());
  const fs::path path = config.out_dir / "profile_pairs.csv";
  write_csv(path, kProfileHeader, rows);

  json meta;
  meta["l1_normalization"] = "per-curve maximum";
  meta["train_error_normalization"] = "value at k = 0";
  meta["contexts"] = json::array();
  for (const ProblemContext& ctx : contexts) meta["contexts"].push_back(context_json(ctx));
  meta["cells"] = json::array();
  for (const Job& job : jobs) meta["cells"].push_back(cell_json(job.cell, *job.ctx));
  write_json(config.out_dir / "profile.json", meta);
  return path;
}

// ---- rho-sweep ---------------------------------------------------------------------

namespace {

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b, std::uint64_t c) {
  // splitmix64 finalizer over a simple combination of the coordinates.
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (1 + a) + 0xbf58476d1ce4e5b9ULL * (1 + b) +
                    0x94d049bb133111ebULL * (1 + c);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

RhoSweepResult rho_sweep(const RhoSweepConfig& config) {
  if (config.ps.empty() || config.rhos.empty() || config.repeats == 0) {
    throw Error(ErrorCode::InvalidArgument, "rho sweep needs at least one p, one rho and one repeat");
  }
  const std::size_t np = config.ps.size();
  const std::size_t nr = config.rhos.size();
  const std::size_t total = np * nr * config.repeats;
  std::vector<double> lambdas(total), gammas(total);

  parallel_for(total, config.threads, [&](std::size_t idx) {
    const std::size_t rep = idx % config.repeats;
    const std::size_t ri = (idx / config.repeats) % nr;
    const std::size_t pi = idx / (config.repeats * nr);
    SyntheticSpec spec = example_a(config.n, config.ps[pi], config.rhos[ri], 1.0, mix_seed(config.seed, pi, ri, rep));
    spec.beta_pop_support = std::min<std::size_t>(spec.beta_pop_support, spec.p);
    const StandardizedProblem problem = standardize(generate_synthetic(spec).data);
    const SpectralSummary s = analyze(problem);
    lambdas[idx] = s.lambda_pmin;
    gammas[idx] = gamma(s, 1.0);
  });

  RhoSweepResult result;
  for (std::size_t pi = 0; pi < np; ++pi) {
    double previous = -1.0;
    for (std::size_t ri = 0; ri < nr; ++ri) {
      RhoSweepRow row;
      row.rho = config.rhos[ri];
      row.p = config.ps[pi];
      row.repeats = config.repeats;
      for (std::size_t rep = 0; rep < config.repeats; ++rep) {
        const std::size_t idx = (pi * nr + ri) * config.repeats + rep;
        row.lambda_pmin += lambdas[idx];
        row.gamma += gammas[idx];
      }
      row.lambda_pmin /= static_cast<double>(config.repeats);
      row.gamma /= static_cast<double>(config.repeats);
      if (ri > 0 && row.gamma < previous) {
        result.warnings.push_back("p=" + std::to_string(row.p) + ": mean gamma drops from " +
                                  format_double(previous) + " to " + format_double(row.gamma) + " at rho=" +
                                  format_double(row.rho));
      }
      previous = row.gamma;
      result.rows.push_back(row);
    }
  }
  return result;
}

RhoSweepResult cmd_rho_sweep(const RhoSweepConfig& config, const fs::path& out_dir) {
  RhoSweepResult result = rho_sweep(config);
  ensure_dir(out_dir);
  std::vector<std::vector<double>> rows;
  for (const RhoSweepRow& r : result.rows) {
    rows.push_back({r.rho, static_cast<double>(r.p), static_cast<double>(config.n), r.lambda_pmin, r.gamma,
                    static_cast<double>(r.repeats)});
  }
  write_csv(out_dir / "gamma_vs_p.csv", {"rho", "p", "n", "lambda_pmin", "gamma", "repeats"}, rows);
  return result;
}

}  // namespace stagewise
