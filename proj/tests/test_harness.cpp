#include "stagewise/csv_io.hpp"
#include "stagewise/harness.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <atomic>
#include <numeric>
#include <algorithm>

using namespace stagewise;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("stagewise_harness_" + name);
  fs::remove_all(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::set<std::string> listing(const fs::path& dir) {
  std::set<std::string> names;
  for (const auto& e : fs::directory_iterator(dir)) names.insert(e.path().filename().string());
  return names;
}

ExperimentConfig small_config(const fs::path& out) {
  ExperimentConfig c;
  c.data.synthetic = example_a(30, 20, 0.3, 2.0, 5);
  AlgorithmConfig a;
  a.variant = Variant::LSBoost;
  a.epsilon = 0.1;
  a.max_iters = 50;
  c.algorithms = {a};
  c.out_dir = out;
  c.threads = 2;
  return c;
}

}  // namespace

TEST(Gen, SameSeedSameFiles) {
  const fs::path a = fresh_dir("gen_a"), b = fresh_dir("gen_b");
  cmd_gen(example_a(50, 500, 0.5, 1.0, 3), a);
  cmd_gen(example_a(50, 500, 0.5, 1.0, 3), b);
  for (const char* f : {"X.csv", "y.csv", "meta.json"}) EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
  const CsvTable X = read_csv(a / "X.csv");
  EXPECT_EQ(X.rows.size(), 50u);
  EXPECT_EQ(X.header.size(), 500u);
}

TEST(Gen, ExampleBMetadata) {
  const nlohmann::json meta = cmd_gen(example_b(50, 500, 0.0, 9), fresh_dir("gen_b_meta"));
  const auto beta = meta.at("beta_pop").get<std::vector<double>>();
  ASSERT_EQ(beta.size(), 500u);
  for (int i = 0; i < 10; ++i) EXPECT_EQ(beta[i], 1.0);
  EXPECT_EQ(beta[10], 0.0);
  EXPECT_EQ(meta.at("seed").get<std::uint64_t>(), 9u);
  EXPECT_TRUE(meta.contains("sigma2"));
}

TEST(Fit, EmitOffWritesOnlyTrace) {
  const fs::path out = fresh_dir("fit_plain");
  const FitResult r = cmd_fit(small_config(out));
  EXPECT_EQ(listing(out), (std::set<std::string>{"trace.csv"}));
  const CsvTable t = read_csv(out / "trace.csv");
  EXPECT_EQ(t.header, (std::vector<std::string>{"iter", "j_k", "sign", "step", "train_error", "l1_norm", "l0_norm",
                                                "inf_corr"}));
  EXPECT_EQ(t.rows.size(), 51u);
  for (std::size_t i = 1; i < t.rows.size(); ++i) EXPECT_LE(t.rows[i][4], t.rows[i - 1][4]);
  EXPECT_EQ(r.outputs.size(), 1u);
}

TEST(Fit, TraceRoundTripsExactly) {
  const fs::path out = fresh_dir("fit_roundtrip");
  const ExperimentConfig c = small_config(out);
  cmd_fit(c);
  const BoostTrace trace = run(standardize(load_dataset(c.data)), c.algorithms[0]);
  const CsvTable t = read_csv(out / "trace.csv");
  for (std::size_t k = 0; k < t.rows.size(); ++k) {
    EXPECT_EQ(t.rows[k][4], trace.records[k].train_error);
    EXPECT_EQ(t.rows[k][5], trace.records[k].l1_norm);
    EXPECT_EQ(t.rows[k][7], trace.records[k].inf_corr);
  }
}

TEST(Fit, SevenFractionsSevenTraces) {
  const fs::path out = fresh_dir("fit_fracs");
  ExperimentConfig c = small_config(out);
  c.algorithms[0].variant = Variant::RFS;
  c.algorithms[0].epsilon = 0.01;
  c.delta_fracs = {0.02, 0.05, 0.1, 0.2, 0.4, 0.6, 0.8};
  c.emit = parse_emit("trace,bounds,certificates");
  const FitResult r = cmd_fit(c);
  ASSERT_EQ(r.outputs.size(), 7u);
  ASSERT_EQ(r.delta_max.size(), 1u);
  std::size_t traces = 0;
  for (const auto& name : listing(out)) traces += name.rfind("trace_", 0) == 0;
  EXPECT_EQ(traces, 7u);
  EXPECT_TRUE(fs::exists(out / "fit.json"));
  for (const FitOutput& o : r.outputs) {
    EXPECT_DOUBLE_EQ(o.cell.config.delta, *o.cell.delta_frac * r.delta_max[0]);
    EXPECT_LE(o.final_l1_norm, o.cell.config.delta * (1 + 1e-12));
  }
}

TEST(Fit, ConfigFromJson) {
  const nlohmann::json j = nlohmann::json::parse(R"({
    "data": {"synthetic": {"example": "a", "n": 20, "p": 10, "rho": 0.5, "seed": 2}},
    "algorithms": [{"variant": "fse", "epsilon": 0.1, "max_iters": 20},
                   {"variant": "rfs", "epsilon": 0.1, "delta": "inf"}],
    "rhos": [0.0, 0.5],
    "emit": "trace,bounds",
    "out": "somewhere"
  })");
  const ExperimentConfig c = config_from_json(j);
  EXPECT_EQ(c.algorithms.size(), 2u);
  EXPECT_TRUE(std::isinf(c.algorithms[1].delta));
  EXPECT_TRUE(c.emit.bounds);
  EXPECT_FALSE(c.emit.certificates);
  EXPECT_ANY_THROW(config_from_json(nlohmann::json::parse(R"({"algorithms": [], "typo": 1})")));
  ExperimentConfig bad = c;
  bad.delta_fracs = {1.5};
  EXPECT_ANY_THROW(bad.validate());
}

TEST(Profile, FirstRowIsNormalized) {
  const fs::path out = fresh_dir("profile");
  ExperimentConfig c = small_config(out);
  AlgorithmConfig fse = c.algorithms[0];
  fse.variant = Variant::FSe;
  c.algorithms.push_back(fse);
  const fs::path path = cmd_profile(c);
  const CsvTable t = read_csv(path);
  const std::size_t rel = t.column("train_error_rel");
  const std::size_t bound = t.column("bound_train_error");
  const std::size_t lk = t.column("bound_l1");
  EXPECT_EQ(t.rows.front()[rel], 1.0);
  double prev_bound = 1e300, prev_lk = -1;
  for (const auto& row : t.rows) {
    if (row[0] != 0.0) break;  // LS-Boost cell: bound decreasing while lk grows
    EXPECT_LE(row[bound], prev_bound);
    EXPECT_GE(row[lk], prev_lk);
    prev_bound = row[bound];
    prev_lk = row[lk];
  }
  const auto second = std::find_if(t.rows.begin(), t.rows.end(), [](const auto& r) { return r[0] == 1.0; });
  ASSERT_NE(second, t.rows.end());
  EXPECT_EQ((*second)[rel], 1.0);
}

TEST(RhoSweep, SingleCellOneRow) {
  RhoSweepConfig c;
  c.n = 20;
  c.ps = {30};
  c.rhos = {0.5};
  c.repeats = 2;
  const fs::path out = fresh_dir("rho");
  const RhoSweepResult r = cmd_rho_sweep(c, out);
  ASSERT_EQ(r.rows.size(), 1u);
  EXPECT_GE(r.rows[0].gamma, 0.75);
  EXPECT_LT(r.rows[0].gamma, 1.0);
  EXPECT_EQ(read_csv(out / "gamma_vs_p.csv").rows.size(), 1u);
}

TEST(RhoSweep, CorrelationSlowsConvergence) {
  RhoSweepConfig c;
  c.ps = {500};
  c.rhos = {0.0, 0.9};
  c.repeats = 10;
  c.seed = 1;
  const RhoSweepResult r = rho_sweep(c);
  ASSERT_EQ(r.rows.size(), 2u);
  EXPECT_GE(r.rows[1].gamma, r.rows[0].gamma);
}

TEST(Verify, DefaultSuitePasses) {
  VerifyOptions o;
  o.instances = 2;
  o.iterations = 120;
  const VerifyReport r = cmd_verify(o);
  EXPECT_TRUE(r.passed());
  for (const FamilyResult& f : r.families) {
    EXPECT_TRUE(f.passed) << f.name << " max violation " << f.max_violation;
    EXPECT_GT(f.checks, 0u) << f.name;
  }
  const nlohmann::json j = r.to_json();
  EXPECT_TRUE(j.at("passed").get<bool>());
  EXPECT_TRUE(j.at("families").at(0).contains("min_slack"));
}

TEST(Verify, CorruptedGammaIsCaught) {
  VerifyOptions o;
  o.instances = 2;
  o.iterations = 120;
  o.gamma_shift = -0.1;
  const VerifyReport r = cmd_verify(o);
  EXPECT_FALSE(r.passed());
  for (const FamilyResult& f : r.families) {
    if (f.name == "lsboost_contraction") EXPECT_FALSE(f.passed);
    if (f.name == "subgrad_equivalence" || f.name == "duality") EXPECT_TRUE(f.passed);
  }
}

TEST(Parallel, RethrowsFirstError) {
  std::atomic<int> ran{0};
  EXPECT_THROW(parallel_for(16, 4,
                            [&](std::size_t i) {
                              ++ran;
                              if (i == 3) throw std::runtime_error("boom");
                            }),
               std::runtime_error);
  std::vector<int> hit(100, 0);
  parallel_for(100, 0, [&](std::size_t i) { hit[i] = 1; });
  EXPECT_EQ(std::accumulate(hit.begin(), hit.end(), 0), 100);
}
