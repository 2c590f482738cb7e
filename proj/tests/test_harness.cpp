#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <unistd.h>

#include "entrolab/error.hpp"
#include "entrolab/harness.hpp"
#include "entrolab/parallel.hpp"

using namespace entrolab;
using namespace entrolab::harness;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

class HarnessTest : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() /
           ("entrolab_" + std::string(info->name()) + "_" + std::to_string(static_cast<long>(::getpid())));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  fs::path write_config(const std::string& name, json cfg) {
    const fs::path p = dir_ / name;
    std::ofstream(p) << cfg.dump(2);
    return p;
  }

  int run(const fs::path& cfg) {
    std::ostringstream out, log;
    const int code = run_config(cfg, out, log);
    last_log_ = log.str();
    return code;
  }

  fs::path dir_;
  std::string last_log_;
};

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

// Oracle: itineraries read straight off the admissible blocks, and the
// largest shattered index set by trying every subset.
std::size_t brute_force_shatter(const symdyn::Subshift& s, const std::set<symdyn::Symbol>& plus, std::size_t n) {
  std::set<std::uint64_t> e;
  for (const auto& w : symdyn::enumerate_blocks(s, n)) {
    std::uint64_t bits = 0;
    for (std::size_t i = 0; i < n; ++i)
      if (plus.count(w[i])) bits |= std::uint64_t{1} << i;
    e.insert(bits);
  }
  std::size_t best = 0;
  for (std::uint64_t mask = 1; mask < (std::uint64_t{1} << n); ++mask) {
    const auto size = static_cast<std::size_t>(std::popcount(mask));
    if (size <= best) continue;
    std::set<std::uint64_t> seen;
    for (std::uint64_t x : e) seen.insert(x & mask);
    if (seen.size() == (std::uint64_t{1} << size)) best = size;
  }
  return best;
}

}  // namespace

TEST(Config, RejectsUnknownKeys) {
  EXPECT_THROW(parse_config(json{{"command", "entropy"}, {"sed", 1}}), Error);
  EXPECT_THROW(parse_config(json{{"command", "entropy"}, {"caps", {{"net_cp", 5}}}}), Error);
  EXPECT_THROW(parse_config(json{{"command", "entropie"}}), Error);
  EXPECT_THROW(parse_config(json{{"command", "entropy"}, {"seed", -1}}), Error);
  const auto cfg = parse_config(json{{"command", "lgeom"}, {"seed", 18446744073709551615ULL}});
  EXPECT_EQ(cfg.seed, 18446744073709551615ULL);
}

TEST(Config, SeedOverride) {
  ExperimentConfig cfg;
  cfg.seed = 5;
  apply_seed_override(cfg, nullptr);
  EXPECT_EQ(cfg.seed, 5U);
  apply_seed_override(cfg, "42");
  EXPECT_EQ(cfg.seed, 42U);
  EXPECT_THROW(apply_seed_override(cfg, "-1"), Error);
  EXPECT_THROW(apply_seed_override(cfg, "12x"), Error);
  EXPECT_THROW(apply_seed_override(cfg, "99999999999999999999999"), Error);
}

TEST(Config, StochasticCommandsNeedSeeds) {
  ExperimentConfig cfg;
  cfg.command = Command::Lgeom;
  EXPECT_TRUE(is_stochastic(cfg));
  cfg.command = Command::BoundSweep;
  EXPECT_TRUE(is_stochastic(cfg));
  cfg.command = Command::Distortion;
  cfg.parameters = {{"method", "exact_face"}, {"family", {{"kind", "symmetrized_row"}, {"n", 3}, {"k", 4}}}};
  EXPECT_FALSE(is_stochastic(cfg));
  cfg.parameters["method"] = "sampled";
  EXPECT_TRUE(is_stochastic(cfg));
  cfg.command = Command::Entropy;
  EXPECT_FALSE(is_stochastic(cfg));
}

TEST(Config, HashIgnoresOutputDir) {
  ExperimentConfig a;
  a.parameters = {{"alphabet", 2}};
  ExperimentConfig b = a;
  b.output_dir = "elsewhere";
  EXPECT_EQ(config_hash(a), config_hash(b));
  b.seed = 1;
  EXPECT_NE(config_hash(a), config_hash(b));
}

TEST(Format, Doubles) {
  EXPECT_EQ(format_double(0.5), "0.5");
  EXPECT_EQ(format_double(0.1), "0.10000000000000001");
  EXPECT_EQ(format_double(1.0 / 0.0), "inf");
  EXPECT_EQ(format_double(-1.0 / 0.0), "-inf");
}

TEST_F(HarnessTest, MinimalEntropyConfig) {
  const fs::path out = dir_ / "out";
  const auto cfg =
      write_config("c.json", {{"command", "entropy"}, {"parameters", {{"alphabet", 2}}}, {"output_dir", out.string()}});
  ASSERT_EQ(run(cfg), kExitOk) << last_log_;
  const std::string csv = slurp(out / "results.csv");
  EXPECT_EQ(csv.rfind("n,value_nats,exact,method\n", 0), 0U);
  EXPECT_EQ(csv.find('\r'), std::string::npos);
  EXPECT_NE(csv.find("\n12,0.69314718055994529,true,block_growth\n"), std::string::npos);
  const json manifest = json::parse(slurp(out / "manifest.json"));
  EXPECT_EQ(manifest["files"], json({"results.csv", "summary.json", "manifest.json"}));
  EXPECT_EQ(manifest["version"], std::string(kVersion));
  EXPECT_EQ(manifest["config_hash"].get<std::string>().size(), 16U);
  EXPECT_TRUE(manifest.contains("started_at"));
  EXPECT_TRUE(manifest.contains("tolerances"));
}

TEST_F(HarnessTest, ValidationErrorsExitTwoWithoutOutput) {
  const fs::path out = dir_ / "out";
  const std::vector<json> bad = {
      {{"command", "entropy"}, {"parameters", {{"alphabt", 2}}}, {"output_dir", out.string()}},
      {{"command", "entropy"}, {"parameters", {{"alphabet", 2}, {"alphabt", 2}}}, {"output_dir", out.string()}},
      {{"command", "entropy"}, {"parameters", {{"alphabet", 2}, {"forbidden", {"12"}}}}, {"output_dir", out.string()}},
      {{"command", "cert"}, {"parameters", {{"kind", "ht"}, {"mu", 1.5}}}, {"output_dir", out.string()}},
      {{"command", "cert"}, {"parameters", {{"kind", "ht"}, {"mu", 1}, {"D", 2}, {"delta", 0.5}}},
       {"output_dir", out.string()}},
      {{"command", "lgeom"}, {"parameters", {{"r", 2}, {"n", 2}}}, {"output_dir", out.string()}},
      {{"command", "distortion"},
       {"parameters", {{"family", {{"kind", "symmetrized_row"}, {"n", 3}, {"k", 4}}}, {"method", "exakt"}}},
       {"output_dir", out.string()}},
  };
  for (std::size_t i = 0; i < bad.size(); ++i) {
    EXPECT_EQ(run(write_config("bad" + std::to_string(i) + ".json", bad[i])), kExitInvalid) << bad[i].dump();
    EXPECT_FALSE(fs::exists(out)) << bad[i].dump();
  }
  std::ofstream(dir_ / "broken.json") << "{\"command\": ";
  EXPECT_EQ(run(dir_ / "broken.json"), kExitInvalid);
  EXPECT_EQ(run(dir_ / "missing.json"), kExitInvalid);
}

TEST_F(HarnessTest, InfeasibleRequestsExitThreeWithoutOutput) {
  const fs::path out = dir_ / "out";
  const std::vector<json> infeasible = {
      {{"command", "distortion"},
       {"parameters", {{"family", {{"kind", "symmetrized_row"}, {"n", 30}, {"k", 31}}}, {"method", "exact_face"}}},
       {"output_dir", out.string()}},
      {{"command", "distortion"},
       {"parameters", {{"family", {{"values", {{1, 1}, {1, 1}}}}}}},
       {"output_dir", out.string()}},
      {{"command", "cantor-pipeline"}, {"parameters", {{"alphabet", 1}}}, {"output_dir", out.string()}},
      {{"command", "simplex-sep"},
       {"parameters",
        {{"system", {{"model", "periodic"}, {"alphabet", 2}, {"period", 8}}},
         {"resolution", 0.2},
         {"epsilon", 0.3},
         {"horizons", {1}}}},
       {"output_dir", out.string()}},
  };
  for (std::size_t i = 0; i < infeasible.size(); ++i) {
    EXPECT_EQ(run(write_config("inf" + std::to_string(i) + ".json", infeasible[i])), kExitInfeasible)
        << infeasible[i].dump() << last_log_;
    EXPECT_FALSE(fs::exists(out));
  }
  json allowed = infeasible[1];
  allowed["parameters"]["allow_degenerate"] = true;
  EXPECT_EQ(run(write_config("deg.json", allowed)), kExitOk);
  EXPECT_EQ(json::parse(slurp(out / "summary.json"))["degenerate"], true);
}

TEST_F(HarnessTest, RerunsAreByteIdenticalAcrossThreadCounts) {
  const std::vector<json> configs = {
      {{"command", "bound-sweep"},
       {"seed", 7},
       {"parameters",
        {{"kinds", {"random_gaussian", "symmetrized_row"}}, {"k_values", {2, 3}}, {"d_cap", 1.5}, {"n_max", 5}}}},
      {{"command", "lgeom"}, {"seed", 11}, {"parameters", {{"r", 2}, {"n", {2, 4}}, {"trials", 3}, {"inputs", 300}}}},
      {{"command", "distortion"},
       {"seed", 3},
       {"parameters", {{"family", {{"kind", "random_gaussian"}, {"n", 3}, {"k", 3}}}, {"method", "sampled"},
                       {"samples", 5000}}}},
      {{"command", "shatter"}, {"parameters", {{"alphabet", 3}, {"forbidden", {"00", "12"}}, {"n", {3, 6}}}}},
  };
  for (std::size_t i = 0; i < configs.size(); ++i) {
    std::vector<fs::path> outs;
    for (unsigned threads : {1U, 4U, 1U}) {
      set_thread_count(threads);
      json c = configs[i];
      outs.push_back(dir_ / ("run" + std::to_string(i) + "_" + std::to_string(outs.size())));
      c["output_dir"] = outs.back().string();
      ASSERT_EQ(run(write_config("d.json", c)), kExitOk) << last_log_;
    }
    set_thread_count(0);
    for (const char* f : {"results.csv", "summary.json"}) {
      EXPECT_EQ(slurp(outs[0] / f), slurp(outs[1] / f)) << configs[i].dump() << " " << f;
      EXPECT_EQ(slurp(outs[0] / f), slurp(outs[2] / f)) << configs[i].dump() << " " << f;
    }
  }
}

TEST_F(HarnessTest, EnvironmentSeedOverridesConfigSeed) {
  const auto base = json{{"command", "lgeom"}, {"seed", 1}, {"parameters", {{"r", 2}, {"n", 3}, {"inputs", 200}}}};
  auto with = [&](std::uint64_t seed, const std::string& name) {
    json c = base;
    c["seed"] = seed;
    c["output_dir"] = (dir_ / name).string();
    return write_config(name + ".json", c);
  };
  ASSERT_EQ(run(with(1, "a")), kExitOk);
  ASSERT_EQ(run(with(99, "b")), kExitOk);
  ::setenv("ENTROLAB_SEED", "99", 1);
  const int code = run(with(1, "c"));
  ::unsetenv("ENTROLAB_SEED");
  ASSERT_EQ(code, kExitOk);
  EXPECT_EQ(slurp(dir_ / "b" / "summary.json"), slurp(dir_ / "c" / "summary.json"));
  EXPECT_EQ(json::parse(slurp(dir_ / "c" / "manifest.json"))["seed"], 99);
}

TEST_F(HarnessTest, ShatterWritesPatternFiles) {
  const fs::path out = dir_ / "out";
  const auto cfg = write_config("s.json", {{"command", "shatter"},
                                           {"parameters", {{"alphabet", 2}, {"forbidden", {"11"}}, {"n", 4}}},
                                           {"output_dir", out.string()}});
  ASSERT_EQ(run(cfg), kExitOk) << last_log_;
  std::istringstream lines(slurp(out / "patterns_n4.txt"));
  std::string line;
  std::size_t count = 0;
  while (std::getline(lines, line)) {
    EXPECT_EQ(line.size(), 4U);
    EXPECT_EQ(line.find_first_not_of("+-"), std::string::npos);
    ++count;
  }
  EXPECT_EQ(count, 8U);
  const json summary = json::parse(slurp(out / "summary.json"));
  EXPECT_EQ(summary["certificates"][0]["density"], 0.5);
}

TEST(Pipeline, FullShift) {
  const auto s = symdyn::Subshift::build(2, {});
  for (double a : {1.0, 2.0}) {
    CantorOptions opt;
    opt.a = a;
    const auto rep = pipeline_cantor(s, {1, 4, 8, 12, 16}, opt);
    for (const auto& st : rep.steps) {
      EXPECT_EQ(st.shattered.density, 1.0);
      EXPECT_TRUE(st.basis_verified);
      EXPECT_EQ(st.certificate.D, 1.0);
      EXPECT_EQ(st.certificate.bound, 0.5625 / a);
      EXPECT_EQ(st.complex_distortion, 2.0);
      ASSERT_TRUE(st.complex_certificate);
      EXPECT_EQ(st.complex_certificate->bound, 0.25 * 0.25 / a);
    }
    EXPECT_EQ(rep.bundle.bound, 0.5625 / a);
  }
}

TEST(Pipeline, GoldenMeanAgainstExhaustiveOracle) {
  const auto s = symdyn::Subshift::build(2, {symdyn::parse_word("11", 2)});
  const auto rep = pipeline_cantor(s, {4, 8, 12, 16});
  ASSERT_EQ(rep.steps.size(), 4U);
  std::set<symdyn::Symbol> plus;
  const auto f = shatter::indicator_difference(rep.partition);
  for (const auto& w : rep.partition.cells[f.plus_cell]) plus.insert(w[0]);
  for (const auto& st : rep.steps) {
    EXPECT_GE(st.shattered.density, 0.5);
    EXPECT_TRUE(st.basis_verified);
    if (st.n <= 12) EXPECT_EQ(st.shattered.indices.size(), brute_force_shatter(s, plus, st.n)) << st.n;
  }
  EXPECT_EQ(rep.bundle.mu, 0.5);
  EXPECT_EQ(rep.bundle.bound, 0.5 * 0.5625);
}

TEST(Pipeline, ZeroEntropyIsAllZero) {
  const auto one_point = symdyn::Subshift::build(1, {});
  try {
    pipeline_cantor(one_point, {4});
    ADD_FAILURE() << "no error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::AllZero);
  }
  // Zero entropy with more than one point: the orbit of 0^inf 1^inf is not
  // admissible, only the fixed points 0^inf and 1^inf.
  const auto fixed = symdyn::Subshift::build(2, {symdyn::parse_word("01", 2), symdyn::parse_word("10", 2)});
  EXPECT_THROW(pipeline_cantor(fixed, {4}), Error);
}
