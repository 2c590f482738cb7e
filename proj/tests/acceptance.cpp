// Acceptance suite: one PASS/FAIL line per criterion, with the measured
// values and wall time. Exits nonzero when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <numbers>
#include <set>
#include <sstream>
#include <string>
#include <unistd.h>

#include "corpus.hpp"
#include "entrolab/ell1geom.hpp"
#include "entrolab/error.hpp"
#include "entrolab/harness.hpp"
#include "entrolab/matrixbound.hpp"
#include "entrolab/parallel.hpp"
#include "entrolab/shatter.hpp"
#include "entrolab/statespace.hpp"
#include "entrolab/symdyn.hpp"
#include "oracles.hpp"

using namespace entrolab;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail += (detail.empty() ? "" : "; ") + std::string("failed: ") + what;
    }
  }
  void note(const std::string& what) { detail += (detail.empty() ? "" : "; ") + what; }
};

std::string num(double v, int digits = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

int failures = 0;

void criterion(int id, const std::string& title, double budget_seconds, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o.pass = false;
    o.note(std::string("exception: ") + e.what());
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  o.require(secs < budget_seconds, "runtime " + num(secs, 3) + " s over " + num(budget_seconds, 3) + " s");
  if (!o.pass) ++failures;
  std::printf("%s  [%2d] %s (%.2f s): %s\n", o.pass ? "PASS" : "FAIL", id, title.c_str(), secs, o.detail.c_str());
  std::fflush(stdout);
}

double a_fit_from_sweep = std::numeric_limits<double>::quiet_NaN();

Outcome full_shift_entropy() {
  Outcome o;
  for (int d : {2, 3}) {
    const auto s = symdyn::Subshift::build(d, {});
    const double log_d = std::log(static_cast<double>(d));
    const auto block = symdyn::entropy_block_growth(s, 20);
    std::size_t exact = 0;
    for (const auto& smp : block.samples) exact += smp.value == log_d;
    o.require(exact == block.samples.size(), "block growth not exactly log " + std::to_string(d));
    const double spec = symdyn::entropy_spectral(s).extrapolated;
    o.require(std::abs(spec - log_d) <= 1e-10, "spectral off by " + num(std::abs(spec - log_d)));
    o.note("d=" + std::to_string(d) + ": block exact at " + std::to_string(exact) + "/20 n, |spectral-log d|=" +
           num(std::abs(spec - log_d), 3));
  }
  return o;
}

Outcome golden_mean_cross_oracle() {
  Outcome o;
  const auto s = symdyn::Subshift::build(2, {symdyn::parse_word("11", 2)});
  const double block = symdyn::entropy_block_growth(s, 20).extrapolated;
  const double spec = symdyn::entropy_spectral(s).extrapolated;
  const double golden = std::log((1.0 + std::sqrt(5.0)) / 2.0);
  o.require(std::abs(block - spec) <= 1e-2, "block vs spectral gap " + num(std::abs(block - spec)));
  o.require(std::abs(spec - golden) <= 1e-10, "spectral vs log phi gap " + num(std::abs(spec - golden)));
  o.note("block(20)=" + num(block, 10) + " spectral=" + num(spec, 12) + " log phi=" + num(golden, 12));
  return o;
}

Outcome cantor_full_shift() {
  Outcome o;
  const auto s = symdyn::Subshift::build(2, {});
  std::vector<std::size_t> ns(16);
  for (std::size_t i = 0; i < 16; ++i) ns[i] = i + 1;
  harness::CantorOptions opt;
  opt.delta = 0.25;
  opt.a = 1.0;
  const auto rep = harness::pipeline_cantor(s, ns, opt);
  std::size_t good = 0;
  for (const auto& st : rep.steps) {
    const bool ok = st.shattered.density == 1.0 && st.basis_verified && st.certificate.D == 1.0 &&
                    st.certificate.mu == 1.0 && st.certificate.bound == 0.5625;
    good += ok;
    o.require(ok, "n=" + std::to_string(st.n) + " density " + num(st.shattered.density) + " bound " +
                      num(st.certificate.bound, 17));
  }
  o.require(rep.steps.size() == 16, "expected 16 horizons");
  o.note(std::to_string(good) + "/16 horizons with density 1, basis verified, bound 0.5625/a (a=1)");
  return o;
}

Outcome cantor_golden_mean() {
  Outcome o;
  const auto s = symdyn::Subshift::build(2, {symdyn::parse_word("11", 2)});
  const auto rep = harness::pipeline_cantor(s, {2, 4, 6, 8, 10, 12, 14, 16});
  for (const auto& st : rep.steps) {
    o.require(st.shattered.method == shatter::Method::Exact, "non-exhaustive search");
    o.require(st.shattered.density == 0.5, "n=" + std::to_string(st.n) + " density " + num(st.shattered.density));
    o.require(st.basis_verified, "basis check false at n=" + std::to_string(st.n));
  }
  o.note("exact density 0.5 at n=2,4,...,16");

  Rng rng(20240601);
  std::size_t checked = 0, violations = 0;
  for (int t = 0; t < 1000; ++t) {
    const std::size_t n = 1 + rng.below(12);
    const std::uint64_t full = std::uint64_t{1} << n;
    const std::size_t size = 1 + rng.below(full);
    std::vector<std::uint64_t> pats;
    // Partial Fisher-Yates over the cube picks `size` distinct patterns.
    std::vector<std::uint64_t> cube(full);
    for (std::uint64_t x = 0; x < full; ++x) cube[x] = x;
    for (std::size_t i = 0; i < size; ++i) {
      const std::size_t j = i + rng.below(full - i);
      std::swap(cube[i], cube[j]);
      pats.push_back(cube[i]);
    }
    const auto e = shatter::make_pattern_set(n, pats, "random");
    const auto cert = shatter::max_shattered(e, shatter::Method::Exact);
    const std::size_t threshold = shatter::sauer_shelah_threshold(n, e.size());
    // Recount the restrictions here rather than trusting the certificate.
    std::uint64_t mask = 0;
    for (std::size_t i : cert.indices) mask |= std::uint64_t{1} << i;
    std::set<std::uint64_t> restricted;
    for (std::uint64_t x : pats) restricted.insert(x & mask);
    const bool shattered = restricted.size() == (std::uint64_t{1} << cert.indices.size());
    ++checked;
    if (!shattered || cert.indices.size() < threshold) ++violations;
  }
  o.require(violations == 0, std::to_string(violations) + " Sauer-Shelah violations");
  o.note("Sauer-Shelah threshold met on " + std::to_string(checked - violations) + "/" + std::to_string(checked) +
         " random pattern sets");
  return o;
}

Outcome distortion_soundness() {
  using namespace corpus;
  using ell1::DistortionMethod;
  using ell1::Family;
  Outcome o;
  double worst_gap = 0.0;
  std::size_t families = 0;

  // Budget of about 10^6 samples per family: the dense grid over every sign
  // face plus three zoom rounds around the incumbent.
  auto grid_for = [](std::size_t n) -> std::pair<std::size_t, std::size_t> {
    switch (n) {
      case 1: return {1, 0};
      case 2: return {400000, 2000};
      case 3: return {600, 300};
      default: return {80, 40};
    }
  };
  auto check = [&](const Family& fam, const oracle::Norm& norm, const std::string& name) {
    const std::size_t n = ell1::family_size(fam);
    const auto rep = ell1::lower_l1_constant(fam, DistortionMethod::ExactFace, 0, 0);
    const auto [total, zoom] = grid_for(n);
    const auto g = oracle::l1_sphere_grid_min(n, norm, total, zoom ? 3 : 0, zoom);
    const double gap = std::abs(g.value - rep.lambda);
    worst_gap = std::max(worst_gap, gap);
    ++families;
    o.require(gap <= 1e-3, name + " lambda " + num(rep.lambda, 10) + " vs grid " + num(g.value, 10));
    o.require(g.evaluations <= 1'100'000, name + " used " + std::to_string(g.evaluations) + " samples");
    return rep;
  };
  auto fn_norm = [](const FunctionFamily& f) {
    return [&f](const Eigen::VectorXd& c) { return sup_norm_oracle(f.values(), c); };
  };
  auto op_norm = [](const MatrixFamily& f) {
    return [&f](const Eigen::VectorXd& c) { return operator_norm_oracle(f.matrices(), c); };
  };

  for (std::size_t n = 1; n <= 4; ++n) {
    const FunctionFamily f = full_sign_family(n);
    const auto rep = check(f, fn_norm(f), "full sign n=" + std::to_string(n));
    o.require(std::abs(rep.distortion - 1.0) <= 1e-9, "full sign D=" + num(rep.distortion, 12));
  }
  {
    const MatrixFamily pauli({pauli_x(), pauli_z()}, "pauli");
    const auto rep = check(pauli, op_norm(pauli), "pauli pair");
    o.require(std::abs(rep.distortion - std::sqrt(2.0)) <= 1e-6, "Pauli D=" + num(rep.distortion, 12));
    o.note("Pauli D=" + num(rep.distortion, 12));
  }
  {
    Eigen::MatrixXd dup(2, 3);
    dup << 1, -1, 0.5, 1, -1, 0.5;
    const FunctionFamily f(dup, "duplicated");
    const auto rep = check(f, fn_norm(f), "duplicated rows");
    o.require(rep.degenerate, "duplicated rows not degenerate");
  }
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    for (std::size_t n = 2; n <= 4; ++n) {
      const FunctionFamily f = random_function_family(n, 7, 5000 + seed * 10 + n);
      check(f, fn_norm(f), "random function n=" + std::to_string(n));
      const MatrixFamily m = random_matrix_family(n, 3, 6000 + seed * 10 + n);
      check(m, op_norm(m), "random matrix n=" + std::to_string(n));
    }
  }
  o.note(std::to_string(families) + " families, worst |lambda - grid| = " + num(worst_gap, 3));
  return o;
}

Outcome dimension_sweep() {
  using matrixbound::FamilyKind;
  Outcome o;
  matrixbound::SweepConfig cfg;
  cfg.kinds = {FamilyKind::DiagonalSign};
  for (std::size_t k = 2; k <= 64; k *= 2) cfg.k_values.push_back(k);
  cfg.d_cap = 1.0;
  cfg.seed = 6;
  const auto diag = matrixbound::sweep_and_fit(cfg);
  for (const auto& row : diag.rows) {
    const double expect = std::log2(static_cast<double>(row.k));
    o.require(static_cast<double>(row.n_best) == expect,
              "k=" + std::to_string(row.k) + " best n " + std::to_string(row.n_best));
  }
  const double target = 1.0 / std::log(2.0);
  o.require(diag.fit.slope_defined && std::abs(diag.fit.slope - target) <= 0.01,
            "a_fit " + num(diag.fit.slope, 10) + " vs 1/log 2");
  a_fit_from_sweep = diag.fit.slope;
  o.note("diagonal_sign best n = log2 k for k=2..64, a_fit=" + num(diag.fit.slope, 12));

  matrixbound::SweepConfig all = cfg;
  all.kinds = {FamilyKind::DiagonalSign, FamilyKind::SymmetrizedRow, FamilyKind::RandomGaussian};
  all.k_values = {2, 3, 4, 6, 8, 12, 16, 24, 32, 48, 64};
  std::size_t rows = 0, violations = 0;
  for (double d_cap : {1.0, 1.5, 2.0}) {
    all.d_cap = d_cap;
    const auto rep = matrixbound::sweep_and_fit(all);
    for (const auto& row : rep.rows) {
      if (row.n_best == 0) continue;
      ++rows;
      if (!matrixbound::dimension_bound_check({row.n_best, row.k, row.d_measured, a_fit_from_sweep})) {
        ++violations;
        o.require(false, std::string(to_string(row.kind)) + " k=" + std::to_string(row.k) + " n=" +
                             std::to_string(row.n_best) + " D=" + num(row.d_measured));
      }
    }
  }
  o.note(std::to_string(rows - violations) + "/" + std::to_string(rows) +
         " generated families (all kinds, D_cap 1/1.5/2) satisfy n <= a_fit D^2 log k");
  return o;
}

Outcome formula_evaluators() {
  Outcome o;
  const double ht = matrixbound::entropy_lower_bound(1, 1, 0.5, 1).bound;
  o.require(ht == 0.25, "entropy_lower_bound(1,1,0.5,1)=" + num(ht, 17));
  const double rcp = matrixbound::rcp_lower_bound(10, 1, 0, 1).value;
  const double e10 = std::exp(10.0);
  o.require(std::abs(rcp - e10) <= 4 * std::numeric_limits<double>::epsilon() * e10,
            "rcp_lower_bound(10,1,0,1)=" + num(rcp, 17));
  const double cb2 = matrixbound::cb_obstruction_bound(2), cb5 = matrixbound::cb_obstruction_bound(5);
  o.require(cb2 == 1.0, "cb(2)=" + num(cb2, 17));
  o.require(cb5 == 1.25, "cb(5)=" + num(cb5, 17));
  o.note("0.25, e^10 (" + num(std::abs(rcp - e10) / e10, 3) + " rel), 1, 1.25");
  return o;
}

Outcome rcp_sandwich() {
  Outcome o;
  if (std::isnan(a_fit_from_sweep)) {
    o.require(false, "no a_fit from the dimension sweep");
    return o;
  }
  const auto s = symdyn::Subshift::build(2, {});
  const auto u = symdyn::CylinderPartition::symbol_partition(2);
  std::size_t checked = 0;
  double worst = -std::numeric_limits<double>::infinity();
  for (double scale : {1.0, 1.5, 2.0, 10.0}) {
    const double a = a_fit_from_sweep * scale;
    for (std::size_t n = 1; n <= 10; ++n) {
      const double lower = matrixbound::rcp_lower_bound(n, 1.0, 0.5, a).value;
      const double upper = matrixbound::rcp_upper_from_cover(s, u, n).value;
      worst = std::max(worst, std::log(lower) - std::log(upper));
      ++checked;
      o.require(lower <= upper, "n=" + std::to_string(n) + " a=" + num(a) + ": " + num(lower) + " > " + num(upper));
    }
  }
  o.note(std::to_string(checked) + " (a, n) pairs with a >= a_fit; max log(lower/upper) = " + num(worst, 4));
  return o;
}

Outcome state_space_transfer() {
  using namespace statespace;
  Outcome o;
  const auto per = symdyn::periodic_shift_model(2, 8);
  const auto pos = simplex_sep_growth(per, observables_for(per, ObservableSet::Symbol), 0.5, 0.3,
                                      {1, 2, 3, 4, 5, 6, 7, 8});
  std::string counts;
  for (const auto& c : pos.counts) {
    counts += (counts.empty() ? "" : ",") + std::to_string(c.count);
    if (c.n <= 4) o.require(c.exact, "count at n=" + std::to_string(c.n) + " not exact");
  }
  o.require(pos.rate >= 0.3, "positive rate " + num(pos.rate));
  o.note("periodic(2,8) counts " + counts + " rate " + num(pos.rate, 6));

  const auto cz = symdyn::compactified_shift_model(8);
  const auto neg1 = simplex_sep_growth(cz, observables_for(cz, ObservableSet::Coordinate), 0.5, 0.3, {8, 16, 32, 64});
  o.require(neg1.verdict == Verdict::Subexponential && neg1.rate < 0.02,
            "compactified rate " + num(neg1.rate) + " verdict " + std::string(to_string(neg1.verdict)));
  const auto id = symdyn::identity_system({0.0, 0.25, 0.5, 0.75, 1.0});
  const auto neg2 = simplex_sep_growth(id, observables_for(id, ObservableSet::Coordinate), 0.25, 0.3, {8, 16, 32, 64});
  o.require(neg2.verdict == Verdict::Subexponential && neg2.rate < 0.02,
            "identity rate " + num(neg2.rate) + " verdict " + std::string(to_string(neg2.verdict)));
  o.note("compactified(8) rate " + num(neg1.rate) + ", identity rate " + num(neg2.rate));
  return o;
}

Outcome lgeom_contrapositive() {
  Outcome o;
  std::vector<statespace::LgeomReport> details;
  const auto rep = statespace::lgeom_growth(4, {4, 8, 12, 16}, 0.5, 1, 10, 10'000, &details);
  std::string counts;
  std::size_t checked = 0, violations = 0;
  for (const auto& d : details) {
    counts += (counts.empty() ? "" : ",") + std::to_string(d.max_separated) + (d.exact ? "" : "g");
    checked += d.contractivity_checked;
    violations += d.contractivity_violations;
  }
  // The criterion is on the least-squares log-count slope itself, which
  // rate reports clipped at zero.
  o.require(rep.rate < 0.05, "log-count slope " + num(rep.rate) + " >= 0.05");
  o.require(violations == 0 && checked == 40'000,
            std::to_string(violations) + " contractivity violations in " + std::to_string(checked));
  o.note("counts at n=4,8,12,16: " + counts + " (g = greedy), slope " + num(rep.rate, 4) + ", contractive on " +
         std::to_string(checked - violations) + "/" + std::to_string(checked));
  return o;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

Outcome determinism() {
  using nlohmann::json;
  Outcome o;
  const fs::path root = fs::temp_directory_path() / ("entrolab_acceptance_" + std::to_string(::getpid()));
  fs::remove_all(root);
  const std::vector<json> configs = {
      {{"command", "entropy"}, {"parameters", {{"alphabet", 2}, {"forbidden", {"11"}}, {"n_max", 16}}}},
      {{"command", "shatter"}, {"parameters", {{"alphabet", 2}, {"forbidden", {"11"}}, {"n", {4, 8, 12}}}}},
      {{"command", "distortion"},
       {"seed", 17},
       {"parameters",
        {{"family", {{"kind", "random_gaussian"}, {"n", 4}, {"k", 4}}}, {"method", "sampled"}, {"samples", 20000}}}},
      {{"command", "cert"}, {"parameters", {{"kind", "ht"}, {"mu", 0.5}, {"D", 1.2}, {"delta", 0.3}, {"a", 1.4}}}},
      {{"command", "bound-sweep"},
       {"seed", 5},
       {"parameters", {{"kinds", {"random_gaussian", "symmetrized_row"}}, {"kmax", 8}, {"d_cap", 1.5}}}},
      {{"command", "simplex-sep"},
       {"parameters",
        {{"system", {{"model", "periodic"}, {"alphabet", 2}, {"period", 6}}},
         {"resolution", 0.5},
         {"epsilon", 0.3},
         {"horizons", {1, 2, 3, 4, 5, 6}}}}},
      {{"command", "lgeom"}, {"seed", 23}, {"parameters", {{"r", 3}, {"n", {3, 6}}, {"inputs", 3000}, {"trials", 2}}}},
      {{"command", "cantor-pipeline"}, {"parameters", {{"alphabet", 3}, {"forbidden", {"00", "21"}}, {"n", {4, 8}}}}},
  };
  std::size_t identical = 0;
  for (std::size_t i = 0; i < configs.size(); ++i) {
    std::vector<fs::path> dirs;
    for (unsigned threads : {1U, 3U}) {
      set_thread_count(threads);
      harness::ExperimentConfig cfg = harness::parse_config(configs[i]);
      cfg.output_dir = root / (std::to_string(i) + "_" + std::to_string(threads));
      dirs.push_back(cfg.output_dir);
      std::ostringstream out, log;
      const int code = harness::run_experiment(cfg, out, log);
      o.require(code == 0, configs[i]["command"].get<std::string>() + " exited " + std::to_string(code) + ": " +
                               log.str());
    }
    set_thread_count(0);
    bool same = true;
    for (const char* f : {"results.csv", "summary.json"}) {
      const std::string a = slurp(dirs[0] / f), b = slurp(dirs[1] / f);
      same = same && !a.empty() && a == b;
    }
    o.require(same, configs[i]["command"].get<std::string>() + " outputs differ");
    identical += same;
  }
  fs::remove_all(root);
  o.note(std::to_string(identical) + "/" + std::to_string(configs.size()) +
         " commands byte-identical in results.csv and summary.json across reruns with 1 and 3 threads");
  return o;
}

}  // namespace

int main() {
  criterion(1, "full d-shift entropy", 1, full_shift_entropy);
  criterion(2, "golden-mean cross-oracle", 1, golden_mean_cross_oracle);
  criterion(3, "Cantor pipeline on the full 2-shift", 5, cantor_full_shift);
  criterion(4, "Cantor pipeline on the golden mean", 120, cantor_golden_mean);
  criterion(5, "distortion solver soundness", 120, distortion_soundness);
  criterion(6, "dimension-bound sweep", 300, dimension_sweep);
  criterion(7, "formula evaluators", 1, formula_evaluators);
  criterion(8, "rcp sandwich", 10, rcp_sandwich);
  criterion(9, "state-space transfer", 300, state_space_transfer);
  criterion(10, "separated images of trace-class inputs", 300, lgeom_contrapositive);
  criterion(11, "determinism", std::numeric_limits<double>::infinity(), determinism);
  std::printf("%d of 11 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
