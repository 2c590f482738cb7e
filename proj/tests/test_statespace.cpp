#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <set>

#include "entrolab/error.hpp"
#include "entrolab/rng.hpp"
#include "entrolab/statespace.hpp"

using namespace entrolab;
using namespace entrolab::statespace;
using ell1::FunctionFamily;
using cd = std::complex<double>;

namespace {

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::InvalidConfig;
}

SimplexPoint random_point(std::size_t n, Rng& rng) {
  SimplexPoint p;
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    p.weights.push_back(rng.exponential());
    s += p.weights.back();
  }
  for (double& w : p.weights) w /= s;
  return p;
}

// Oracle: every composition of `total` into `parts` parts by brute force.
std::vector<std::vector<std::uint32_t>> compositions(std::size_t parts, std::size_t total) {
  std::vector<std::vector<std::uint32_t>> out;
  std::vector<std::uint32_t> w(parts);
  std::function<void(std::size_t, std::size_t)> rec = [&](std::size_t i, std::size_t left) {
    if (i == parts - 1) {
      w[i] = static_cast<std::uint32_t>(left);
      out.push_back(w);
      return;
    }
    for (std::size_t v = 0; v <= left; ++v) {
      w[i] = static_cast<std::uint32_t>(v);
      rec(i + 1, left - v);
    }
  };
  rec(0, total);
  return out;
}

// Oracle: the maximum separated count on the lattice net, with the Bowen
// weak* distance computed by literally pushing measures forward.
std::size_t brute_force_net_count(const symdyn::FiniteMetricSystem& m, const FunctionFamily& k, std::size_t denom,
                                  std::size_t n, double eps) {
  const auto net = compositions(m.size(), denom);
  const InducedMap t = induced_simplex_map(m);
  std::vector<std::vector<SimplexPoint>> orbits;
  for (const auto& w : net) {
    SimplexPoint p;
    for (auto v : w) p.weights.push_back(static_cast<double>(v) / static_cast<double>(denom));
    std::vector<SimplexPoint> orbit{p};
    for (std::size_t s = 1; s < n; ++s) orbit.push_back(t(orbit.back()));
    orbits.push_back(std::move(orbit));
  }
  const auto rep = packing::max_separated_subset(
      net.size(),
      [&](std::size_t a, std::size_t b) {
        double d = 0.0;
        for (std::size_t s = 0; s < n; ++s) d = std::max(d, weakstar_distance(k, orbits[a][s], orbits[b][s]));
        return d;
      },
      eps, packing::Method::Exact);
  return rep.count;
}

}  // namespace

TEST(InducedMap, Examples) {
  const InducedMap swap({1, 0});
  const SimplexPoint mu{{0.3, 0.7}};
  EXPECT_EQ(swap(mu).weights, (std::vector<double>{0.7, 0.3}));
  const InducedMap id({0, 1, 2});
  const SimplexPoint nu{{0.2, 0.5, 0.3}};
  EXPECT_EQ(id(nu).weights, nu.weights);

  const auto m = symdyn::periodic_shift_model(2, 6);
  SimplexPoint uniform{std::vector<double>(m.size(), 1.0 / static_cast<double>(m.size()))};
  EXPECT_EQ(induced_simplex_map(m)(uniform).weights, uniform.weights);
}

TEST(InducedMap, PreservesMassExactlyOnLattice) {
  Rng rng(4);
  for (int t = 0; t < 200; ++t) {
    const std::size_t n = 1 + rng.below(12);
    std::vector<std::size_t> map(n);
    for (auto& y : map) y = rng.below(n);
    const InducedMap f(map);
    std::vector<std::uint32_t> w(n);
    std::uint64_t total = 0;
    for (auto& v : w) total += v = static_cast<std::uint32_t>(rng.below(50));
    const auto out = f(w);
    std::uint64_t after = 0;
    for (auto v : out) after += v;
    EXPECT_EQ(after, total);
    const SimplexPoint p = random_point(n, rng);
    EXPECT_NO_THROW(f(p).validate());
  }
}

TEST(WeakStar, ExamplesAndMetricAxioms) {
  Eigen::MatrixXd f(1, 2);
  f << 1, -1;
  const FunctionFamily k(f);
  EXPECT_EQ(weakstar_distance(k, {{1, 0}}, {{0, 1}}), 2.0);
  EXPECT_EQ(weakstar_distance(k, {{0.4, 0.6}}, {{0.4, 0.6}}), 0.0);
  EXPECT_EQ(code_of([&] { weakstar_distance(k, {{1, 0, 0}}, {{0, 1, 0}}); }), ErrorCode::DimensionMismatch);

  Rng rng(8);
  Eigen::MatrixXd v(3, 6);
  for (Eigen::Index i = 0; i < v.rows(); ++i)
    for (Eigen::Index j = 0; j < v.cols(); ++j) v(i, j) = rng.normal();
  const FunctionFamily kr(v);
  for (int t = 0; t < 1000; ++t) {
    const auto a = random_point(6, rng), b = random_point(6, rng), c = random_point(6, rng);
    const double ab = weakstar_distance(kr, a, b);
    EXPECT_EQ(ab, weakstar_distance(kr, b, a));
    EXPECT_LE(ab, weakstar_distance(kr, a, c) + weakstar_distance(kr, c, b) + 1e-12);
    EXPECT_EQ(weakstar_distance(kr, a, a), 0.0);
  }
}

TEST(WeakStar, SeparatingCheck) {
  EXPECT_TRUE(separates_points(FunctionFamily(Eigen::MatrixXd::Identity(4, 4))));
  Eigen::MatrixXd f(1, 3);
  f << 0, 1, 2;
  // Distinct values at every point, but (1,0,1)/2 and (0,1,0) agree on f and 1.
  EXPECT_FALSE(separates_points(FunctionFamily(f)));
  EXPECT_EQ(weakstar_distance(FunctionFamily(f), {{0.5, 0, 0.5}}, {{0, 1, 0}}), 0.0);
  Eigen::MatrixXd g(2, 3);
  g << 0, 1, 2, 0, 1, 4;
  EXPECT_TRUE(separates_points(FunctionFamily(g)));
}

TEST(Net, SizeMatchesEnumeration) {
  for (std::size_t parts = 1; parts <= 6; ++parts)
    for (std::size_t total = 0; total <= 6; ++total)
      EXPECT_EQ(lattice_net_size(parts, total), compositions(parts, total).size());
  EXPECT_EQ(lattice_net_size(256, 2), 32896U);
}

TEST(SimplexGrowth, MatchesPushforwardOracle) {
  const auto m = symdyn::periodic_shift_model(2, 4);
  for (auto set : {ObservableSet::Symbol, ObservableSet::Indicators}) {
    const auto k = observables_for(m, set);
    for (double eps : {0.3, 0.6}) {
      const auto rep = simplex_sep_growth(m, k, 0.5, eps, {1, 2, 3, 4});
      for (const auto& c : rep.counts) {
        EXPECT_TRUE(c.exact);
        EXPECT_EQ(c.count, brute_force_net_count(m, k, 2, c.n, eps)) << to_string(set) << " n=" << c.n;
      }
    }
  }
  const auto line = symdyn::compactified_shift_model(2);
  const auto kc = observables_for(line, ObservableSet::Coordinate);
  const auto rep = simplex_sep_growth(line, kc, 0.25, 0.1, {1, 2, 3, 5});
  for (const auto& c : rep.counts) EXPECT_EQ(c.count, brute_force_net_count(line, kc, 4, c.n, 0.1)) << c.n;
}

TEST(SimplexGrowth, FullShiftPeriodicModelGrowsLikeThreeToTheN) {
  const auto m = symdyn::periodic_shift_model(2, 8);
  const auto rep = simplex_sep_growth(m, observables_for(m, ObservableSet::Symbol), 0.5, 0.3, {1, 2, 3, 4, 5, 6, 7, 8});
  ASSERT_EQ(rep.counts.size(), 8U);
  std::size_t expect = 1;
  for (const auto& c : rep.counts) {
    expect *= 3;
    EXPECT_EQ(c.count, expect) << c.n;
    if (c.n <= 4) EXPECT_TRUE(c.exact);
  }
  EXPECT_NEAR(rep.rate, std::log(3.0), 1e-9);
  EXPECT_EQ(rep.verdict, Verdict::Exponential);
}

TEST(SimplexGrowth, ZeroEntropySystemsAreSubexponential) {
  const auto id = symdyn::identity_system({0.0, 0.3, 0.7, 1.0});
  const auto r1 = simplex_sep_growth(id, observables_for(id, ObservableSet::Coordinate), 0.25, 0.2, {1, 2, 4, 8, 16});
  for (const auto& c : r1.counts) EXPECT_EQ(c.count, r1.counts.front().count);
  EXPECT_EQ(r1.verdict, Verdict::Subexponential);
  EXPECT_EQ(r1.effective_horizon, 1U);

  const auto cz = symdyn::compactified_shift_model(8);
  const auto r2 = simplex_sep_growth(cz, observables_for(cz, ObservableSet::Coordinate), 0.5, 0.3, {32, 64, 128, 256});
  EXPECT_EQ(r2.verdict, Verdict::Subexponential);
  EXPECT_LT(r2.rate, 0.02);

  // Permutations have finitely many distinct iterates, so counts freeze.
  const auto per = symdyn::periodic_shift_model(2, 5);
  for (double res : {1.0, 0.5, 0.34}) {
    const auto r3 = simplex_sep_growth(per, observables_for(per, ObservableSet::Symbol), res, 0.3, {16, 32, 64});
    EXPECT_EQ(r3.verdict, Verdict::Subexponential) << res;
  }
}

TEST(SimplexGrowth, MonotoneInHorizonAndEpsilon) {
  const auto cz = symdyn::compactified_shift_model(2);
  const auto k = observables_for(cz, ObservableSet::Coordinate);
  std::vector<std::size_t> prev;
  for (double eps : {0.05, 0.1, 0.2, 0.4}) {
    const auto rep = simplex_sep_growth(cz, k, 0.25, eps, {1, 2, 3, 4, 6});
    std::vector<std::size_t> counts;
    for (std::size_t i = 0; i < rep.counts.size(); ++i) {
      counts.push_back(rep.counts[i].count);
      if (i > 0) EXPECT_GE(rep.counts[i].count, rep.counts[i - 1].count);
      EXPECT_TRUE(rep.counts[i].exact);
    }
    for (std::size_t i = 0; i < prev.size(); ++i) EXPECT_LE(counts[i], prev[i]);
    prev = counts;
  }
}

TEST(SimplexGrowth, NetCap) {
  const auto m = symdyn::periodic_shift_model(2, 8);
  EXPECT_EQ(code_of([&] { simplex_sep_growth(m, observables_for(m, ObservableSet::Symbol), 0.2, 0.3, {1}); }),
            ErrorCode::NetTooLarge);
}

TEST(ObservableMap, Examples) {
  ObservableMap obs{2, {}};
  Eigen::MatrixXcd z(2, 2);
  z << 1, 0, 0, -1;
  obs.observables.push_back(z);
  obs.validate();
  for (double p : {0.0, 0.25, 0.9}) {
    Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(2, 2);
    a(0, 0) = p;
    a(1, 1) = 1 - p;
    EXPECT_NEAR(observable_map(obs, a)(0), 2 * p - 1, 1e-15);
  }
  EXPECT_EQ(observable_map(obs, Eigen::MatrixXcd::Zero(2, 2))(0), 0.0);
  EXPECT_EQ(code_of([&] { observable_map(obs, Eigen::MatrixXcd::Zero(3, 3)); }), ErrorCode::SizeMismatch);
}

TEST(ObservableMap, Contractive) {
  // Oracle for the trace norm: sum of absolute eigenvalues of a Hermitian a.
  Rng rng(21);
  for (int t = 0; t < 1000; ++t) {
    const std::size_t r = 1 + rng.below(6);
    const auto obs = random_observable_map(r, 1 + rng.below(8), rng.next_u64());
    obs.validate();
    Eigen::MatrixXcd g(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(r));
    for (Eigen::Index i = 0; i < g.rows(); ++i)
      for (Eigen::Index j = 0; j < g.cols(); ++j) g(i, j) = cd(rng.normal(), rng.normal());
    const Eigen::MatrixXcd a = (g + g.adjoint()) / 2.0;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(a);
    const double c1 = es.eigenvalues().cwiseAbs().sum();
    EXPECT_NEAR(trace_norm(a), c1, 1e-10 * c1);
    EXPECT_LE(observable_map(obs, a).cwiseAbs().maxCoeff(), c1 * (1 + 1e-12));
  }
}

TEST(Lgeom, ScalarCaseIsIntervalPacking) {
  for (double eps : {0.3, 0.5, 1.5}) {
    const auto rep = lgeom_experiment(1, 1, eps, 3, 5, 500);
    EXPECT_LE(rep.max_separated, static_cast<std::size_t>(std::floor(2.0 / eps)) + 1);
    EXPECT_EQ(rep.contractivity_violations, 0U);
  }
}

TEST(Lgeom, DeterministicAndCapped) {
  const auto a = lgeom_experiment(2, 4, 0.5, 2, 3, 500);
  const auto b = lgeom_experiment(2, 4, 0.5, 2, 3, 500);
  EXPECT_EQ(a.per_trial, b.per_trial);
  EXPECT_EQ(a.max_separated, b.max_separated);
  EXPECT_EQ(a.contractivity_checked, 1000U);
  EXPECT_EQ(a.contractivity_violations, 0U);
  EXPECT_LE(a.max_contraction_ratio, 1.0 + 1e-12);
  EXPECT_EQ(code_of([] { lgeom_experiment(65, 2, 0.5, 1, 0, 10); }), ErrorCode::CapExceeded);
  EXPECT_EQ(code_of([] { lgeom_experiment(2, 25, 0.5, 1, 0, 10); }), ErrorCode::CapExceeded);
}

TEST(Packing, SeparatedSubsetExamples) {
  const std::vector<Eigen::VectorXd> line = {Eigen::VectorXd::Constant(1, 0.0), Eigen::VectorXd::Constant(1, 0.5),
                                             Eigen::VectorXd::Constant(1, 1.0)};
  EXPECT_EQ(max_separated_subset(line, 0.6, packing::Method::Exact).count, 2U);
  EXPECT_EQ(max_separated_subset(line, 5.0, packing::Method::Exact).count, 1U);
  EXPECT_EQ(max_separated_subset(line, 5.0, packing::Method::Greedy).count, 1U);
}

TEST(Packing, GreedyNeverBeatsBruteForce) {
  Rng rng(12);
  for (int t = 0; t < 500; ++t) {
    const std::size_t n = 1 + rng.below(20);
    std::vector<Eigen::VectorXd> pts;
    for (std::size_t i = 0; i < n; ++i) pts.push_back(Eigen::Vector2d(rng.uniform(), rng.uniform()));
    const double eps = 0.1 + 0.4 * rng.uniform();
    std::size_t best = 0;
    for (std::uint32_t mask = 1; mask < (1U << n); ++mask) {
      const auto size = static_cast<std::size_t>(std::popcount(mask));
      if (size <= best) continue;
      bool ok = true;
      for (std::size_t a = 0; a < n && ok; ++a)
        for (std::size_t b = a + 1; b < n && ok; ++b)
          if ((mask >> a & 1U) && (mask >> b & 1U) && (pts[a] - pts[b]).cwiseAbs().maxCoeff() <= eps) ok = false;
      if (ok) best = size;
    }
    const auto exact = max_separated_subset(pts, eps, packing::Method::Exact).count;
    EXPECT_EQ(exact, best);
    EXPECT_LE(max_separated_subset(pts, eps, packing::Method::Greedy).count, exact);
  }
}
