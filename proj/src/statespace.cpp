#include "entrolab/statespace.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <numeric>

#include "entrolab/error.hpp"
#include "entrolab/parallel.hpp"

namespace entrolab::statespace {

namespace {

constexpr double kMassTolerance = 1e-12;
constexpr std::size_t kFeatureTableCap = 25'000'000;

double log_slope(const std::vector<GrowthCount>& counts) {
  if (counts.size() < 2) return 0.0;
  double mx = 0.0, my = 0.0;
  for (const auto& c : counts) {
    mx += static_cast<double>(c.n);
    my += std::log(static_cast<double>(c.count));
  }
  const double m = static_cast<double>(counts.size());
  mx /= m;
  my /= m;
  double sxx = 0.0, sxy = 0.0;
  for (const auto& c : counts) {
    const double dx = static_cast<double>(c.n) - mx;
    sxx += dx * dx;
    sxy += dx * (std::log(static_cast<double>(c.count)) - my);
  }
  return sxx > 0.0 ? sxy / sxx : 0.0;
}

void finish_rate(GrowthReport& rep) {
  rep.rate = std::max(0.0, log_slope(rep.counts));
  rep.verdict = classify_rate(rep.rate, rep.counts.size());
}

/// All compositions of `total` into `parts` parts, lexicographic, flattened.
std::vector<std::uint32_t> lattice_net(std::size_t parts, std::size_t total) {
  std::vector<std::uint32_t> flat;
  std::vector<std::uint32_t> w(parts, 0);
  std::function<void(std::size_t, std::size_t)> rec = [&](std::size_t i, std::size_t left) {
    if (i + 1 == parts) {
      w[i] = static_cast<std::uint32_t>(left);
      flat.insert(flat.end(), w.begin(), w.end());
      return;
    }
    for (std::size_t v = 0; v <= left; ++v) {
      w[i] = static_cast<std::uint32_t>(v);
      rec(i + 1, left - v);
    }
  };
  rec(0, total);
  return flat;
}

double sup_distance(const double* a, const double* b, std::size_t dims) {
  double d = 0.0;
  for (std::size_t i = 0; i < dims; ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

/// First-fit epsilon-separated selection over `order`, after `seed` members.
std::vector<std::size_t> greedy_separated(const std::vector<double>& feat, std::size_t dims,
                                          const std::vector<std::size_t>& order, const std::vector<std::size_t>& seed,
                                          double epsilon) {
  std::vector<std::size_t> chosen = seed;
  std::vector<std::size_t> seeded = seed;
  std::sort(seeded.begin(), seeded.end());
  for (std::size_t p : order) {
    if (std::binary_search(seeded.begin(), seeded.end(), p)) continue;
    bool ok = true;
    const double* fp = feat.data() + p * dims;
    for (std::size_t q : chosen) {
      if (sup_distance(fp, feat.data() + q * dims, dims) <= epsilon) {
        ok = false;
        break;
      }
    }
    if (ok) chosen.push_back(p);
  }
  std::sort(chosen.begin(), chosen.end());
  return chosen;
}

}  // namespace

void SimplexPoint::validate() const {
  if (weights.empty()) throw Error(ErrorCode::OutOfRange, "simplex point needs weights");
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw Error(ErrorCode::OutOfRange, "weights must be nonnegative");
    total += w;
  }
  if (subnormalized ? total > 1.0 + kMassTolerance : std::abs(total - 1.0) > kMassTolerance)
    throw Error(ErrorCode::OutOfRange, "weights must sum to 1");
}

InducedMap::InducedMap(std::vector<std::size_t> map) : map_(std::move(map)) {
  for (std::size_t y : map_)
    if (y >= map_.size()) throw Error(ErrorCode::OutOfRange, "map leaves the point set");
}

SimplexPoint InducedMap::operator()(const SimplexPoint& mu) const {
  if (mu.weights.size() != map_.size()) throw Error(ErrorCode::DimensionMismatch, "measure size differs from system");
  SimplexPoint out{std::vector<double>(map_.size(), 0.0), mu.subnormalized};
  for (std::size_t x = 0; x < map_.size(); ++x) out.weights[map_[x]] += mu.weights[x];
  return out;
}

std::vector<std::uint32_t> InducedMap::operator()(const std::vector<std::uint32_t>& weights) const {
  if (weights.size() != map_.size()) throw Error(ErrorCode::DimensionMismatch, "measure size differs from system");
  std::vector<std::uint32_t> out(map_.size(), 0);
  for (std::size_t x = 0; x < map_.size(); ++x) out[map_[x]] += weights[x];
  return out;
}

InducedMap induced_simplex_map(const symdyn::FiniteMetricSystem& m) { return InducedMap(m.mapping()); }

bool separates_points(const ell1::FunctionFamily& k) {
  Eigen::MatrixXd a(k.values().rows() + 1, k.values().cols());
  a.topRows(k.values().rows()) = k.values();
  a.bottomRows(1).setOnes();
  Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
  lu.setThreshold(1e-10);
  return static_cast<std::size_t>(lu.rank()) == k.point_count();
}

double weakstar_distance(const ell1::FunctionFamily& k, const SimplexPoint& mu, const SimplexPoint& nu) {
  if (mu.weights.size() != k.point_count() || nu.weights.size() != k.point_count())
    throw Error(ErrorCode::DimensionMismatch, "measures and K live on different point sets");
  const Eigen::Map<const Eigen::VectorXd> a(mu.weights.data(), static_cast<Eigen::Index>(mu.weights.size()));
  const Eigen::Map<const Eigen::VectorXd> b(nu.weights.data(), static_cast<Eigen::Index>(nu.weights.size()));
  return (k.values() * (a - b)).cwiseAbs().maxCoeff();
}

std::string_view to_string(ObservableSet s) {
  switch (s) {
    case ObservableSet::Symbol: return "symbol";
    case ObservableSet::Coordinate: return "coordinate";
    case ObservableSet::Indicators: return "indicators";
  }
  return "?";
}

ObservableSet observable_set_from_string(std::string_view name) {
  if (name == "symbol") return ObservableSet::Symbol;
  if (name == "coordinate") return ObservableSet::Coordinate;
  if (name == "indicators") return ObservableSet::Indicators;
  throw Error(ErrorCode::InvalidConfig, "unknown observable set '" + std::string(name) + "'");
}

ell1::FunctionFamily observables_for(const symdyn::FiniteMetricSystem& m, ObservableSet set) {
  const auto x = static_cast<Eigen::Index>(m.size());
  switch (set) {
    case ObservableSet::Indicators:
      return ell1::FunctionFamily(Eigen::MatrixXd::Identity(x, x), "indicators");
    case ObservableSet::Coordinate: {
      Eigen::MatrixXd v(1, x);
      for (Eigen::Index i = 0; i < x; ++i) v(0, i) = m.distance(static_cast<std::size_t>(i), 0);
      if (x == 1) v(0, 0) = 1.0;
      return ell1::FunctionFamily(v, "coordinate");
    }
    case ObservableSet::Symbol: {
      std::vector<std::uint8_t> first(static_cast<std::size_t>(x));
      std::uint8_t top = 0;
      for (Eigen::Index i = 0; i < x; ++i) {
        const symdyn::Word w = symdyn::parse_word(m.label(static_cast<std::size_t>(i)), 36);
        if (w.empty()) throw Error(ErrorCode::BadWord, "symbol observables need word labels");
        first[static_cast<std::size_t>(i)] = w[0];
        top = std::max(top, w[0]);
      }
      if (top == 0) throw Error(ErrorCode::BadFamily, "every point starts with symbol 0");
      Eigen::MatrixXd v(top, x);
      for (std::uint8_t s = 1; s <= top; ++s)
        for (Eigen::Index i = 0; i < x; ++i) v(s - 1, i) = first[static_cast<std::size_t>(i)] == s ? 1.0 : -1.0;
      return ell1::FunctionFamily(v, "symbol");
    }
  }
  throw Error(ErrorCode::InvalidConfig, "unknown observable set");
}

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::Subexponential: return "subexponential";
    case Verdict::Exponential: return "exponential";
    case Verdict::Inconclusive: return "inconclusive";
  }
  return "?";
}

Verdict classify_rate(double rate, std::size_t horizons) {
  if (horizons < 2) return Verdict::Inconclusive;
  if (rate < kSubexponentialRate) return Verdict::Subexponential;
  if (rate > kExponentialRate) return Verdict::Exponential;
  return Verdict::Inconclusive;
}

std::size_t lattice_net_size(std::size_t parts, std::size_t total) {
  // C(total + parts - 1, parts - 1), multiplicatively with exact divisions.
  const std::size_t r = std::min(parts - 1, total);
  const std::size_t top = total + parts - 1;
  unsigned __int128 c = 1;
  for (std::size_t i = 1; i <= r; ++i) {
    c = c * (top - r + i) / i;
    if (c > std::numeric_limits<std::size_t>::max()) return std::numeric_limits<std::size_t>::max();
  }
  return static_cast<std::size_t>(c);
}

GrowthReport simplex_sep_growth(const symdyn::FiniteMetricSystem& m, const ell1::FunctionFamily& k,
                                double net_resolution, double epsilon, std::vector<std::size_t> horizons,
                                std::size_t net_cap, std::size_t exact_cap) {
  const std::size_t x = m.size();
  if (k.point_count() != x) throw Error(ErrorCode::DimensionMismatch, "K is defined on a different point set");
  if (!(net_resolution > 0.0) || net_resolution > 1.0) throw Error(ErrorCode::OutOfRange, "net resolution must lie in (0, 1]");
  if (!(epsilon > 0.0)) throw Error(ErrorCode::OutOfRange, "epsilon must be positive");
  if (horizons.empty()) throw Error(ErrorCode::OutOfRange, "need at least one horizon");
  std::sort(horizons.begin(), horizons.end());
  horizons.erase(std::unique(horizons.begin(), horizons.end()), horizons.end());
  if (horizons.front() == 0) throw Error(ErrorCode::OutOfRange, "horizons start at 1");

  GrowthReport rep;
  rep.epsilon = epsilon;
  rep.separating = separates_points(k);
  const auto denom = static_cast<std::size_t>(std::ceil(1.0 / net_resolution - 1e-12));
  rep.net_denominator = denom;
  const std::size_t net_size = lattice_net_size(x, denom);
  if (net_size > net_cap)
    throw Error(ErrorCode::NetTooLarge, "simplex net has " + std::to_string(net_size) + " points, cap " + std::to_string(net_cap));
  rep.net_points = net_size;
  const std::vector<std::uint32_t> net = lattice_net(x, denom);

  // The Bowen weak* metric over horizon n is the sup over the functions
  // f o T^t (f in K, t < n) of |mu(g) - nu(g)|, since (T_*^t mu)(f) =
  // mu(f o T^t). Functions are kept up to additive constants and sign,
  // which do not change that sup on probability measures. Once a step adds
  // no new function, no later step does.
  const std::size_t max_h = horizons.back();
  std::vector<std::vector<double>> functions;
  std::map<std::vector<double>, std::size_t> seen;
  std::vector<std::size_t> functions_at;  // functions_at[t] = |G_{t+1}|
  std::vector<std::size_t> power(x);
  std::iota(power.begin(), power.end(), std::size_t{0});
  rep.effective_horizon = max_h;
  for (std::size_t t = 0; t < max_h; ++t) {
    bool added = false;
    for (Eigen::Index f = 0; f < k.values().rows(); ++f) {
      std::vector<double> g(x);
      for (std::size_t p = 0; p < x; ++p) g[p] = k.values()(f, static_cast<Eigen::Index>(power[p]));
      const double base = g[0];
      for (double& v : g) v = (v - base) + 0.0;
      const auto lead = std::find_if(g.begin(), g.end(), [](double v) { return v != 0.0; });
      if (lead == g.end()) continue;
      if (*lead < 0.0)
        for (double& v : g) v = -v + 0.0;
      if (seen.emplace(g, functions.size()).second) {
        functions.push_back(std::move(g));
        added = true;
      }
    }
    if (!added && t > 0) {
      rep.effective_horizon = t;
      break;
    }
    functions_at.push_back(functions.size());
    for (std::size_t p = 0; p < x; ++p) power[p] = m.map(power[p]);
  }
  const std::size_t dims_max = std::max<std::size_t>(functions.size(), 1);
  if (net_size * dims_max > kFeatureTableCap)
    throw Error(ErrorCode::NetTooLarge, "feature table of " + std::to_string(net_size) + " x " +
                                            std::to_string(dims_max) + " exceeds " + std::to_string(kFeatureTableCap));

  std::vector<std::size_t> previous;
  std::size_t previous_steps = 0;
  for (std::size_t h : horizons) {
    const std::size_t steps = std::min(h, rep.effective_horizon);
    if (steps == previous_steps) {
      GrowthCount same = rep.counts.back();
      same.n = h;
      rep.counts.push_back(same);
      continue;
    }
    previous_steps = steps;
    const std::size_t dims = std::max<std::size_t>(functions_at.empty() ? 0 : functions_at[steps - 1], 1);
    std::vector<double> feat(net_size * dims, 0.0);
    parallel_for(net_size, [&](std::size_t p) {
      const std::uint32_t* w = net.data() + p * x;
      for (std::size_t d = 0; d < dims && d < functions.size(); ++d) {
        double s = 0.0;
        for (std::size_t q = 0; q < x; ++q) s += static_cast<double>(w[q]) * functions[d][q];
        feat[p * dims + d] = s / static_cast<double>(denom);
      }
    });
    // One representative (smallest net index) per distinct feature vector.
    std::vector<std::size_t> order(net_size);
    std::iota(order.begin(), order.end(), std::size_t{0});
    auto less = [&](std::size_t a, std::size_t b) {
      const double* fa = feat.data() + a * dims;
      const double* fb = feat.data() + b * dims;
      for (std::size_t d = 0; d < dims; ++d)
        if (fa[d] != fb[d]) return fa[d] < fb[d];
      return a < b;
    };
    std::sort(order.begin(), order.end(), less);
    std::vector<std::size_t> reps;
    for (std::size_t i = 0; i < order.size(); ++i) {
      if (i > 0 && std::equal(feat.data() + order[i] * dims, feat.data() + order[i] * dims + dims,
                              feat.data() + order[i - 1] * dims))
        continue;
      reps.push_back(order[i]);
    }
    std::sort(reps.begin(), reps.end());

    GrowthCount gc;
    gc.n = h;
    std::vector<std::size_t> chosen;
    if (reps.size() <= exact_cap) {
      packing::BitGraph g(reps.size());
      for (std::size_t i = 0; i < reps.size(); ++i)
        for (std::size_t j = i + 1; j < reps.size(); ++j)
          if (sup_distance(feat.data() + reps[i] * dims, feat.data() + reps[j] * dims, dims) > epsilon) g.add_edge(i, j);
      try {
        for (std::size_t v : packing::max_clique(g)) chosen.push_back(reps[v]);
        std::sort(chosen.begin(), chosen.end());
        gc.exact = true;
      } catch (const Error& e) {
        if (e.code() != ErrorCode::Intractable) throw;
        chosen.clear();
      }
    }
    if (!gc.exact) chosen = greedy_separated(feat, dims, reps, previous, epsilon);
    gc.count = chosen.size();
    previous = std::move(chosen);
    rep.counts.push_back(gc);
  }
  finish_rate(rep);
  return rep;
}

void ObservableMap::validate() const {
  if (r == 0 || observables.empty()) throw Error(ErrorCode::BadFamily, "observable map needs r >= 1 and n >= 1");
  for (const auto& b : observables) {
    if (static_cast<std::size_t>(b.rows()) != r || static_cast<std::size_t>(b.cols()) != r)
      throw Error(ErrorCode::SizeMismatch, "observable has the wrong size");
    if ((b - b.adjoint()).cwiseAbs().maxCoeff() > 1e-12) throw Error(ErrorCode::BadFamily, "observable is not self-adjoint");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(b, Eigen::EigenvaluesOnly);
    const double norm = std::max(std::abs(es.eigenvalues()(0)), std::abs(es.eigenvalues()(b.rows() - 1)));
    if (norm > 1.0 + 1e-9) throw Error(ErrorCode::BadFamily, "observable has operator norm above 1");
  }
}

ObservableMap random_observable_map(std::size_t r, std::size_t n, std::uint64_t seed) {
  ObservableMap obs;
  obs.r = r;
  const auto ri = static_cast<Eigen::Index>(r);
  for (std::size_t i = 0; i < n; ++i) {
    Rng rng(derive_seed(seed, {r, i}));
    Eigen::MatrixXcd g(ri, ri);
    for (Eigen::Index a = 0; a < ri; ++a)
      for (Eigen::Index b = 0; b < ri; ++b) {
        const double re = rng.normal();
        g(a, b) = {re, rng.normal()};
      }
    Eigen::MatrixXcd h = (g + g.adjoint()) / 2.0;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h, Eigen::EigenvaluesOnly);
    h /= std::max(std::abs(es.eigenvalues()(0)), std::abs(es.eigenvalues()(ri - 1)));
    obs.observables.push_back((h + h.adjoint()) / 2.0);
  }
  return obs;
}

Eigen::VectorXd observable_map(const ObservableMap& obs, const Eigen::MatrixXcd& a) {
  if (static_cast<std::size_t>(a.rows()) != obs.r || static_cast<std::size_t>(a.cols()) != obs.r)
    throw Error(ErrorCode::SizeMismatch, "input must be r x r");
  if ((a - a.adjoint()).cwiseAbs().maxCoeff() > 1e-12) throw Error(ErrorCode::BadFamily, "input is not self-adjoint");
  Eigen::VectorXd out(static_cast<Eigen::Index>(obs.dimension()));
  for (std::size_t i = 0; i < obs.dimension(); ++i)
    out(static_cast<Eigen::Index>(i)) = (a * obs.observables[i]).trace().real();
  return out;
}

double trace_norm(const Eigen::MatrixXcd& a) { return Eigen::JacobiSVD<Eigen::MatrixXcd>(a).singularValues().sum(); }

Eigen::MatrixXcd random_unit_trace_input(std::size_t r, Rng& rng) {
  const auto ri = static_cast<Eigen::Index>(r);
  Eigen::MatrixXcd g(ri, ri);
  for (Eigen::Index a = 0; a < ri; ++a)
    for (Eigen::Index b = 0; b < ri; ++b) {
      const double re = rng.normal();
      g(a, b) = {re, rng.normal()};
    }
  Eigen::MatrixXcd h = (g + g.adjoint()) / 2.0;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h, Eigen::EigenvaluesOnly);
  h /= es.eigenvalues().cwiseAbs().sum();
  return (h + h.adjoint()) / 2.0;
}

LgeomReport lgeom_experiment(std::size_t r, std::size_t n, double epsilon, std::size_t trials, std::uint64_t seed,
                             std::size_t inputs, std::vector<double> lambda_grid) {
  if (r > kMaxLgeomSize || n > kMaxLgeomDimension)
    throw Error(ErrorCode::CapExceeded, "lgeom caps are r <= 64 and n <= 24");
  if (r == 0 || n == 0 || trials == 0 || inputs == 0)
    throw Error(ErrorCode::OutOfRange, "r, n, trials and inputs must be positive");
  if (!(epsilon > 0.0)) throw Error(ErrorCode::OutOfRange, "epsilon must be positive");
  if (lambda_grid.empty()) lambda_grid = {0.05, 0.1, 0.2, 0.3, 0.5};

  struct Trial {
    packing::SeparationReport sep;
    std::size_t violations = 0;
    double max_ratio = 0.0;
  };
  std::vector<Trial> out(trials);
  parallel_for(trials, [&](std::size_t t) {
    const ObservableMap obs = random_observable_map(r, n, derive_seed(seed, {t}));
    Rng rng(derive_seed(seed, {t, 0x1A9}));
    std::vector<Eigen::VectorXd> images;
    images.reserve(inputs);
    for (std::size_t i = 0; i < inputs; ++i) {
      const Eigen::MatrixXcd a = random_unit_trace_input(r, rng);
      Eigen::VectorXd img = observable_map(obs, a);
      const double ratio = img.cwiseAbs().maxCoeff() / trace_norm(a);
      out[t].max_ratio = std::max(out[t].max_ratio, ratio);
      if (ratio > 1.0 + 1e-12) ++out[t].violations;
      images.push_back(std::move(img));
    }
    if (images.size() <= packing::kDefaultExactCap) {
      try {
        out[t].sep = max_separated_subset(images, epsilon, packing::Method::Exact);
        return;
      } catch (const Error& e) {
        if (e.code() != ErrorCode::Intractable) throw;
      }
    }
    out[t].sep = max_separated_subset(images, epsilon, packing::Method::Greedy);
  });

  LgeomReport rep;
  rep.r = r;
  rep.n = n;
  rep.epsilon = epsilon;
  rep.trials = trials;
  rep.inputs = inputs;
  for (const Trial& t : out) {
    rep.per_trial.push_back(t.sep.count);
    if (t.sep.count > rep.max_separated || (t.sep.count == rep.max_separated && t.sep.exact && !rep.exact)) {
      rep.max_separated = t.sep.count;
      rep.exact = t.sep.exact;
    }
    rep.contractivity_checked += inputs;
    rep.contractivity_violations += t.violations;
    rep.max_contraction_ratio = std::max(rep.max_contraction_ratio, t.max_ratio);
  }
  for (double lambda : lambda_grid) {
    const double target = std::exp(lambda * static_cast<double>(n));
    rep.thresholds.push_back({lambda, target, static_cast<double>(rep.max_separated) >= target});
  }
  return rep;
}

GrowthReport lgeom_growth(std::size_t r, const std::vector<std::size_t>& ns, double epsilon, std::size_t trials,
                          std::uint64_t seed, std::size_t inputs, std::vector<LgeomReport>* details) {
  std::vector<std::size_t> sorted = ns;
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  GrowthReport rep;
  rep.epsilon = epsilon;
  for (std::size_t n : sorted) {
    LgeomReport lr = lgeom_experiment(r, n, epsilon, trials, seed, inputs);
    rep.counts.push_back({n, lr.max_separated, lr.exact});
    if (details) details->push_back(std::move(lr));
  }
  finish_rate(rep);
  return rep;
}

packing::SeparationReport max_separated_subset(const std::vector<Eigen::VectorXd>& points, double epsilon,
                                               packing::Method method, std::size_t cap) {
  return packing::max_separated_subset(
      points.size(), [&](std::size_t a, std::size_t b) { return (points[a] - points[b]).cwiseAbs().maxCoeff(); },
      epsilon, method, cap);
}

}  // namespace entrolab::statespace
