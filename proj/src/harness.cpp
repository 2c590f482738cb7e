#include "entrolab/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <limits>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>

#include "entrolab/ell1geom.hpp"
#include "entrolab/error.hpp"
#include "entrolab/packing.hpp"
#include "entrolab/parallel.hpp"
#include "entrolab/statespace.hpp"

namespace entrolab::harness {

using nlohmann::json;

namespace {

[[noreturn]] void invalid(const std::string& what) { throw Error(ErrorCode::InvalidConfig, what); }

bool nonnegative_integer(const json& v) {
  return v.is_number_unsigned() || (v.is_number_integer() && v.get<std::int64_t>() >= 0);
}

// Typed access to one JSON object. Every key read is remembered, and
// finish() rejects the rest.
class Params {
 public:
  Params(const json& j, std::string scope) : j_(j), scope_(std::move(scope)) {
    if (!j_.is_object()) invalid(scope_ + " must be an object");
  }

  bool has(const std::string& key) {
    used_.insert(key);
    return j_.contains(key);
  }

  const json& raw(const std::string& key) {
    if (!has(key)) invalid(where(key) + " is required");
    return j_.at(key);
  }

  std::size_t size(const std::string& key, std::optional<std::size_t> fallback = std::nullopt) {
    const json* v = find(key, fallback.has_value());
    if (!v) return *fallback;
    return as_size(*v, key);
  }

  std::uint64_t u64(const std::string& key) {
    const json& v = raw(key);
    if (!nonnegative_integer(v)) invalid(where(key) + " must be a nonnegative integer");
    return v.get<std::uint64_t>();
  }

  double number(const std::string& key, std::optional<double> fallback = std::nullopt) {
    const json* v = find(key, fallback.has_value());
    if (!v) return *fallback;
    if (!v->is_number()) invalid(where(key) + " must be a number");
    return v->get<double>();
  }

  std::string text(const std::string& key, std::optional<std::string> fallback = std::nullopt) {
    const json* v = find(key, fallback.has_value());
    if (!v) return *fallback;
    if (!v->is_string()) invalid(where(key) + " must be a string");
    return v->get<std::string>();
  }

  bool flag(const std::string& key, bool fallback) {
    const json* v = find(key, true);
    if (!v) return fallback;
    if (!v->is_boolean()) invalid(where(key) + " must be true or false");
    return v->get<bool>();
  }

  /// A list of integers; a single integer counts as a one-element list.
  std::vector<std::size_t> sizes(const std::string& key, std::optional<std::vector<std::size_t>> fallback = std::nullopt) {
    const json* v = find(key, fallback.has_value());
    if (!v) return *fallback;
    std::vector<std::size_t> out;
    if (!v->is_array()) return {as_size(*v, key)};
    for (const json& e : *v) out.push_back(as_size(e, key));
    if (out.empty()) invalid(where(key) + " must not be empty");
    return out;
  }

  std::vector<double> numbers(const std::string& key) {
    const json& v = raw(key);
    if (!v.is_array()) invalid(where(key) + " must be a list of numbers");
    std::vector<double> out;
    for (const json& e : v) {
      if (!e.is_number()) invalid(where(key) + " must be a list of numbers");
      out.push_back(e.get<double>());
    }
    return out;
  }

  std::vector<std::string> texts(const std::string& key, std::optional<std::vector<std::string>> fallback = std::nullopt) {
    const json* v = find(key, fallback.has_value());
    if (!v) return *fallback;
    if (!v->is_array()) invalid(where(key) + " must be a list of strings");
    std::vector<std::string> out;
    for (const json& e : *v) {
      if (!e.is_string()) invalid(where(key) + " must be a list of strings");
      out.push_back(e.get<std::string>());
    }
    return out;
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!used_.count(it.key())) invalid("unknown key '" + it.key() + "' in " + scope_);
  }

 private:
  const json* find(const std::string& key, bool optional) {
    used_.insert(key);
    if (!j_.contains(key)) {
      if (!optional) invalid(where(key) + " is required");
      return nullptr;
    }
    return &j_.at(key);
  }

  std::size_t as_size(const json& v, const std::string& key) const {
    if (!nonnegative_integer(v)) invalid(where(key) + " must be a nonnegative integer");
    return v.get<std::size_t>();
  }

  std::string where(const std::string& key) const { return scope_ + "." + key; }

  const json& j_;
  std::string scope_;
  std::set<std::string> used_;
};

const std::set<std::string>& known_caps() {
  static const std::set<std::string> caps = {"distortion_exact_cap", "shatter_exact_cap", "separation_exact_cap",
                                             "net_cap", "simplex_exact_cap"};
  return caps;
}

std::size_t cap(const ExperimentConfig& cfg, const std::string& key, std::size_t fallback) {
  if (!cfg.caps.contains(key)) return fallback;
  const json& v = cfg.caps.at(key);
  if (!nonnegative_integer(v) || v.get<std::size_t>() == 0) invalid("caps." + key + " must be a positive integer");
  return v.get<std::size_t>();
}

std::uint64_t require_seed(const ExperimentConfig& cfg) {
  if (!cfg.seed) invalid(std::string(to_string(cfg.command)) + " is stochastic and needs a seed");
  return *cfg.seed;
}

int checked_int(std::size_t v, const std::string& what) {
  if (v > 1'000'000) invalid(what + " is too large");
  return static_cast<int>(v);
}

symdyn::Subshift parse_subshift(Params& p) {
  const int d = checked_int(p.size("alphabet"), "alphabet");
  std::vector<symdyn::Word> words;
  for (const std::string& w : p.texts("forbidden", std::vector<std::string>{}))
    words.push_back(symdyn::parse_word(w, d));
  return symdyn::Subshift::build(d, std::move(words));
}

symdyn::FiniteMetricSystem parse_system(const json& j) {
  Params p(j, "parameters.system");
  const std::string model = p.text("model");
  std::optional<symdyn::FiniteMetricSystem> m;
  if (model == "periodic") {
    const int d = checked_int(p.size("alphabet"), "alphabet");
    const int period = checked_int(p.size("period"), "period");
    p.finish();
    m = symdyn::periodic_shift_model(d, period);
  } else if (model == "compactified") {
    const int half = checked_int(p.size("m"), "m");
    p.finish();
    m = symdyn::compactified_shift_model(half);
  } else if (model == "identity") {
    auto positions = p.numbers("positions");
    p.finish();
    m = symdyn::identity_system(std::move(positions));
  } else if (model == "matrix") {
    auto distances = p.numbers("distances");
    auto map = p.sizes("map");
    std::vector<std::string> labels = p.texts("labels", std::vector<std::string>{});
    p.finish();
    if (labels.empty())
      for (std::size_t i = 0; i < map.size(); ++i) labels.push_back(std::to_string(i));
    m = symdyn::FiniteMetricSystem::from_matrix(std::move(labels), std::move(distances), std::move(map));
  } else {
    invalid("unknown system model '" + model + "' (periodic, compactified, identity, matrix)");
  }
  m->validate();
  return std::move(*m);
}

packing::Method parse_packing(const std::string& name) {
  if (name == "exact") return packing::Method::Exact;
  if (name == "greedy") return packing::Method::Greedy;
  invalid("unknown packing method '" + name + "' (exact, greedy)");
}

shatter::Method parse_shatter_method(const std::string& name) {
  if (name == "exact") return shatter::Method::Exact;
  if (name == "greedy") return shatter::Method::Greedy;
  invalid("unknown shatter method '" + name + "' (exact, greedy)");
}

// "symbol", "trivial", or an integer k for the coarsening {k} | rest.
std::optional<symdyn::CylinderPartition> parse_partition(const json& v, int alphabet, bool allow_auto) {
  if (nonnegative_integer(v)) {
    const std::size_t k = v.get<std::size_t>();
    if (k >= static_cast<std::size_t>(alphabet)) invalid("partition symbol out of range");
    return symdyn::CylinderPartition::binary_coarsenings(alphabet)[k];
  }
  if (v.is_string()) {
    const std::string name = v.get<std::string>();
    if (name == "symbol") return symdyn::CylinderPartition::symbol_partition(alphabet);
    if (name == "trivial") return symdyn::CylinderPartition::trivial(alphabet);
    if (name == "auto" && allow_auto) return std::nullopt;
  }
  invalid(std::string("partition must be ") + (allow_auto ? "\"auto\", " : "") +
          "\"symbol\", \"trivial\" or a symbol index");
}

json partition_json(const symdyn::CylinderPartition& u) {
  json cells = json::array();
  for (const auto& cell : u.cells) {
    json words = json::array();
    for (const auto& w : cell) words.push_back(symdyn::format_word(w));
    cells.push_back(std::move(words));
  }
  return {{"window", u.window}, {"cells", std::move(cells)}, {"labels", u.labels}};
}

std::string indices_field(const std::vector<std::size_t>& indices) {
  std::string s;
  for (std::size_t i = 0; i < indices.size(); ++i) s += (i ? ";" : "") + std::to_string(indices[i]);
  return s;
}

const char* bool_field(bool b) { return b ? "true" : "false"; }

json certificate_json(const matrixbound::EntropyCertificate& c) {
  return {{"mu", c.mu},
          {"D", c.D},
          {"delta", c.delta},
          {"a", c.a},
          {"bound", c.bound},
          {"omega_id", c.omega_id},
          {"finite_horizon", c.finite_horizon}};
}

json rcp_json(const matrixbound::RcpBound& b) {
  return {{"kind", std::string(to_string(b.kind))},
          {"value", b.value},
          {"horizon", b.horizon},
          {"delta", b.delta},
          {"derivation", std::string(to_string(b.derivation))}};
}

json growth_json(const statespace::GrowthReport& g) {
  json counts = json::array();
  for (const auto& c : g.counts) counts.push_back({{"n", c.n}, {"count", c.count}, {"exact", c.exact}});
  return {{"epsilon", g.epsilon},
          {"rate", g.rate},
          {"verdict", std::string(to_string(g.verdict))},
          {"counts", std::move(counts)}};
}

std::string growth_csv(const statespace::GrowthReport& g) {
  std::string csv = "n,epsilon,count,exact\n";
  for (const auto& c : g.counts)
    csv += std::to_string(c.n) + "," + format_double(g.epsilon) + "," + std::to_string(c.count) + "," +
           bool_field(c.exact) + "\n";
  return csv;
}

// ---------------------------------------------------------------- commands

RunResult run_entropy(const ExperimentConfig& cfg) {
  Params p(cfg.parameters, "parameters");
  const std::string method = p.text("method", "block");
  RunResult r;
  r.results_csv = "n,value_nats,exact,method\n";
  if (method == "block" || method == "spectral" || method == "cover") {
    const symdyn::Subshift s = parse_subshift(p);
    const std::size_t n_max = method == "spectral" ? 0 : p.size("n_max", 12);
    std::optional<symdyn::CylinderPartition> u;
    if (method == "cover") {
      u = p.has("partition") ? parse_partition(p.raw("partition"), s.alphabet_size(), false)
                             : symdyn::CylinderPartition::symbol_partition(s.alphabet_size());
      u->validate(s);
    }
    p.finish();
    if (method != "spectral" && n_max == 0) invalid("parameters.n_max must be positive");
    symdyn::EntropyEstimate est = method == "block"      ? symdyn::entropy_block_growth(s, n_max)
                                  : method == "spectral" ? symdyn::entropy_spectral(s)
                                                         : symdyn::entropy_cover_join(s, *u, n_max);
    const std::string name(to_string(est.method));
    if (method == "spectral") {
      r.results_csv += "0," + format_double(est.extrapolated) + ",false," + name + "\n";
    } else {
      for (const auto& smp : est.samples)
        r.results_csv += std::to_string(smp.n) + "," + format_double(smp.value) + ",true," + name + "\n";
    }
    r.summary = {{"command", "entropy"},      {"method", name},          {"source", s.id()},
                 {"extrapolated", est.extrapolated}, {"note", est.note}, {"samples", est.samples.size()}};
    if (u) r.summary["partition"] = partition_json(*u);
    r.tolerances = {{"spectral_relative", 1e-10}};
    return r;
  }
  if (method == "separated" || method == "spanning") {
    const symdyn::FiniteMetricSystem m = parse_system(p.raw("system"));
    const double eps = p.number("epsilon");
    const std::size_t n_max = p.size("n_max", 8);
    const packing::Method pm = parse_packing(p.text("packing", "exact"));
    p.finish();
    if (n_max == 0) invalid("parameters.n_max must be positive");
    const std::size_t sep_cap = cap(cfg, "separation_exact_cap", packing::kDefaultExactCap);
    const packing::Mode mode = method == "separated" ? packing::Mode::Separated : packing::Mode::Spanning;
    json counts = json::array();
    double last = 0.0;
    bool all_exact = true;
    for (std::size_t n = 1; n <= n_max; ++n) {
      const auto rep = symdyn::separated_spanning(m, n, eps, mode, pm, sep_cap);
      last = std::log(static_cast<double>(rep.count)) / static_cast<double>(n);
      all_exact = all_exact && rep.exact;
      r.results_csv += std::to_string(n) + "," + format_double(last) + "," + bool_field(rep.exact) + "," + method + "\n";
      counts.push_back(rep.count);
    }
    r.summary = {{"command", "entropy"}, {"method", method}, {"epsilon", eps}, {"counts", std::move(counts)},
                 {"last_value", last},   {"all_exact", all_exact}};
    r.tolerances = json::object();
    return r;
  }
  invalid("unknown entropy method '" + method + "' (block, spectral, cover, separated, spanning)");
}

RunResult run_shatter(const ExperimentConfig& cfg) {
  Params p(cfg.parameters, "parameters");
  const symdyn::Subshift s = parse_subshift(p);
  std::vector<std::size_t> ns = p.sizes("n", std::vector<std::size_t>{8});
  const shatter::Method method = parse_shatter_method(p.text("method", "exact"));
  std::optional<symdyn::CylinderPartition> u =
      p.has("partition") ? parse_partition(p.raw("partition"), s.alphabet_size(), true) : std::nullopt;
  const std::size_t horizon = p.size("select_horizon", 12);
  p.finish();
  const std::size_t shatter_cap = cap(cfg, "shatter_exact_cap", shatter::kDefaultExactCap);

  json selection = nullptr;
  if (!u) {
    auto [part, est] = shatter::select_binary_partition(
        s, symdyn::CylinderPartition::binary_coarsenings(s.alphabet_size()), horizon);
    u = std::move(part);
    selection = {{"horizon", horizon}, {"cover_entropy", est.extrapolated}};
  }
  u->validate(s);
  const shatter::IndicatorFunction f = shatter::indicator_difference(*u);

  std::sort(ns.begin(), ns.end());
  ns.erase(std::unique(ns.begin(), ns.end()), ns.end());
  RunResult r;
  r.results_csv = "n,patterns,shattered_size,density,method,verified,indices\n";
  json certs = json::array();
  for (std::size_t n : ns) {
    const shatter::PatternSet e = shatter::realized_patterns(s, f, n);
    const shatter::ShatterCertificate c = shatter::max_shattered(e, method, shatter_cap);
    r.results_csv += std::to_string(n) + "," + std::to_string(e.size()) + "," + std::to_string(c.indices.size()) +
                     "," + format_double(c.density) + "," + std::string(to_string(c.method)) + "," +
                     bool_field(c.verified) + "," + indices_field(c.indices) + "\n";
    certs.push_back({{"n", n},
                     {"indices", c.indices},
                     {"density", c.density},
                     {"method", std::string(to_string(c.method))},
                     {"verified", c.verified},
                     {"patterns", e.size()},
                     {"sauer_shelah_threshold", shatter::sauer_shelah_threshold(n, e.size())}});
    std::string lines;
    for (std::size_t i = 0; i < e.size(); ++i) lines += e.pattern(i).to_string() + "\n";
    r.extra_files.emplace_back("patterns_n" + std::to_string(n) + ".txt", std::move(lines));
  }
  r.summary = {{"command", "shatter"},
               {"source", s.id()},
               {"partition", partition_json(*u)},
               {"plus_cell", f.plus_cell},
               {"selection", selection},
               {"certificates", std::move(certs)}};
  return r;
}

ell1::Family parse_family(const json& j, const ExperimentConfig& cfg) {
  Params p(j, "parameters.family");
  if (p.has("file")) {
    const std::string path = p.text("file");
    p.finish();
    const std::string ext = std::filesystem::path(path).extension().string();
    if (ext == ".csv") return ell1::load_function_family_csv(path);
    if (ext == ".json") return ell1::load_matrix_family_json(path);
    invalid("family file must end in .csv or .json");
  }
  if (p.has("values")) {
    const json& rows = p.raw("values");
    p.finish();
    if (!rows.is_array() || rows.empty() || !rows[0].is_array()) invalid("family.values must be a list of rows");
    Eigen::MatrixXd v(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows[0].size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (!rows[i].is_array() || rows[i].size() != rows[0].size())
        throw Error(ErrorCode::SizeMismatch, "family rows must have equal length");
      for (std::size_t x = 0; x < rows[i].size(); ++x) {
        if (!rows[i][x].is_number()) invalid("family.values entries must be numbers");
        v(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(x)) = rows[i][x].get<double>();
      }
    }
    return ell1::FunctionFamily(std::move(v), "inline");
  }
  const auto kind = matrixbound::family_kind_from_string(p.text("kind"));
  const std::size_t n = p.size("n");
  const std::size_t k = p.size("k");
  p.finish();
  const std::uint64_t seed = kind == matrixbound::FamilyKind::RandomGaussian ? require_seed(cfg) : 0;
  return matrixbound::generate_family(kind, n, k, seed);
}

bool distortion_is_stochastic(const json& params) {
  if (params.is_object() && params.contains("method") && params["method"].is_string() &&
      ell1::distortion_method_from_string(params["method"].get<std::string>()) == ell1::DistortionMethod::Sampled)
    return true;
  if (params.is_object() && params.contains("family") && params["family"].is_object()) {
    const json& f = params["family"];
    if (f.contains("kind") && f["kind"].is_string() && f["kind"].get<std::string>() == "random_gaussian") return true;
  }
  return false;
}

RunResult run_distortion(const ExperimentConfig& cfg) {
  Params p(cfg.parameters, "parameters");
  const ell1::Family family = parse_family(p.raw("family"), cfg);
  const auto method = ell1::distortion_method_from_string(p.text("method", "exact_face"));
  const std::size_t samples = p.size("samples", 20000);
  const bool allow_degenerate = p.flag("allow_degenerate", false);
  std::optional<std::pair<ell1::TransportMode, double>> transport;
  if (p.has("transport")) {
    Params t(p.raw("transport"), "parameters.transport");
    const auto mode = ell1::transport_mode_from_string(t.text("mode"));
    const double delta = t.number("delta", 0.0);
    t.finish();
    transport.emplace(mode, delta);
  }
  p.finish();
  const std::uint64_t seed = method == ell1::DistortionMethod::Sampled ? require_seed(cfg) : 0;
  const std::size_t exact_cap = cap(cfg, "distortion_exact_cap", ell1::kDefaultExactCap);

  const ell1::DistortionReport rep = ell1::lower_l1_constant(family, method, samples, seed, exact_cap);
  if (!allow_degenerate) ell1::require_nondegenerate(rep);

  const std::string id = ell1::family_id(family);
  RunResult r;
  r.results_csv = "family_id,n,lambda,max_norm,distortion,degenerate,method,evaluations\n";
  r.results_csv += id + "," + std::to_string(ell1::family_size(family)) + "," + format_double(rep.lambda) + "," +
                   format_double(rep.max_norm) + "," + format_double(rep.distortion) + "," +
                   bool_field(rep.degenerate) + "," + std::string(to_string(rep.method)) + "," +
                   std::to_string(rep.evaluations) + "\n";
  std::vector<double> witness(rep.witness.data(), rep.witness.data() + rep.witness.size());
  r.summary = {{"command", "distortion"},
               {"family_id", id},
               {"n", ell1::family_size(family)},
               {"lambda", rep.lambda},
               {"max_norm", rep.max_norm},
               {"distortion", rep.degenerate ? json("inf") : json(rep.distortion)},
               {"witness", witness},
               {"method", std::string(to_string(rep.method))},
               {"tolerance", rep.tolerance},
               {"degenerate", rep.degenerate},
               {"evaluations", rep.evaluations},
               {"quantity", rep.quantity}};
  if (transport) {
    const double out = ell1::transport_distortion(rep.distortion, transport->second, transport->first);
    r.summary["transport"] = {{"mode", std::string(to_string(transport->first))},
                              {"delta", transport->second},
                              {"distortion", out}};
  }
  r.tolerances = {{"face_gap_relative", ell1::kFaceTolerance},
                  {"degenerate_threshold", ell1::kDegenerateThreshold},
                  {"reported", rep.tolerance}};
  return r;
}

RunResult run_cert(const ExperimentConfig& cfg) {
  Params p(cfg.parameters, "parameters");
  const std::string kind = p.text("kind");
  RunResult r;
  r.results_csv = "kind,value\n";
  if (kind == "ht") {
    const double mu = p.number("mu");
    const double D = p.number("D", 1.0);
    const double delta = p.number("delta", 0.0);
    const double a = p.number("a", 1.0);
    const std::string omega = p.text("omega", "");
    p.finish();
    const auto c = matrixbound::entropy_lower_bound(mu, D, delta, a, omega);
    r.summary = certificate_json(c);
    r.results_csv += "ht," + format_double(c.bound) + "\n";
  } else if (kind == "rcp") {
    const std::string bound = p.text("bound", "lower");
    matrixbound::RcpBound b;
    if (bound == "lower") {
      const std::size_t n = p.size("n");
      const double D = p.number("D", 1.0);
      const double delta = p.number("delta", 0.0);
      const double a = p.number("a", 1.0);
      p.finish();
      b = matrixbound::rcp_lower_bound(n, D, delta, a);
    } else if (bound == "upper") {
      const symdyn::Subshift s = parse_subshift(p);
      const std::size_t n = p.size("n");
      const auto u = p.has("partition") ? *parse_partition(p.raw("partition"), s.alphabet_size(), false)
                                        : symdyn::CylinderPartition::symbol_partition(s.alphabet_size());
      p.finish();
      u.validate(s);
      b = matrixbound::rcp_upper_from_cover(s, u, n);
    } else {
      invalid("parameters.bound must be \"lower\" or \"upper\"");
    }
    r.summary = rcp_json(b);
    r.results_csv += "rcp_" + bound + "," + format_double(b.value) + "\n";
  } else if (kind == "cb") {
    const std::size_t n = p.size("n");
    p.finish();
    const double v = matrixbound::cb_obstruction_bound(n);
    r.summary = {{"n", n}, {"value", v}};
    r.results_csv += "cb," + format_double(v) + "\n";
  } else {
    invalid("parameters.kind must be ht, rcp or cb");
  }
  r.summary["cert"] = kind;
  r.tolerances = {{"dimension_bound_relative_slack", 1e-12}};
  return r;
}

RunResult run_bound_sweep(const ExperimentConfig& cfg) {
  Params p(cfg.parameters, "parameters");
  matrixbound::SweepConfig sc;
  for (const std::string& k : p.texts("kinds", std::vector<std::string>{"diagonal_sign", "symmetrized_row",
                                                                        "random_gaussian"}))
    sc.kinds.push_back(matrixbound::family_kind_from_string(k));
  const bool has_list = p.has("k_values");
  const bool has_max = p.has("kmax");
  if (has_list == has_max) invalid("give exactly one of parameters.k_values and parameters.kmax");
  if (has_list) {
    sc.k_values = p.sizes("k_values");
  } else {
    const std::size_t kmax = p.size("kmax");
    for (std::size_t k = 2; k <= kmax && k != 0; k *= 2) sc.k_values.push_back(k);
    if (sc.k_values.empty()) invalid("parameters.kmax must be at least 2");
  }
  sc.d_cap = p.number("d_cap", 1.0);
  sc.replicates = p.size("replicates", 3);
  sc.n_max = p.size("n_max", ell1::kDefaultExactCap);
  sc.method = ell1::distortion_method_from_string(p.text("method", "exact_face"));
  sc.samples = p.size("samples", 20000);
  p.finish();
  sc.seed = require_seed(cfg);
  if (sc.n_max > cap(cfg, "distortion_exact_cap", ell1::kDefaultExactCap) && sc.method == ell1::DistortionMethod::ExactFace)
    throw Error(ErrorCode::Intractable, "n_max exceeds the exact distortion cap");

  const matrixbound::SweepReport rep = matrixbound::sweep_and_fit(sc);
  RunResult r;
  r.results_csv = "kind,k,n_best,D_measured,seed\n";
  json rows = json::array();
  std::size_t violations = 0;
  for (const auto& row : rep.rows) {
    r.results_csv += std::string(to_string(row.kind)) + "," + std::to_string(row.k) + "," +
                     std::to_string(row.n_best) + "," + format_double(row.d_measured) + "," +
                     std::to_string(row.seed) + "\n";
    if (rep.fit.slope_defined && row.n_best > 0 &&
        !matrixbound::dimension_bound_check({row.n_best, row.k, row.d_measured, rep.fit.slope}))
      ++violations;
  }
  auto fit_json = [](const matrixbound::LinearFit& f) {
    return json{{"a_fit", f.slope_defined ? json(f.slope) : json(nullptr)},
                {"slope_defined", f.slope_defined},
                {"intercept", f.intercept},
                {"residuals", f.residuals},
                {"points", f.points}};
  };
  json per_kind = json::object();
  for (const auto& [kind, fit] : rep.per_kind) per_kind[std::string(to_string(kind))] = fit_json(fit);
  r.summary = fit_json(rep.fit);
  r.summary["command"] = "bound-sweep";
  r.summary["d_cap"] = sc.d_cap;
  r.summary["k_values"] = sc.k_values;
  r.summary["per_kind"] = std::move(per_kind);
  r.summary["degenerate_skipped"] = rep.degenerate_skipped;
  r.summary["bound_violations"] = violations;
  r.tolerances = {{"face_gap_relative", ell1::kFaceTolerance},
                  {"degenerate_threshold", ell1::kDegenerateThreshold},
                  {"d_cap_slack", 1e-9},
                  {"dimension_bound_relative_slack", 1e-12}};
  return r;
}

RunResult run_simplex_sep(const ExperimentConfig& cfg) {
  Params p(cfg.parameters, "parameters");
  const symdyn::FiniteMetricSystem m = parse_system(p.raw("system"));
  const auto set = statespace::observable_set_from_string(p.text("observables", "symbol"));
  const double res = p.number("resolution");
  const double eps = p.number("epsilon");
  const std::vector<std::size_t> horizons = p.sizes("horizons");
  p.finish();
  const auto k = statespace::observables_for(m, set);
  const auto rep = statespace::simplex_sep_growth(m, k, res, eps, horizons,
                                                  cap(cfg, "net_cap", statespace::kDefaultNetCap),
                                                  cap(cfg, "simplex_exact_cap", packing::kDefaultExactCap));
  RunResult r;
  r.results_csv = growth_csv(rep);
  r.summary = growth_json(rep);
  r.summary["command"] = "simplex-sep";
  r.summary["observables"] = std::string(to_string(set));
  r.summary["net_points"] = rep.net_points;
  r.summary["net_denominator"] = rep.net_denominator;
  r.summary["effective_horizon"] = rep.effective_horizon;
  r.summary["max_snap_distance"] = rep.max_snap_distance;
  r.summary["separating"] = rep.separating;
  r.tolerances = {{"subexponential_rate", statespace::kSubexponentialRate},
                  {"exponential_rate", statespace::kExponentialRate}};
  return r;
}

RunResult run_lgeom(const ExperimentConfig& cfg) {
  Params p(cfg.parameters, "parameters");
  const std::size_t rdim = p.size("r");
  const std::vector<std::size_t> ns = p.sizes("n");
  const double eps = p.number("epsilon", 0.5);
  const std::size_t trials = p.size("trials", 1);
  const std::size_t inputs = p.size("inputs", 10'000);
  p.finish();
  const std::uint64_t seed = require_seed(cfg);
  std::vector<statespace::LgeomReport> details;
  const auto rep = statespace::lgeom_growth(rdim, ns, eps, trials, seed, inputs, &details);
  RunResult r;
  r.results_csv = growth_csv(rep);
  r.summary = growth_json(rep);
  r.summary["command"] = "lgeom";
  r.summary["r"] = rdim;
  json per_n = json::array();
  std::size_t checked = 0, violations = 0;
  for (const auto& d : details) {
    json thresholds = json::array();
    for (const auto& t : d.thresholds)
      thresholds.push_back({{"lambda", t.lambda}, {"target", t.target}, {"reached", t.reached}});
    per_n.push_back({{"n", d.n},
                     {"max_separated", d.max_separated},
                     {"exact", d.exact},
                     {"per_trial", d.per_trial},
                     {"inputs", d.inputs},
                     {"contractivity_checked", d.contractivity_checked},
                     {"contractivity_violations", d.contractivity_violations},
                     {"max_contraction_ratio", d.max_contraction_ratio},
                     {"thresholds", std::move(thresholds)}});
    checked += d.contractivity_checked;
    violations += d.contractivity_violations;
  }
  r.summary["details"] = std::move(per_n);
  r.summary["contractivity_checked"] = checked;
  r.summary["contractivity_violations"] = violations;
  r.tolerances = {{"contractivity_relative", 1e-12},
                  {"subexponential_rate", statespace::kSubexponentialRate},
                  {"exponential_rate", statespace::kExponentialRate}};
  return r;
}

RunResult run_cantor(const ExperimentConfig& cfg) {
  Params p(cfg.parameters, "parameters");
  const symdyn::Subshift s = parse_subshift(p);
  const std::vector<std::size_t> ns = p.sizes("n", std::vector<std::size_t>{4, 8, 12, 16});
  CantorOptions opt;
  opt.delta = p.number("delta", opt.delta);
  opt.a = p.number("a", opt.a);
  opt.select_horizon = p.size("select_horizon", opt.select_horizon);
  p.finish();
  opt.shatter_cap = cap(cfg, "shatter_exact_cap", opt.shatter_cap);

  const CantorReport rep = pipeline_cantor(s, ns, opt);
  RunResult r;
  r.results_csv = "n,patterns,density,indices,basis_verified,D,bound,complex_D,complex_bound\n";
  for (const auto& st : rep.steps) {
    r.results_csv += std::to_string(st.n) + "," + std::to_string(st.patterns) + "," +
                     format_double(st.shattered.density) + "," + indices_field(st.shattered.indices) + "," +
                     bool_field(st.basis_verified) + "," + format_double(st.certificate.D) + "," +
                     format_double(st.certificate.bound) + "," + format_double(st.complex_distortion) + "," +
                     (st.complex_certificate ? format_double(st.complex_certificate->bound) : std::string("nan")) +
                     "\n";
  }
  r.summary = to_json(rep);
  r.summary["command"] = "cantor-pipeline";
  r.tolerances = {{"zero_entropy_threshold", shatter::kDefaultZeroThreshold}};
  return r;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string utc_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_all(const std::filesystem::path& dir, const std::vector<std::pair<std::string, std::string>>& files) {
  std::filesystem::create_directories(dir);
  std::vector<std::filesystem::path> staged;
  for (const auto& [name, contents] : files) {
    const auto tmp = dir / (name + ".tmp");
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    os << contents;
    os.close();
    if (!os) {
      for (const auto& s : staged) std::filesystem::remove(s);
      std::filesystem::remove(tmp);
      throw std::runtime_error("cannot write " + tmp.string());
    }
    staged.push_back(tmp);
  }
  for (std::size_t i = 0; i < files.size(); ++i) std::filesystem::rename(staged[i], dir / files[i].first);
}

}  // namespace

// ---------------------------------------------------------------- public

std::string_view to_string(Command c) {
  switch (c) {
    case Command::Entropy: return "entropy";
    case Command::Shatter: return "shatter";
    case Command::Distortion: return "distortion";
    case Command::Cert: return "cert";
    case Command::BoundSweep: return "bound-sweep";
    case Command::SimplexSep: return "simplex-sep";
    case Command::Lgeom: return "lgeom";
    case Command::CantorPipeline: return "cantor-pipeline";
  }
  return "?";
}

Command command_from_string(std::string_view name) {
  for (Command c : {Command::Entropy, Command::Shatter, Command::Distortion, Command::Cert, Command::BoundSweep,
                    Command::SimplexSep, Command::Lgeom, Command::CantorPipeline})
    if (to_string(c) == name) return c;
  invalid("unknown command '" + std::string(name) + "'");
}

ExperimentConfig parse_config(const json& doc) {
  Params p(doc, "config");
  ExperimentConfig cfg;
  cfg.command = command_from_string(p.text("command"));
  if (p.has("parameters")) {
    cfg.parameters = p.raw("parameters");
    if (!cfg.parameters.is_object()) invalid("parameters must be an object");
  }
  if (p.has("seed")) cfg.seed = p.u64("seed");
  if (p.has("output_dir")) cfg.output_dir = p.text("output_dir");
  if (p.has("caps")) {
    cfg.caps = p.raw("caps");
    if (!cfg.caps.is_object()) invalid("caps must be an object");
    for (auto it = cfg.caps.begin(); it != cfg.caps.end(); ++it) {
      if (!known_caps().count(it.key())) invalid("unknown key '" + it.key() + "' in caps");
      cap(cfg, it.key(), 1);
    }
  }
  p.finish();
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) invalid("cannot read config " + path.string());
  json doc;
  try {
    doc = json::parse(is, nullptr, true, true);
  } catch (const json::parse_error& e) {
    invalid("config " + path.string() + " is not valid JSON: " + e.what());
  }
  return parse_config(doc);
}

json to_json(const ExperimentConfig& cfg) {
  json j = {{"command", std::string(to_string(cfg.command))},
            {"parameters", cfg.parameters},
            {"output_dir", cfg.output_dir.string()},
            {"caps", cfg.caps}};
  j["seed"] = cfg.seed ? json(*cfg.seed) : json(nullptr);
  return j;
}

void apply_seed_override(ExperimentConfig& cfg, const char* env_value) {
  if (!env_value) return;
  const std::string text(env_value);
  if (text.empty() || text.find_first_not_of("0123456789") != std::string::npos)
    invalid("ENTROLAB_SEED must be a nonnegative decimal integer");
  try {
    cfg.seed = std::stoull(text);
  } catch (const std::out_of_range&) {
    invalid("ENTROLAB_SEED does not fit in 64 bits");
  }
}

bool is_stochastic(const ExperimentConfig& cfg) {
  switch (cfg.command) {
    case Command::BoundSweep:
    case Command::Lgeom: return true;
    case Command::Distortion: return distortion_is_stochastic(cfg.parameters);
    default: return false;
  }
}

std::uint64_t config_hash(const ExperimentConfig& cfg) {
  json j = to_json(cfg);
  j.erase("output_dir");
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : j.dump()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

RunResult execute(const ExperimentConfig& cfg) {
  if (is_stochastic(cfg)) require_seed(cfg);
  switch (cfg.command) {
    case Command::Entropy: return run_entropy(cfg);
    case Command::Shatter: return run_shatter(cfg);
    case Command::Distortion: return run_distortion(cfg);
    case Command::Cert: return run_cert(cfg);
    case Command::BoundSweep: return run_bound_sweep(cfg);
    case Command::SimplexSep: return run_simplex_sep(cfg);
    case Command::Lgeom: return run_lgeom(cfg);
    case Command::CantorPipeline: return run_cantor(cfg);
  }
  invalid("unknown command");
}

json to_json(const RunManifest& m) {
  return {{"config_hash", hex64(m.config_hash)}, {"version", m.version},       {"started_at", m.started_at},
          {"finished_at", m.finished_at},       {"tolerances", m.tolerances}, {"files", m.files}};
}

int exit_code_for(ErrorCode code) { return is_infeasibility(code) ? kExitInfeasible : kExitInvalid; }

int run_experiment(const ExperimentConfig& cfg, std::ostream& out, std::ostream& log, bool print_summary) {
  RunManifest manifest;
  manifest.started_at = utc_now();
  manifest.config_hash = config_hash(cfg);
  try {
    RunResult r = execute(cfg);
    manifest.finished_at = utc_now();
    manifest.tolerances = r.tolerances;
    std::vector<std::pair<std::string, std::string>> files;
    files.emplace_back("results.csv", r.results_csv);
    files.emplace_back("summary.json", r.summary.dump(2) + "\n");
    for (auto& f : r.extra_files) files.push_back(std::move(f));
    for (const auto& f : files) manifest.files.push_back(f.first);
    manifest.files.push_back("manifest.json");
    json mj = to_json(manifest);
    mj["command"] = std::string(to_string(cfg.command));
    mj["seed"] = cfg.seed ? json(*cfg.seed) : json(nullptr);
    mj["threads"] = thread_count();
    mj["config"] = to_json(cfg);
    files.emplace_back("manifest.json", mj.dump(2) + "\n");
    write_all(cfg.output_dir, files);
    if (print_summary) out << r.summary.dump(2) << "\n";
    return kExitOk;
  } catch (const Error& e) {
    log << "error: " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const json::exception& e) {
    log << "error: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const std::exception& e) {
    log << "error: " << e.what() << "\n";
    return kExitFailure;
  }
}

int run_config(const std::filesystem::path& path, std::ostream& out, std::ostream& log) {
  ExperimentConfig cfg;
  try {
    cfg = load_config(path);
    apply_seed_override(cfg, std::getenv("ENTROLAB_SEED"));
  } catch (const Error& e) {
    log << "error: " << e.what() << "\n";
    return exit_code_for(e.code());
  }
  return run_experiment(cfg, out, log, cfg.command == Command::Cert);
}

// ---------------------------------------------------------------- pipeline

CantorReport pipeline_cantor(const symdyn::Subshift& s, const std::vector<std::size_t>& n_list,
                             const CantorOptions& options) {
  if (n_list.empty()) throw Error(ErrorCode::OutOfRange, "no horizons given");
  CantorReport rep;
  rep.subshift_id = s.id();
  rep.spectral_entropy = symdyn::entropy_spectral(s).extrapolated;
  if (!(rep.spectral_entropy > shatter::kDefaultZeroThreshold))
    throw Error(ErrorCode::AllZero, s.id() + " has zero spectral entropy");

  auto [u, est] = shatter::select_binary_partition(
      s, symdyn::CylinderPartition::binary_coarsenings(s.alphabet_size()), options.select_horizon);
  rep.partition = std::move(u);
  rep.partition_entropy = est.extrapolated;
  const shatter::IndicatorFunction f = shatter::indicator_difference(rep.partition);

  std::string omega = "chi{";
  const auto& plus = rep.partition.cells[f.plus_cell];
  for (std::size_t i = 0; i < plus.size(); ++i) omega += (i ? "," : "") + symdyn::format_word(plus[i]);
  omega += "}-chi{rest}";

  std::vector<std::size_t> ns = n_list;
  std::sort(ns.begin(), ns.end());
  ns.erase(std::unique(ns.begin(), ns.end()), ns.end());
  double min_density = std::numeric_limits<double>::infinity();
  double max_d = 1.0;
  for (std::size_t n : ns) {
    CantorStep st;
    st.n = n;
    const shatter::PatternSet e = shatter::realized_patterns(s, f, n);
    st.patterns = e.size();
    st.shattered = shatter::max_shattered(e, shatter::Method::Exact, options.shatter_cap);
    const auto& idx = st.shattered.indices;
    if (idx.empty()) throw Error(ErrorCode::AllZero, "no shattered index at n = " + std::to_string(n));

    Eigen::MatrixXd values(static_cast<Eigen::Index>(idx.size()), static_cast<Eigen::Index>(e.size()));
    for (std::size_t x = 0; x < e.size(); ++x)
      for (std::size_t row = 0; row < idx.size(); ++row)
        values(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(x)) = e.pattern(x).at(idx[row]);
    const ell1::FunctionFamily restricted(std::move(values), "f o T^i, i in I_" + std::to_string(n));
    st.basis_verified = ell1::verify_isometric_basis(restricted);
    double d = 1.0;
    if (!st.basis_verified) {
      const auto dr = ell1::lower_l1_constant(restricted, ell1::DistortionMethod::ExactFace, 0, 0);
      ell1::require_nondegenerate(dr);
      d = dr.distortion;
    }
    st.certificate = matrixbound::entropy_lower_bound(st.shattered.density, d, options.delta, options.a, omega);
    st.complex_distortion = ell1::transport_distortion(d, options.delta, ell1::TransportMode::Complexify);
    if (st.complex_distortion * options.delta < 1.0)
      st.complex_certificate = matrixbound::entropy_lower_bound(st.shattered.density, st.complex_distortion,
                                                                options.delta, options.a, omega);
    min_density = std::min(min_density, st.shattered.density);
    max_d = std::max(max_d, d);
    rep.steps.push_back(std::move(st));
  }
  rep.bundle = matrixbound::entropy_lower_bound(min_density, max_d, options.delta, options.a, omega);
  return rep;
}

json to_json(const CantorReport& r) {
  json steps = json::array();
  for (const auto& st : r.steps) {
    steps.push_back({{"n", st.n},
                     {"patterns", st.patterns},
                     {"indices", st.shattered.indices},
                     {"density", st.shattered.density},
                     {"shatter_verified", st.shattered.verified},
                     {"basis_verified", st.basis_verified},
                     {"certificate", certificate_json(st.certificate)},
                     {"complex_distortion", st.complex_distortion},
                     {"complex_certificate",
                      st.complex_certificate ? certificate_json(*st.complex_certificate) : json(nullptr)}});
  }
  return {{"subshift", r.subshift_id},
          {"spectral_entropy", r.spectral_entropy},
          {"partition", partition_json(r.partition)},
          {"partition_entropy", r.partition_entropy},
          {"steps", std::move(steps)},
          {"bundle", certificate_json(r.bundle)}};
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace entrolab::harness
