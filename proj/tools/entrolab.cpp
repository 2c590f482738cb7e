// Command-line front end. Every subcommand builds an experiment config from
// its flags and runs it the same way `run <config>` does.

#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include "entrolab/harness.hpp"
#include "entrolab/parallel.hpp"

using entrolab::harness::Command;
using entrolab::harness::ExperimentConfig;
using nlohmann::json;

namespace {

struct Invocation {
  ExperimentConfig cfg;
  json system = json::object();
  json family = json::object();
  json transport = json::object();
};

template <class T>
void param(CLI::App* app, const std::string& flag, json& target, const std::string& key, const std::string& help) {
  app->add_option_function<T>(flag, [&target, key](const T& v) { target[key] = v; }, help);
}

template <class T>
void list_param(CLI::App* app, const std::string& flag, json& target, const std::string& key,
                const std::string& help) {
  app->add_option_function<std::vector<T>>(flag, [&target, key](const std::vector<T>& v) { target[key] = v; }, help)
      ->delimiter(',');
}

void subshift_flags(CLI::App* app, json& p) {
  param<std::size_t>(app, "--alphabet", p, "alphabet", "alphabet size d");
  list_param<std::string>(app, "--forbidden", p, "forbidden", "forbidden words, base-36 digits, comma separated");
}

void system_flags(CLI::App* app, json& s) {
  param<std::string>(app, "--model", s, "model", "periodic, compactified, identity or matrix");
  param<std::size_t>(app, "--system-alphabet", s, "alphabet", "alphabet of the periodic model");
  param<std::size_t>(app, "--period", s, "period", "period of the periodic model");
  param<std::size_t>(app, "--m", s, "m", "truncation of the compactified model");
  list_param<double>(app, "--positions", s, "positions", "points of the identity system");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"entrolab: entropy, shattering and l1-geometry experiments"};
  app.require_subcommand(1);

  Invocation inv;
  json& p = inv.cfg.parameters;
  std::string output_dir = "entrolab-output";
  unsigned threads = 0;
  std::string config_path;
  app.add_option("--threads", threads, "worker threads (default: all cores)");

  auto common = [&](CLI::App* sub, bool seeded) {
    sub->add_option("-o,--output-dir", output_dir, "directory for results.csv, summary.json, manifest.json");
    if (seeded)
      sub->add_option_function<std::uint64_t>("--seed", [&](const std::uint64_t& s) { inv.cfg.seed = s; },
                                              "base seed");
  };

  auto* entropy = app.add_subcommand("entropy", "topological entropy of a subshift or finite system");
  subshift_flags(entropy, p);
  param<std::string>(entropy, "--method", p, "method", "block, spectral, cover, separated or spanning");
  param<std::size_t>(entropy, "--n-max", p, "n_max", "largest horizon");
  param<std::string>(entropy, "--partition", p, "partition", "cover partition: symbol or trivial");
  param<double>(entropy, "--epsilon", p, "epsilon", "separation scale");
  param<std::string>(entropy, "--packing", p, "packing", "exact or greedy");
  system_flags(entropy, inv.system);
  common(entropy, false);

  auto* shatter = app.add_subcommand("shatter", "maximum shattered index sets of sign itineraries");
  subshift_flags(shatter, p);
  list_param<std::size_t>(shatter, "--n", p, "n", "horizons");
  param<std::string>(shatter, "--method", p, "method", "exact or greedy");
  param<std::size_t>(shatter, "--select-horizon", p, "select_horizon", "horizon for partition selection");
  common(shatter, false);

  auto* distortion = app.add_subcommand("distortion", "basis distortion against the l1 basis");
  param<std::string>(distortion, "--family-file", inv.family, "file", "family file (.csv or .json)");
  param<std::string>(distortion, "--kind", inv.family, "kind", "generated family kind");
  param<std::size_t>(distortion, "--n", inv.family, "n", "generated family size");
  param<std::size_t>(distortion, "--k", inv.family, "k", "generated matrix size");
  param<std::string>(distortion, "--method", p, "method", "exact_face or sampled");
  param<std::size_t>(distortion, "--samples", p, "samples", "sample count for the sampled method");
  distortion->add_flag_function("--allow-degenerate", [&](std::int64_t) { p["allow_degenerate"] = true; },
                                "report degenerate families instead of exiting with 3");
  param<std::string>(distortion, "--transport", inv.transport, "mode", "diagram or complexify");
  param<double>(distortion, "--delta", inv.transport, "delta", "perturbation for --transport");
  common(distortion, true);

  auto* cert = app.add_subcommand("cert", "closed-form bounds, printed as JSON");
  cert->require_subcommand(1);
  auto* ht = cert->add_subcommand("ht", "entropy lower bound mu a^-1 D^-2 (1 - D delta)^2");
  param<double>(ht, "--mu", p, "mu", "independence density");
  param<double>(ht, "--D", p, "D", "basis distortion");
  param<double>(ht, "--delta", p, "delta", "perturbation");
  param<double>(ht, "--a", p, "a", "dimension-bound constant");
  param<std::string>(ht, "--omega", p, "omega", "observable set id");
  common(ht, false);
  auto* rcp = cert->add_subcommand("rcp", "rcp lower bound, or upper bound from a cover count");
  param<std::string>(rcp, "--bound", p, "bound", "lower or upper");
  param<std::size_t>(rcp, "--n", p, "n", "horizon");
  param<double>(rcp, "--D", p, "D", "basis distortion");
  param<double>(rcp, "--delta", p, "delta", "perturbation");
  param<double>(rcp, "--a", p, "a", "dimension-bound constant");
  subshift_flags(rcp, p);
  param<std::string>(rcp, "--partition", p, "partition", "symbol or trivial");
  common(rcp, false);
  auto* cb = cert->add_subcommand("cb", "completely bounded obstruction n / (2 sqrt(n - 1))");
  param<std::size_t>(cb, "--n", p, "n", "dimension");
  common(cb, false);

  auto* sweep = app.add_subcommand("bound-sweep", "largest n with distortion <= D_cap, fitted against log k");
  list_param<std::string>(sweep, "--kinds", p, "kinds", "diagonal_sign, symmetrized_row, random_gaussian");
  param<std::size_t>(sweep, "--kmax", p, "kmax", "k runs over powers of two up to kmax");
  list_param<std::size_t>(sweep, "--k-values", p, "k_values", "explicit k values");
  param<double>(sweep, "--dcap", p, "d_cap", "distortion cap");
  param<std::size_t>(sweep, "--replicates", p, "replicates", "seeds per (kind, k)");
  param<std::size_t>(sweep, "--n-max", p, "n_max", "largest family size tried");
  param<std::string>(sweep, "--method", p, "method", "exact_face or sampled");
  param<std::size_t>(sweep, "--samples", p, "samples", "sample count for the sampled method");
  common(sweep, true);

  auto* simplex = app.add_subcommand("simplex-sep", "separated-set growth on the measure simplex");
  system_flags(simplex, inv.system);
  param<std::string>(simplex, "--observables", p, "observables", "symbol, coordinate or indicators");
  param<double>(simplex, "--resolution", p, "resolution", "lattice net resolution");
  param<double>(simplex, "--epsilon", p, "epsilon", "separation scale");
  list_param<std::size_t>(simplex, "--horizons", p, "horizons", "horizons n");
  common(simplex, false);

  auto* lgeom = app.add_subcommand("lgeom", "separated images of trace-class inputs under random observables");
  param<std::size_t>(lgeom, "--r", p, "r", "matrix size");
  list_param<std::size_t>(lgeom, "--n", p, "n", "image dimensions");
  param<double>(lgeom, "--epsilon", p, "epsilon", "separation scale");
  param<std::size_t>(lgeom, "--trials", p, "trials", "random maps per n");
  param<std::size_t>(lgeom, "--inputs", p, "inputs", "sampled inputs per map");
  common(lgeom, true);

  auto* cantor = app.add_subcommand("cantor-pipeline", "shattering to isometric basis to entropy certificate");
  subshift_flags(cantor, p);
  list_param<std::size_t>(cantor, "--n", p, "n", "horizons");
  param<double>(cantor, "--delta", p, "delta", "perturbation");
  param<double>(cantor, "--a", p, "a", "dimension-bound constant");
  param<std::size_t>(cantor, "--select-horizon", p, "select_horizon", "horizon for partition selection");
  common(cantor, false);

  auto* run = app.add_subcommand("run", "run a JSON experiment config");
  run->add_option("config", config_path, "config file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : entrolab::harness::kExitInvalid;
  }
  entrolab::set_thread_count(threads);

  if (run->parsed()) return entrolab::harness::run_config(config_path, std::cout, std::cerr);

  const std::vector<std::pair<CLI::App*, Command>> commands = {
      {entropy, Command::Entropy},      {shatter, Command::Shatter},       {distortion, Command::Distortion},
      {cert, Command::Cert},            {sweep, Command::BoundSweep},      {simplex, Command::SimplexSep},
      {lgeom, Command::Lgeom},          {cantor, Command::CantorPipeline}};
  for (const auto& [sub, command] : commands)
    if (sub->parsed()) inv.cfg.command = command;
  if (cert->parsed()) p["kind"] = ht->parsed() ? "ht" : rcp->parsed() ? "rcp" : "cb";
  if (!inv.system.empty()) p["system"] = inv.system;
  if (!inv.family.empty()) p["family"] = inv.family;
  if (!inv.transport.empty()) p["transport"] = inv.transport;
  inv.cfg.output_dir = output_dir;

  try {
    entrolab::harness::apply_seed_override(inv.cfg, std::getenv("ENTROLAB_SEED"));
  } catch (const entrolab::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return entrolab::harness::kExitInvalid;
  }
  const int code = entrolab::harness::run_experiment(inv.cfg, std::cout, std::cerr, inv.cfg.command == Command::Cert);
  if (code == 0 && inv.cfg.command != Command::Cert)
    std::cout << "wrote " << inv.cfg.output_dir.string() << "\n";
  return code;
}
