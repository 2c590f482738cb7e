#pragma once

// Experiment runs: config parsing, command dispatch, output files and the
// end-to-end Cantor pipeline.
//
// A run computes everything in memory first and writes results.csv,
// summary.json, any extra files and manifest.json only when it succeeds.
// Exit codes: 0 success, 1 I/O or internal failure, 2 invalid input,
// 3 declared infeasibility.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "entrolab/error.hpp"
#include "entrolab/matrixbound.hpp"
#include "entrolab/shatter.hpp"
#include "entrolab/symdyn.hpp"

namespace entrolab::harness {

inline constexpr std::string_view kVersion = "0.1.0";

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitInvalid = 2;
inline constexpr int kExitInfeasible = 3;

enum class Command { Entropy, Shatter, Distortion, Cert, BoundSweep, SimplexSep, Lgeom, CantorPipeline };
std::string_view to_string(Command c);
Command command_from_string(std::string_view name);

struct ExperimentConfig {
  Command command = Command::Entropy;
  nlohmann::json parameters = nlohmann::json::object();
  std::optional<std::uint64_t> seed;
  std::filesystem::path output_dir = "entrolab-output";
  nlohmann::json caps = nlohmann::json::object();
};

/// Top-level keys: command, parameters, seed, output_dir, caps. Anything else
/// throws InvalidConfig. Parameter keys are checked by execute().
ExperimentConfig parse_config(const nlohmann::json& doc);
/// Reads JSON (comments allowed) and parses it.
ExperimentConfig load_config(const std::filesystem::path& path);
nlohmann::json to_json(const ExperimentConfig& cfg);

/// A decimal ENTROLAB_SEED value replaces the config seed.
void apply_seed_override(ExperimentConfig& cfg, const char* env_value);

/// Whether the command needs a seed with these parameters.
bool is_stochastic(const ExperimentConfig& cfg);

/// FNV-1a 64 over the canonical JSON of the config without output_dir.
std::uint64_t config_hash(const ExperimentConfig& cfg);

struct RunResult {
  std::string results_csv;
  nlohmann::json summary;
  std::vector<std::pair<std::string, std::string>> extra_files;  ///< name, contents
  nlohmann::json tolerances = nlohmann::json::object();
};

/// Runs the command without touching the filesystem (except reading input
/// files named by the parameters). Throws Error.
RunResult execute(const ExperimentConfig& cfg);

struct RunManifest {
  std::uint64_t config_hash = 0;
  std::string version{kVersion};
  std::string started_at;
  std::string finished_at;
  nlohmann::json tolerances = nlohmann::json::object();
  std::vector<std::string> files;
};
nlohmann::json to_json(const RunManifest& m);

/// execute() plus output files; errors are reported on `log` and mapped to
/// an exit code. When print_summary is set the summary JSON goes to `out`.
int run_experiment(const ExperimentConfig& cfg, std::ostream& out, std::ostream& log, bool print_summary = false);

/// load_config + ENTROLAB_SEED + run_experiment.
int run_config(const std::filesystem::path& path, std::ostream& out, std::ostream& log);

int exit_code_for(ErrorCode code);

struct CantorStep {
  std::size_t n = 0;
  std::size_t patterns = 0;
  shatter::ShatterCertificate shattered;
  bool basis_verified = false;
  matrixbound::EntropyCertificate certificate;
  double complex_distortion = 0.0;
  std::optional<matrixbound::EntropyCertificate> complex_certificate;  ///< empty when 2 delta >= 1
};

struct CantorReport {
  std::string subshift_id;
  double spectral_entropy = 0.0;
  symdyn::CylinderPartition partition;
  double partition_entropy = 0.0;
  std::vector<CantorStep> steps;
  /// Certificate at the smallest density over the computed horizons.
  matrixbound::EntropyCertificate bundle;
};

struct CantorOptions {
  double delta = 0.25;
  double a = 1.0;
  std::size_t select_horizon = 12;
  std::size_t shatter_cap = shatter::kDefaultExactCap;
};

/// Partition selection, indicator itineraries, exhaustive shattering, basis
/// check of the restricted family and the D = 1 certificate, for each n.
/// Throws AllZero when the subshift has zero spectral entropy.
CantorReport pipeline_cantor(const symdyn::Subshift& s, const std::vector<std::size_t>& n_list,
                             const CantorOptions& options = {});
nlohmann::json to_json(const CantorReport& r);

/// "%.17g", with inf, -inf and nan spelled out.
std::string format_double(double v);

}  // namespace entrolab::harness
