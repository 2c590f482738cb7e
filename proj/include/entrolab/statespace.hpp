#pragma once

// Induced dynamics on probability simplices over finite systems, weak*
// metrics from finite function sets, and the separation experiment for
// contractive maps from trace-class matrices to l-infinity.

#include <Eigen/Dense>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "entrolab/ell1geom.hpp"
#include "entrolab/packing.hpp"
#include "entrolab/rng.hpp"
#include "entrolab/symdyn.hpp"

namespace entrolab::statespace {

inline constexpr std::size_t kDefaultNetCap = 1'000'000;
inline constexpr std::size_t kMaxLgeomSize = 64;
inline constexpr std::size_t kMaxLgeomDimension = 24;
inline constexpr double kSubexponentialRate = 0.02;
inline constexpr double kExponentialRate = 0.1;

/// Weights over a finite set: nonnegative, summing to 1 (or to at most 1
/// when `subnormalized`).
struct SimplexPoint {
  std::vector<double> weights;
  bool subnormalized = false;

  void validate() const;  ///< throws OutOfRange
};

/// Pushforward of measures along the map of a finite system.
class InducedMap {
 public:
  explicit InducedMap(std::vector<std::size_t> map);

  std::size_t size() const noexcept { return map_.size(); }
  SimplexPoint operator()(const SimplexPoint& mu) const;
  /// Same on integer weights, so lattice points stay exact.
  std::vector<std::uint32_t> operator()(const std::vector<std::uint32_t>& weights) const;

 private:
  std::vector<std::size_t> map_;
};

InducedMap induced_simplex_map(const symdyn::FiniteMetricSystem& m);

/// Whether the functions of K together with the constant function tell all
/// points apart as measures, i.e. the matrix [K; 1] has rank |X|. Then the
/// weak* distance is a metric on the whole simplex.
bool separates_points(const ell1::FunctionFamily& k);

/// max_{f in K} |mu(f) - nu(f)|. Throws DimensionMismatch.
double weakstar_distance(const ell1::FunctionFamily& k, const SimplexPoint& mu, const SimplexPoint& nu);

enum class ObservableSet { Symbol, Coordinate, Indicators };
std::string_view to_string(ObservableSet s);
ObservableSet observable_set_from_string(std::string_view name);

/// Symbol: one +-1 function per nonzero symbol s, +1 where the label starts
///   with s (labels must be words). Coordinate: x -> d(x, x_0), the position
///   up to an additive constant for the line models. Indicators: one
///   indicator per point.
ell1::FunctionFamily observables_for(const symdyn::FiniteMetricSystem& m, ObservableSet set);

struct GrowthCount {
  std::size_t n = 0;
  std::size_t count = 0;
  bool exact = false;
};

enum class Verdict { Subexponential, Exponential, Inconclusive };
std::string_view to_string(Verdict v);

struct GrowthReport {
  std::vector<GrowthCount> counts;  ///< one per horizon, ascending n
  double epsilon = 0.0;
  double rate = 0.0;                ///< max(0, least-squares slope of log count on n)
  Verdict verdict = Verdict::Inconclusive;
  std::size_t net_points = 0;
  std::size_t net_denominator = 0;
  std::size_t effective_horizon = 0;  ///< beyond it the Bowen weak* metric no longer changes
  double max_snap_distance = 0.0;     ///< lattice pushforwards never leave the net
  bool separating = false;
};

Verdict classify_rate(double rate, std::size_t horizons);

/// Counts (n, epsilon)-separated subsets of the lattice net of
/// denominator ceil(1/net_resolution) under the Bowen extension of the
/// weak* metric from K. Exact when at most exact_cap distinct Bowen
/// feature vectors remain, greedy (seeded with the previous horizon's set)
/// otherwise. Throws NetTooLarge above net_cap.
GrowthReport simplex_sep_growth(const symdyn::FiniteMetricSystem& m, const ell1::FunctionFamily& k,
                                double net_resolution, double epsilon, std::vector<std::size_t> horizons,
                                std::size_t net_cap = kDefaultNetCap,
                                std::size_t exact_cap = packing::kDefaultExactCap);

/// Number of compositions of `total` into `parts` parts, saturating at
/// SIZE_MAX.
std::size_t lattice_net_size(std::size_t parts, std::size_t total);

/// Self-adjoint r x r observables with operator norm <= 1.
struct ObservableMap {
  std::size_t r = 0;
  std::vector<Eigen::MatrixXcd> observables;

  void validate() const;  ///< throws BadFamily
  std::size_t dimension() const noexcept { return observables.size(); }
};

/// Gaussian Hermitian observables rescaled to operator norm 1.
ObservableMap random_observable_map(std::size_t r, std::size_t n, std::uint64_t seed);

/// (trace(a b_i))_i. Throws SizeMismatch on a wrong-sized input and
/// BadFamily when a is not self-adjoint.
Eigen::VectorXd observable_map(const ObservableMap& obs, const Eigen::MatrixXcd& a);

/// Sum of singular values.
double trace_norm(const Eigen::MatrixXcd& a);

/// Gaussian Hermitian matrix normalized to trace norm 1.
Eigen::MatrixXcd random_unit_trace_input(std::size_t r, Rng& rng);

struct LgeomThreshold {
  double lambda = 0.0;
  double target = 0.0;  ///< e^{lambda n}
  bool reached = false;
};

struct LgeomReport {
  std::size_t r = 0;
  std::size_t n = 0;
  double epsilon = 0.0;
  std::size_t trials = 0;
  std::size_t inputs = 0;
  std::size_t max_separated = 0;
  bool exact = false;  ///< max_separated came from an exact search
  std::vector<std::size_t> per_trial;
  std::size_t contractivity_checked = 0;
  std::size_t contractivity_violations = 0;
  double max_contraction_ratio = 0.0;  ///< max ||phi(a)||_inf / ||a||_1
  std::vector<LgeomThreshold> thresholds;
};

/// For each trial, a random observable map is applied to `inputs` random
/// unit-trace-norm inputs and the largest epsilon-separated image set (sup
/// norm) is found. Throws CapExceeded when r > 64 or n > 24.
LgeomReport lgeom_experiment(std::size_t r, std::size_t n, double epsilon, std::size_t trials, std::uint64_t seed,
                             std::size_t inputs = 10'000, std::vector<double> lambda_grid = {});

/// lgeom_experiment at each n, with the log-count slope and verdict.
GrowthReport lgeom_growth(std::size_t r, const std::vector<std::size_t>& ns, double epsilon, std::size_t trials,
                          std::uint64_t seed, std::size_t inputs, std::vector<LgeomReport>* details = nullptr);

/// Points in R^d under the sup-norm distance.
packing::SeparationReport max_separated_subset(const std::vector<Eigen::VectorXd>& points, double epsilon,
                                               packing::Method method,
                                               std::size_t cap = packing::kDefaultExactCap);

}  // namespace entrolab::statespace
