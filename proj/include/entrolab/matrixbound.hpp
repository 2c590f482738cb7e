#pragma once

// The dimension bound n <= a D^2 log k for D-isomorphic copies of l1^n
// inside M_k, the entropy and rcp bounds it yields, and sweeps that fit the
// constant a empirically. Logarithms are natural.

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "entrolab/ell1geom.hpp"
#include "entrolab/symdyn.hpp"

namespace entrolab::matrixbound {

struct DimensionBoundInput {
  std::size_t n = 1;
  std::size_t k = 2;
  double D = 1.0;
  double a = 1.0;
};

/// n <= a D^2 log k, up to a relative rounding slack of 1e-12. Throws OutOfRange when the input is outside its ranges.
bool dimension_bound_check(const DimensionBoundInput& in);

struct EntropyCertificate {
  double mu = 0.0;
  double D = 1.0;
  double delta = 0.0;
  double a = 1.0;
  double bound = 0.0;  ///< mu a^-1 D^-2 (1 - D delta)^2
  std::string omega_id;
  bool finite_horizon = true;  ///< mu comes from finitely many horizons, not a limit
};

/// Throws BadDensity unless 0 < mu <= 1, DeltaTooLarge when delta >= 1/D.
EntropyCertificate entropy_lower_bound(double mu, double D, double delta, double a, std::string omega_id = {});

enum class RcpKind { Lower, Upper };
enum class RcpDerivation { L1Inversion, CoverCount };
std::string_view to_string(RcpKind k);
std::string_view to_string(RcpDerivation d);

struct RcpBound {
  RcpKind kind = RcpKind::Lower;
  double value = 1.0;
  std::size_t horizon = 0;
  double delta = 0.0;
  RcpDerivation derivation = RcpDerivation::L1Inversion;
};

/// exp(n (1 - D delta)^2 / (a D^2)).
RcpBound rcp_lower_bound(std::size_t n, double D, double delta, double a);

/// The number of nonempty cells of the n-fold join of U.
RcpBound rcp_upper_from_cover(const symdyn::Subshift& s, const symdyn::CylinderPartition& u, std::size_t n);

/// n / (2 sqrt(n - 1)), n >= 2.
double cb_obstruction_bound(std::size_t n);

enum class FamilyKind { DiagonalSign, SymmetrizedRow, RandomGaussian };
std::string_view to_string(FamilyKind k);
FamilyKind family_kind_from_string(std::string_view name);

/// diagonal_sign: k = 2^n, member j has diagonal entry i equal to the sign of
///   bit (n-1-j) of i, so the diagonals list every sign pattern.
/// symmetrized_row: members e_{0i} + e_{i0}, i = 1..n, needs k >= n + 1.
/// random_gaussian: Hermitian parts of complex Gaussian matrices scaled to
///   operator norm 1; member i depends only on (seed, k, i), so families for
///   increasing n are nested.
/// Throws SizeMismatch when k does not fit the kind.
ell1::MatrixFamily generate_family(FamilyKind kind, std::size_t n, std::size_t k, std::uint64_t seed);

struct SweepConfig {
  std::vector<FamilyKind> kinds;
  std::vector<std::size_t> k_values;
  double d_cap = 1.0;
  std::uint64_t seed = 0;
  std::size_t replicates = 3;
  std::size_t n_max = ell1::kDefaultExactCap;
  ell1::DistortionMethod method = ell1::DistortionMethod::ExactFace;
  std::size_t samples = 20000;  ///< for the sampled method
};

struct SweepRow {
  FamilyKind kind;
  std::size_t k = 0;
  std::size_t n_best = 0;  ///< 0 when no size fits k
  double d_measured = 1.0;
  std::uint64_t seed = 0;
  bool n_capped = false;   ///< growth stopped at n_max, not by the cap on D
};

struct LinearFit {
  bool slope_defined = false;
  double slope = 0.0;      ///< a_fit
  double intercept = 0.0;
  std::vector<double> residuals;
  std::size_t points = 0;
};

struct SweepReport {
  std::vector<SweepRow> rows;  ///< sorted by (kind, k)
  LinearFit fit;               ///< n_best against d_cap^2 log k over all rows
  std::vector<std::pair<FamilyKind, LinearFit>> per_kind;
  std::size_t degenerate_skipped = 0;
};

/// Least squares with intercept; undefined with fewer than two distinct x.
LinearFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

/// For each (kind, k), the largest n whose generated family has basis
/// distortion <= d_cap, growing n from 1; best over the replicate seeds.
SweepReport sweep_and_fit(const SweepConfig& cfg);

}  // namespace entrolab::matrixbound
