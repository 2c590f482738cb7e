#include "entrolab/matrixbound.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

#include "entrolab/error.hpp"
#include "entrolab/parallel.hpp"
#include "entrolab/rng.hpp"

namespace entrolab::matrixbound {

namespace {

constexpr double kCapSlack = 1e-9;
// Equality cases such as n = log2(k) with a = 1/log 2 round either way.
constexpr double kBoundRelativeSlack = 1e-12;

void check_common(double D, double delta, double a) {
  if (!(D >= 1.0) || !std::isfinite(D)) throw Error(ErrorCode::OutOfRange, "D must be a finite value >= 1");
  if (!(a > 0.0) || !std::isfinite(a)) throw Error(ErrorCode::OutOfRange, "a must be positive");
  if (!(delta >= 0.0)) throw Error(ErrorCode::OutOfRange, "delta must be >= 0");
  if (D * delta >= 1.0) throw Error(ErrorCode::DeltaTooLarge, "delta must be below 1/D");
}

}  // namespace

bool dimension_bound_check(const DimensionBoundInput& in) {
  if (in.n < 1 || in.k < 2) throw Error(ErrorCode::OutOfRange, "need n >= 1 and k >= 2");
  if (!(in.D >= 1.0) || !(in.a > 0.0)) throw Error(ErrorCode::OutOfRange, "need D >= 1 and a > 0");
  const double rhs = in.a * in.D * in.D * std::log(static_cast<double>(in.k));
  return static_cast<double>(in.n) <= rhs * (1.0 + kBoundRelativeSlack);
}

EntropyCertificate entropy_lower_bound(double mu, double D, double delta, double a, std::string omega_id) {
  if (!(mu > 0.0) || mu > 1.0) throw Error(ErrorCode::BadDensity, "density must lie in (0, 1]");
  check_common(D, delta, a);
  const double slack = 1.0 - D * delta;
  EntropyCertificate c;
  c.mu = mu;
  c.D = D;
  c.delta = delta;
  c.a = a;
  c.bound = mu / a / (D * D) * slack * slack;
  c.omega_id = std::move(omega_id);
  return c;
}

std::string_view to_string(RcpKind k) { return k == RcpKind::Lower ? "lower" : "upper"; }
std::string_view to_string(RcpDerivation d) {
  return d == RcpDerivation::L1Inversion ? "l1_inversion" : "cover_count";
}

RcpBound rcp_lower_bound(std::size_t n, double D, double delta, double a) {
  if (n < 1) throw Error(ErrorCode::OutOfRange, "n must be >= 1");
  check_common(D, delta, a);
  const double slack = 1.0 - D * delta;
  return {RcpKind::Lower, std::exp(static_cast<double>(n) * slack * slack / (a * D * D)), n, delta,
          RcpDerivation::L1Inversion};
}

RcpBound rcp_upper_from_cover(const symdyn::Subshift& s, const symdyn::CylinderPartition& u, std::size_t n) {
  if (n < 1) throw Error(ErrorCode::OutOfRange, "n must be >= 1");
  const symdyn::BigCount count = symdyn::join_cover_count(s, u, n);
  return {RcpKind::Upper, count.convert_to<double>(), n, 0.0, RcpDerivation::CoverCount};
}

double cb_obstruction_bound(std::size_t n) {
  if (n < 2) throw Error(ErrorCode::OutOfRange, "cb obstruction needs n >= 2");
  const double x = static_cast<double>(n);
  return x / (2.0 * std::sqrt(x - 1.0));
}

std::string_view to_string(FamilyKind k) {
  switch (k) {
    case FamilyKind::DiagonalSign: return "diagonal_sign";
    case FamilyKind::SymmetrizedRow: return "symmetrized_row";
    case FamilyKind::RandomGaussian: return "random_gaussian";
  }
  return "?";
}

FamilyKind family_kind_from_string(std::string_view name) {
  if (name == "diagonal_sign") return FamilyKind::DiagonalSign;
  if (name == "symmetrized_row") return FamilyKind::SymmetrizedRow;
  if (name == "random_gaussian") return FamilyKind::RandomGaussian;
  throw Error(ErrorCode::InvalidConfig, "unknown family kind '" + std::string(name) + "'");
}

ell1::MatrixFamily generate_family(FamilyKind kind, std::size_t n, std::size_t k, std::uint64_t seed) {
  if (n < 1) throw Error(ErrorCode::OutOfRange, "n must be >= 1");
  const auto ki = static_cast<Eigen::Index>(k);
  std::vector<Eigen::MatrixXcd> mats;
  std::string id = std::string(to_string(kind)) + "(n=" + std::to_string(n) + ";k=" + std::to_string(k);
  switch (kind) {
    case FamilyKind::DiagonalSign: {
      if (n >= 63 || k != (std::size_t{1} << n))
        throw Error(ErrorCode::SizeMismatch, "diagonal_sign needs k = 2^n");
      for (std::size_t j = 0; j < n; ++j) {
        Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(ki, ki);
        for (std::size_t i = 0; i < k; ++i)
          m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = ((i >> (n - 1 - j)) & 1U) != 0 ? -1.0 : 1.0;
        mats.push_back(std::move(m));
      }
      break;
    }
    case FamilyKind::SymmetrizedRow: {
      if (k < n + 1) throw Error(ErrorCode::SizeMismatch, "symmetrized_row needs k >= n + 1");
      for (std::size_t i = 1; i <= n; ++i) {
        Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(ki, ki);
        m(0, static_cast<Eigen::Index>(i)) = 1.0;
        m(static_cast<Eigen::Index>(i), 0) = 1.0;
        mats.push_back(std::move(m));
      }
      break;
    }
    case FamilyKind::RandomGaussian: {
      if (k < 1) throw Error(ErrorCode::SizeMismatch, "k must be >= 1");
      for (std::size_t i = 0; i < n; ++i) {
        Rng rng(derive_seed(seed, {k, i}));
        Eigen::MatrixXcd g(ki, ki);
        for (Eigen::Index r = 0; r < ki; ++r)
          for (Eigen::Index c = 0; c < ki; ++c) {
            const double re = rng.normal();
            g(r, c) = {re, rng.normal()};
          }
        Eigen::MatrixXcd h = (g + g.adjoint()) / 2.0;
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h, Eigen::EigenvaluesOnly);
        const double norm = std::max(std::abs(es.eigenvalues()(0)), std::abs(es.eigenvalues()(ki - 1)));
        h /= norm;
        mats.push_back((h + h.adjoint()) / 2.0);
      }
      id += ";seed=" + std::to_string(seed);
      break;
    }
  }
  return ell1::MatrixFamily(std::move(mats), id + ")");
}

LinearFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  LinearFit fit;
  fit.points = x.size();
  if (x.size() != y.size()) throw Error(ErrorCode::DimensionMismatch, "fit inputs differ in length");
  if (x.size() < 2) return fit;
  const double nx = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= nx;
  my /= nx;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx <= 1e-12 * std::max(1.0, mx * mx)) return fit;
  fit.slope_defined = true;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  for (std::size_t i = 0; i < x.size(); ++i) fit.residuals.push_back(y[i] - (fit.slope * x[i] + fit.intercept));
  return fit;
}

SweepReport sweep_and_fit(const SweepConfig& cfg) {
  if (cfg.kinds.empty() || cfg.k_values.empty()) throw Error(ErrorCode::InvalidConfig, "sweep needs kinds and k values");
  if (!(cfg.d_cap >= 1.0)) throw Error(ErrorCode::OutOfRange, "D_cap must be >= 1");
  if (cfg.replicates == 0) throw Error(ErrorCode::OutOfRange, "replicates must be positive");
  for (std::size_t k : cfg.k_values)
    if (k < 2) throw Error(ErrorCode::OutOfRange, "k must be >= 2");

  std::vector<FamilyKind> kinds = cfg.kinds;
  std::sort(kinds.begin(), kinds.end());
  kinds.erase(std::unique(kinds.begin(), kinds.end()), kinds.end());
  std::vector<std::size_t> ks = cfg.k_values;
  std::sort(ks.begin(), ks.end());
  ks.erase(std::unique(ks.begin(), ks.end()), ks.end());

  struct Cell {
    SweepRow row;
    std::size_t degenerate = 0;
  };
  const std::size_t per_kind = ks.size() * cfg.replicates;
  std::vector<Cell> cells(kinds.size() * per_kind);
  parallel_for(cells.size(), [&](std::size_t idx) {
    const FamilyKind kind = kinds[idx / per_kind];
    const std::size_t k = ks[(idx % per_kind) / cfg.replicates];
    const std::size_t rep = idx % cfg.replicates;
    const std::uint64_t seed = derive_seed(cfg.seed, {static_cast<std::uint64_t>(kind), k, rep});
    Cell& cell = cells[idx];
    cell.row = {kind, k, 0, 1.0, seed, false};
    bool stopped = false;
    for (std::size_t n = 1; n <= cfg.n_max; ++n) {
      std::optional<ell1::MatrixFamily> fam;
      try {
        fam.emplace(generate_family(kind, n, k, seed));
      } catch (const Error& e) {
        if (e.code() == ErrorCode::SizeMismatch) continue;
        throw;
      }
      const auto rep_d = ell1::lower_l1_constant(ell1::Family{*fam}, cfg.method, cfg.samples, derive_seed(seed, {n}));
      if (rep_d.degenerate) {
        ++cell.degenerate;
        stopped = true;
        break;
      }
      if (rep_d.distortion > cfg.d_cap + kCapSlack) {
        stopped = true;
        break;
      }
      cell.row.n_best = n;
      cell.row.d_measured = rep_d.distortion;
    }
    cell.row.n_capped = !stopped && cell.row.n_best == cfg.n_max;
  });

  SweepReport report;
  std::vector<double> all_x, all_y;
  for (std::size_t ki = 0; ki < kinds.size(); ++ki) {
    std::vector<double> kx, ky;
    for (std::size_t j = 0; j < ks.size(); ++j) {
      const std::size_t base = ki * per_kind + j * cfg.replicates;
      std::size_t best = base;
      for (std::size_t r = 0; r < cfg.replicates; ++r) {
        const Cell& c = cells[base + r];
        report.degenerate_skipped += c.degenerate;
        const SweepRow& b = cells[best].row;
        if (c.row.n_best > b.n_best || (c.row.n_best == b.n_best && c.row.d_measured < b.d_measured)) best = base + r;
      }
      const SweepRow& row = cells[best].row;
      report.rows.push_back(row);
      if (row.n_best == 0) continue;
      const double x = cfg.d_cap * cfg.d_cap * std::log(static_cast<double>(row.k));
      kx.push_back(x);
      ky.push_back(static_cast<double>(row.n_best));
    }
    all_x.insert(all_x.end(), kx.begin(), kx.end());
    all_y.insert(all_y.end(), ky.begin(), ky.end());
    report.per_kind.emplace_back(kinds[ki], fit_line(kx, ky));
  }
  report.fit = fit_line(all_x, all_y);
  return report;
}

}  // namespace entrolab::matrixbound
