#include "entrolab/ell1geom.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <nlohmann/json.hpp>
#include <sstream>

#include "entrolab/error.hpp"
#include "entrolab/linprog.hpp"
#include "entrolab/parallel.hpp"
#include "entrolab/rng.hpp"

namespace entrolab::ell1 {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr std::size_t kMaxCutRounds = 600;
constexpr std::size_t kSampleBlock = 4096;
constexpr std::size_t kRefineCandidates = 8;

Eigen::VectorXd l1_normalized(Eigen::VectorXd c) {
  const double s = c.lpNorm<1>();
  if (s > 0.0) c /= s;
  return c;
}

double sign_of_face(std::uint64_t face, std::size_t k) {
  return k == 0 ? 1.0 : (((face >> (k - 1)) & 1U) != 0 ? -1.0 : 1.0);
}

Eigen::VectorXd face_signs(std::uint64_t face, std::size_t n) {
  Eigen::VectorXd s(static_cast<Eigen::Index>(n));
  for (std::size_t k = 0; k < n; ++k) s(static_cast<Eigen::Index>(k)) = sign_of_face(face, k);
  return s;
}

/// Columns of `values` with duplicates (up to sign) and zeros removed.
Eigen::MatrixXd distinct_columns(const Eigen::MatrixXd& values) {
  std::map<std::vector<double>, Eigen::Index> seen;
  std::vector<Eigen::Index> keep;
  for (Eigen::Index x = 0; x < values.cols(); ++x) {
    Eigen::VectorXd col = values.col(x);
    Eigen::Index lead = 0;
    while (lead < col.size() && col(lead) == 0.0) ++lead;
    if (lead == col.size()) continue;
    if (col(lead) < 0.0) col = -col;
    std::vector<double> key(col.data(), col.data() + col.size());
    for (double& v : key) v += 0.0;  // folds -0.0 into 0.0
    if (seen.emplace(std::move(key), x).second) keep.push_back(x);
  }
  Eigen::MatrixXd out(values.rows(), static_cast<Eigen::Index>(keep.size()));
  for (std::size_t i = 0; i < keep.size(); ++i) out.col(static_cast<Eigen::Index>(i)) = values.col(keep[i]);
  return out;
}

struct FaceResult {
  double upper = kInf;  ///< norm at `witness`
  double lower = 0.0;   ///< certified lower bound for the face minimum
  Eigen::VectorXd witness;
  std::size_t evaluations = 0;
};

/// max sum(y) s.t. |G_sigma y| <= 1 where rows of `cuts` are linear
/// minorants in coefficient space; returns LP result in y = sigma .* c.
linprog::Result solve_face_lp(const std::vector<Eigen::VectorXd>& cuts, const Eigen::VectorXd& sigma) {
  const Eigen::Index n = sigma.size();
  const Eigen::Index m = static_cast<Eigen::Index>(cuts.size());
  Eigen::MatrixXd a(2 * m, n);
  for (Eigen::Index i = 0; i < m; ++i) {
    const Eigen::RowVectorXd row = cuts[static_cast<std::size_t>(i)].cwiseProduct(sigma).transpose();
    a.row(2 * i) = row;
    a.row(2 * i + 1) = -row;
  }
  return linprog::maximize(a, Eigen::VectorXd::Ones(2 * m), Eigen::VectorXd::Ones(n));
}

FaceResult sup_norm_face(const FunctionFamily& fam, const Eigen::MatrixXd& columns, std::uint64_t face) {
  const std::size_t n = fam.size();
  const Eigen::VectorXd sigma = face_signs(face, n);
  std::vector<Eigen::VectorXd> cuts;
  cuts.reserve(static_cast<std::size_t>(columns.cols()));
  for (Eigen::Index x = 0; x < columns.cols(); ++x) cuts.emplace_back(columns.col(x));
  const linprog::Result lp = solve_face_lp(cuts, sigma);
  if (lp.status == linprog::Status::PivotLimit) throw Error(ErrorCode::NonConvergence, "face LP pivot limit reached");
  FaceResult r;
  r.evaluations = 1;
  if (lp.status == linprog::Status::Unbounded) {
    r.witness = l1_normalized(lp.ray.cwiseProduct(sigma));
    r.upper = fam.norm_of(r.witness);
    r.lower = 0.0;
    return r;
  }
  r.witness = l1_normalized(lp.solution.cwiseProduct(sigma));
  r.upper = fam.norm_of(r.witness);
  r.lower = std::min(r.upper, 1.0 / lp.value);
  return r;
}

struct EigenCut {
  double norm;
  Eigen::VectorXd top;
  Eigen::VectorXd bottom;
};

/// Operator norm of A(c) with the linear minorants v* F_k v from the extreme
/// eigenvectors.
EigenCut eigen_cut(const MatrixFamily& fam, const Eigen::VectorXd& c) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(fam.combination(c));
  const Eigen::VectorXd& ev = es.eigenvalues();
  const Eigen::Index last = ev.size() - 1;
  const Eigen::VectorXcd vt = es.eigenvectors().col(last);
  const Eigen::VectorXcd vb = es.eigenvectors().col(0);
  const Eigen::Index n = static_cast<Eigen::Index>(fam.size());
  EigenCut cut{std::max(std::abs(ev(0)), std::abs(ev(last))), Eigen::VectorXd(n), Eigen::VectorXd(n)};
  for (Eigen::Index k = 0; k < n; ++k) {
    const Eigen::MatrixXcd& f = fam.matrices()[static_cast<std::size_t>(k)];
    cut.top(k) = (vt.adjoint() * f * vt)(0, 0).real();
    cut.bottom(k) = (vb.adjoint() * f * vb)(0, 0).real();
  }
  return cut;
}

/// Kelley cutting planes on one face: the LP over accumulated eigenvector
/// minorants bounds the face minimum from below, evaluated iterates bound it
/// from above. Stops at `tol` or once the lower bound reaches `prune`.
FaceResult operator_face(const MatrixFamily& fam, std::uint64_t face, double tol, double prune) {
  const std::size_t n = fam.size();
  const Eigen::VectorXd sigma = face_signs(face, n);
  std::vector<Eigen::VectorXd> cuts;
  FaceResult r;
  auto visit = [&](const Eigen::VectorXd& c) {
    EigenCut ec = eigen_cut(fam, c);
    ++r.evaluations;
    if (ec.norm < r.upper) {
      r.upper = ec.norm;
      r.witness = c;
    }
    cuts.push_back(std::move(ec.top));
    cuts.push_back(std::move(ec.bottom));
  };
  visit(sigma / static_cast<double>(n));
  for (std::size_t k = 0; k < n; ++k) {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
    v(static_cast<Eigen::Index>(k)) = sigma(static_cast<Eigen::Index>(k));
    visit(v);
  }
  for (std::size_t round = 0; round < kMaxCutRounds; ++round) {
    const linprog::Result lp = solve_face_lp(cuts, sigma);
    if (lp.status == linprog::Status::PivotLimit) break;
    Eigen::VectorXd c;
    if (lp.status == linprog::Status::Unbounded) {
      c = l1_normalized(lp.ray.cwiseProduct(sigma));
      r.lower = 0.0;
      visit(c);
      if (r.upper < kDegenerateThreshold) break;
      continue;
    }
    r.lower = std::max(r.lower, 1.0 / lp.value);
    if (r.upper - r.lower <= tol || r.lower >= prune) break;
    visit(l1_normalized(lp.solution.cwiseProduct(sigma)));
    if (r.upper - r.lower <= tol) break;
  }
  r.lower = std::min(r.lower, r.upper);
  return r;
}

DistortionReport finish(const Family& family, DistortionMethod method, Eigen::VectorXd witness, double tolerance,
                        std::size_t evaluations) {
  DistortionReport rep;
  rep.method = method;
  rep.witness = l1_normalized(std::move(witness));
  rep.lambda = family_norm(family, rep.witness);
  rep.max_norm = 0.0;
  for (std::size_t k = 0; k < family_size(family); ++k) rep.max_norm = std::max(rep.max_norm, family_member_norm(family, k));
  rep.tolerance = tolerance;
  rep.evaluations = evaluations;
  rep.degenerate = rep.lambda < kDegenerateThreshold;
  rep.distortion = rep.degenerate ? kInf : std::max(1.0, rep.max_norm / rep.lambda);
  return rep;
}

DistortionReport exact_sup_norm(const Family& original, const FunctionFamily& fam) {
  const std::size_t n = fam.size();
  const Eigen::MatrixXd columns = distinct_columns(fam.values());
  const std::size_t faces = std::size_t{1} << (n - 1);
  std::vector<FaceResult> results(faces);
  parallel_for(faces, [&](std::size_t f) { results[f] = sup_norm_face(fam, columns, f); });
  std::size_t best = 0;
  double lower = kInf;
  std::size_t evals = 0;
  for (std::size_t f = 0; f < faces; ++f) {
    if (results[f].upper < results[best].upper) best = f;
    lower = std::min(lower, results[f].lower);
    evals += results[f].evaluations;
  }
  DistortionReport rep = finish(original, DistortionMethod::ExactFace, results[best].witness, 0.0, evals);
  rep.tolerance = std::max(0.0, rep.lambda - lower);
  return rep;
}

DistortionReport exact_operator(const MatrixFamily& fam) {
  const std::size_t n = fam.size();
  const std::size_t faces = std::size_t{1} << (n - 1);
  double scale = 0.0;
  for (std::size_t k = 0; k < n; ++k) scale = std::max(scale, fam.member_norm(k));
  const double tol = kFaceTolerance * scale;

  // Common pruning level from the face barycenters, fixed before the
  // parallel phase so face results do not depend on scheduling.
  std::vector<double> bary(faces);
  parallel_for(faces, [&](std::size_t f) {
    bary[f] = fam.norm_of(face_signs(f, n) / static_cast<double>(n));
  });
  std::size_t seed_face = 0;
  for (std::size_t f = 1; f < faces; ++f)
    if (bary[f] < bary[seed_face]) seed_face = f;
  double prune = bary[seed_face];
  Eigen::VectorXd prune_witness = face_signs(seed_face, n) / static_cast<double>(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double v = fam.member_norm(k);
    if (v < prune) {
      prune = v;
      prune_witness = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
      prune_witness(static_cast<Eigen::Index>(k)) = 1.0;
    }
  }

  std::vector<FaceResult> results(faces);
  parallel_for(faces, [&](std::size_t f) { results[f] = operator_face(fam, f, tol, prune); });
  double best_value = prune;
  Eigen::VectorXd best_witness = prune_witness;
  double lower = kInf;
  std::size_t evals = faces + n;
  for (std::size_t f = 0; f < faces; ++f) {
    if (results[f].upper < best_value) {
      best_value = results[f].upper;
      best_witness = results[f].witness;
    }
    lower = std::min(lower, results[f].lower);
    evals += results[f].evaluations;
  }
  DistortionReport rep = finish(Family{fam}, DistortionMethod::ExactFace, best_witness, 0.0, evals);
  rep.tolerance = std::max(0.0, rep.lambda - std::min(lower, rep.lambda));
  return rep;
}

/// Pattern search on the l1 sphere from `start`: coordinate and pairwise
/// moves plus a few random directions, halving the step when stuck.
struct Refined {
  Eigen::VectorXd point;
  double value;
  double step;
  std::size_t evaluations;
};

Refined refine(const Family& family, Eigen::VectorXd start, double value, Rng& rng) {
  const Eigen::Index n = start.size();
  std::vector<Eigen::VectorXd> dirs;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (double s : {1.0, -1.0}) {
      Eigen::VectorXd d = Eigen::VectorXd::Zero(n);
      d(i) = s;
      dirs.push_back(d);
    }
    for (Eigen::Index j = i + 1; j < n; ++j) {
      for (double si : {1.0, -1.0})
        for (double sj : {1.0, -1.0}) {
          Eigen::VectorXd d = Eigen::VectorXd::Zero(n);
          d(i) = si;
          d(j) = sj;
          dirs.push_back(d);
        }
    }
  }
  const std::size_t fixed_dirs = dirs.size();
  const std::size_t random_dirs = static_cast<std::size_t>(4 * n);
  Refined r{std::move(start), value, 0.1, 0};
  constexpr double kMinStep = 1e-11;
  constexpr std::size_t kMaxMovesPerStep = 2000;
  while (r.step >= kMinStep) {
    dirs.resize(fixed_dirs);
    for (std::size_t t = 0; t < random_dirs; ++t) {
      Eigen::VectorXd d(n);
      for (Eigen::Index i = 0; i < n; ++i) d(i) = rng.normal();
      dirs.push_back(d / d.lpNorm<1>());
    }
    std::size_t moves = 0;
    bool improved = true;
    while (improved && moves < kMaxMovesPerStep) {
      improved = false;
      for (const Eigen::VectorXd& d : dirs) {
        Eigen::VectorXd cand = r.point + r.step * d;
        const double s = cand.lpNorm<1>();
        if (s == 0.0) continue;
        cand /= s;
        const double v = family_norm(family, cand);
        ++r.evaluations;
        if (v < r.value) {
          r.value = v;
          r.point = std::move(cand);
          improved = true;
          ++moves;
          break;
        }
      }
    }
    r.step *= 0.5;
  }
  return r;
}

DistortionReport sampled(const Family& family, std::size_t samples, std::uint64_t seed) {
  const std::size_t n = family_size(family);
  if (samples == 0) throw Error(ErrorCode::OutOfRange, "samples must be positive");
  const std::size_t blocks = (samples + kSampleBlock - 1) / kSampleBlock;
  struct Candidate {
    double value;
    std::size_t index;
    Eigen::VectorXd point;
  };
  std::vector<std::vector<Candidate>> per_block(blocks);
  parallel_for(blocks, [&](std::size_t b) {
    Rng rng(derive_seed(seed, {0x5A, b}));
    const std::size_t lo = b * kSampleBlock;
    const std::size_t hi = std::min(samples, lo + kSampleBlock);
    std::vector<Candidate>& keep = per_block[b];
    for (std::size_t i = lo; i < hi; ++i) {
      Eigen::VectorXd c(static_cast<Eigen::Index>(n));
      for (std::size_t k = 0; k < n; ++k)
        c(static_cast<Eigen::Index>(k)) = static_cast<double>(rng.sign()) * rng.exponential();
      c = l1_normalized(c);
      keep.push_back({family_norm(family, c), i, std::move(c)});
      std::sort(keep.begin(), keep.end(), [](const Candidate& a, const Candidate& b) {
        return a.value < b.value || (a.value == b.value && a.index < b.index);
      });
      if (keep.size() > kRefineCandidates) keep.pop_back();
    }
  });
  std::vector<Candidate> all;
  for (auto& v : per_block)
    for (auto& c : v) all.push_back(std::move(c));
  std::sort(all.begin(), all.end(), [](const Candidate& a, const Candidate& b) {
    return a.value < b.value || (a.value == b.value && a.index < b.index);
  });
  if (all.size() > kRefineCandidates) all.resize(kRefineCandidates);

  std::vector<Refined> refined(all.size());
  parallel_for(all.size(), [&](std::size_t i) {
    Rng rng(derive_seed(seed, {0x7E, i}));
    refined[i] = refine(family, all[i].point, all[i].value, rng);
  });
  std::size_t best = 0;
  std::size_t evals = samples;
  for (std::size_t i = 0; i < refined.size(); ++i) {
    evals += refined[i].evaluations;
    if (refined[i].value < refined[best].value) best = i;
  }
  return finish(family, DistortionMethod::Sampled, refined[best].point, refined[best].step, evals);
}

}  // namespace

FunctionFamily::FunctionFamily(Eigen::MatrixXd values, std::string id) : values_(std::move(values)), id_(std::move(id)) {
  if (values_.rows() == 0 || values_.cols() == 0) throw Error(ErrorCode::BadFamily, "family needs members and points");
  if (!values_.allFinite()) throw Error(ErrorCode::BadFamily, "family values must be finite");
  for (Eigen::Index k = 0; k < values_.rows(); ++k)
    if (values_.row(k).cwiseAbs().maxCoeff() == 0.0)
      throw Error(ErrorCode::BadFamily, "member " + std::to_string(k) + " is identically zero");
}

double FunctionFamily::member_norm(std::size_t k) const {
  return values_.row(static_cast<Eigen::Index>(k)).cwiseAbs().maxCoeff();
}

double FunctionFamily::norm_of(const Eigen::VectorXd& coefficients) const {
  if (coefficients.size() != values_.rows()) throw Error(ErrorCode::DimensionMismatch, "coefficient count");
  return (coefficients.transpose() * values_).cwiseAbs().maxCoeff();
}

MatrixFamily::MatrixFamily(std::vector<Eigen::MatrixXcd> matrices, std::string id)
    : matrices_(std::move(matrices)), id_(std::move(id)) {
  if (matrices_.empty()) throw Error(ErrorCode::BadFamily, "family needs members");
  const Eigen::Index k = matrices_[0].rows();
  if (k == 0) throw Error(ErrorCode::BadFamily, "matrices must be nonempty");
  for (std::size_t i = 0; i < matrices_.size(); ++i) {
    const Eigen::MatrixXcd& m = matrices_[i];
    if (m.rows() != k || m.cols() != k) throw Error(ErrorCode::DimensionMismatch, "matrices must share one square size");
    if (!m.allFinite()) throw Error(ErrorCode::BadFamily, "matrix entries must be finite");
    if ((m - m.adjoint()).cwiseAbs().maxCoeff() > 1e-12)
      throw Error(ErrorCode::BadFamily, "member " + std::to_string(i) + " is not self-adjoint");
    if (m.cwiseAbs().maxCoeff() == 0.0) throw Error(ErrorCode::BadFamily, "member " + std::to_string(i) + " is zero");
  }
}

Eigen::MatrixXcd MatrixFamily::combination(const Eigen::VectorXd& coefficients) const {
  if (static_cast<std::size_t>(coefficients.size()) != matrices_.size())
    throw Error(ErrorCode::DimensionMismatch, "coefficient count");
  Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(matrices_[0].rows(), matrices_[0].cols());
  for (std::size_t i = 0; i < matrices_.size(); ++i) a += coefficients(static_cast<Eigen::Index>(i)) * matrices_[i];
  return a;
}

double MatrixFamily::member_norm(std::size_t k) const {
  Eigen::VectorXd c = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(size()));
  c(static_cast<Eigen::Index>(k)) = 1.0;
  return norm_of(c);
}

double MatrixFamily::norm_of(const Eigen::VectorXd& coefficients) const {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(combination(coefficients), Eigen::EigenvaluesOnly);
  const Eigen::VectorXd& ev = es.eigenvalues();
  return std::max(std::abs(ev(0)), std::abs(ev(ev.size() - 1)));
}

bool MatrixFamily::is_real_diagonal() const {
  for (const auto& m : matrices_) {
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      for (Eigen::Index j = 0; j < m.cols(); ++j) {
        if (i != j && m(i, j) != std::complex<double>(0.0, 0.0)) return false;
        if (i == j && m(i, j).imag() != 0.0) return false;
      }
  }
  return true;
}

FunctionFamily MatrixFamily::diagonal_family() const {
  Eigen::MatrixXd v(static_cast<Eigen::Index>(size()), static_cast<Eigen::Index>(dim()));
  for (std::size_t i = 0; i < size(); ++i) v.row(static_cast<Eigen::Index>(i)) = matrices_[i].diagonal().real().transpose();
  return FunctionFamily(std::move(v), id_);
}

std::size_t family_size(const Family& f) {
  return std::visit([](const auto& x) { return x.size(); }, f);
}

double family_norm(const Family& f, const Eigen::VectorXd& coefficients) {
  return std::visit([&](const auto& x) { return x.norm_of(coefficients); }, f);
}

double family_member_norm(const Family& f, std::size_t k) {
  return std::visit([&](const auto& x) { return x.member_norm(k); }, f);
}

const std::string& family_id(const Family& f) {
  return std::visit([](const auto& x) -> const std::string& { return x.id(); }, f);
}

std::string_view to_string(DistortionMethod m) {
  return m == DistortionMethod::ExactFace ? "exact_face" : "sampled";
}

DistortionMethod distortion_method_from_string(std::string_view name) {
  if (name == "exact_face" || name == "exact") return DistortionMethod::ExactFace;
  if (name == "sampled") return DistortionMethod::Sampled;
  throw Error(ErrorCode::InvalidConfig, "unknown distortion method '" + std::string(name) + "'");
}

DistortionReport lower_l1_constant(const Family& family, DistortionMethod method, std::size_t samples,
                                   std::uint64_t seed, std::size_t cap) {
  const std::size_t n = family_size(family);
  if (n == 0) throw Error(ErrorCode::BadFamily, "empty family");
  if (method == DistortionMethod::Sampled) return sampled(family, samples, seed);
  if (n > cap || n > 62)
    throw Error(ErrorCode::Intractable,
                "exact face search over " + std::to_string(n) + " members exceeds cap " + std::to_string(cap));
  if (const auto* fam = std::get_if<FunctionFamily>(&family)) return exact_sup_norm(family, *fam);
  const auto& mat = std::get<MatrixFamily>(family);
  if (mat.is_real_diagonal()) return exact_sup_norm(family, mat.diagonal_family());
  return exact_operator(mat);
}

void require_nondegenerate(const DistortionReport& report) {
  if (report.degenerate)
    throw Error(ErrorCode::Degenerate, "family is linearly dependent along a sign pattern (lambda < 1e-12)");
}

bool verify_isometric_basis(const FunctionFamily& family) {
  const std::size_t n = family.size();
  if (n > 63) throw Error(ErrorCode::OutOfRange, "at most 63 members supported");
  const Eigen::MatrixXd& v = family.values();
  std::vector<std::uint64_t> seen;
  seen.reserve(family.point_count());
  for (Eigen::Index x = 0; x < v.cols(); ++x) {
    std::uint64_t bits = 0;
    for (Eigen::Index k = 0; k < v.rows(); ++k) {
      const double e = v(k, x);
      if (e == 1.0)
        bits |= std::uint64_t{1} << k;
      else if (e != -1.0)
        throw Error(ErrorCode::NotSignValued, "family value " + std::to_string(e) + " is not +-1");
    }
    seen.push_back(bits);
  }
  std::sort(seen.begin(), seen.end());
  seen.erase(std::unique(seen.begin(), seen.end()), seen.end());
  return n < 64 && seen.size() == (std::uint64_t{1} << n);
}

std::string_view to_string(TransportMode m) { return m == TransportMode::Diagram ? "diagram" : "complexify"; }

TransportMode transport_mode_from_string(std::string_view name) {
  if (name == "diagram") return TransportMode::Diagram;
  if (name == "complexify") return TransportMode::Complexify;
  throw Error(ErrorCode::InvalidConfig, "unknown transport mode '" + std::string(name) + "'");
}

double transport_distortion(double d_in, double delta, TransportMode mode) {
  if (!(d_in >= 1.0) || !std::isfinite(d_in)) throw Error(ErrorCode::OutOfRange, "input distortion must be >= 1");
  if (!(delta >= 0.0)) throw Error(ErrorCode::OutOfRange, "delta must be >= 0");
  if (mode == TransportMode::Complexify) return 2.0 * d_in;
  if (d_in * delta >= 1.0) throw Error(ErrorCode::DeltaTooLarge, "delta must be below 1/D");
  return d_in / (1.0 - d_in * delta);
}

Type2Estimate estimate_type2(const Family& family, std::size_t trials, std::uint64_t seed) {
  if (trials == 0) throw Error(ErrorCode::OutOfRange, "trials must be positive");
  const std::size_t n = family_size(family);
  double denom = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double v = family_member_norm(family, k);
    denom += v * v;
  }
  Rng rng(seed);
  double acc = 0.0;
  Eigen::VectorXd eps(static_cast<Eigen::Index>(n));
  for (std::size_t t = 0; t < trials; ++t) {
    for (std::size_t k = 0; k < n; ++k) eps(static_cast<Eigen::Index>(k)) = rng.sign();
    const double v = family_norm(family, eps);
    acc += v * v;
  }
  return {std::sqrt(acc / static_cast<double>(trials)) / std::sqrt(denom), trials, family_id(family)};
}

FunctionFamily load_function_family_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::InvalidConfig, "cannot open family file '" + path + "'");
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos || line[first] == '#') continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        std::size_t used = 0;
        row.push_back(std::stod(cell, &used));
        if (cell.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(cell);
      } catch (const std::exception&) {
        throw Error(ErrorCode::BadFamily, "non-numeric value '" + cell + "' in " + path);
      }
    }
    if (!rows.empty() && row.size() != rows[0].size()) throw Error(ErrorCode::DimensionMismatch, "ragged rows in " + path);
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw Error(ErrorCode::BadFamily, "no rows in " + path);
  Eigen::MatrixXd v(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows[0].size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j) v(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  return FunctionFamily(std::move(v), path);
}

MatrixFamily load_matrix_family_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::InvalidConfig, "cannot open family file '" + path + "'");
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::BadFamily, std::string("invalid JSON in ") + path + ": " + e.what());
  }
  const nlohmann::json& list = doc.is_object() ? doc.at("matrices") : doc;
  if (!list.is_array()) throw Error(ErrorCode::BadFamily, "expected an array of matrices");
  std::vector<Eigen::MatrixXcd> mats;
  for (const auto& m : list) {
    if (!m.is_array() || m.empty()) throw Error(ErrorCode::BadFamily, "matrix must be a nonempty array of rows");
    const auto rows = static_cast<Eigen::Index>(m.size());
    const auto cols = static_cast<Eigen::Index>(m[0].size());
    Eigen::MatrixXcd a(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
      const auto& row = m[static_cast<std::size_t>(i)];
      if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols)
        throw Error(ErrorCode::DimensionMismatch, "ragged matrix rows");
      for (Eigen::Index j = 0; j < cols; ++j) {
        const auto& e = row[static_cast<std::size_t>(j)];
        if (e.is_number())
          a(i, j) = {e.get<double>(), 0.0};
        else if (e.is_array() && e.size() == 2 && e[0].is_number() && e[1].is_number())
          a(i, j) = {e[0].get<double>(), e[1].get<double>()};
        else
          throw Error(ErrorCode::BadFamily, "matrix entries must be numbers or [re, im] pairs");
      }
    }
    mats.push_back(std::move(a));
  }
  return MatrixFamily(std::move(mats), path);
}

}  // namespace entrolab::ell1
