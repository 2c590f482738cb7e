#pragma once

// Lower l1 constants and basis distortion of finite families.
//
// For a family f_1..f_n in a normed space, lambda is the minimum of
// ||sum c_k f_k|| over the l1 unit sphere. The map f_k -> e_k then has norm
// 1/lambda and its inverse has norm max_k ||f_k||, so the basis distortion is
// D = max_k ||f_k|| / lambda. Two norms are supported: the sup norm of
// real functions on a finite set and the operator norm of self-adjoint
// matrices.

#include <Eigen/Dense>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace entrolab::ell1 {

inline constexpr std::size_t kDefaultExactCap = 12;
inline constexpr double kDegenerateThreshold = 1e-12;
inline constexpr double kFaceTolerance = 1e-8;

/// Real functions on a finite set; row k holds f_k at each point.
class FunctionFamily {
 public:
  explicit FunctionFamily(Eigen::MatrixXd values, std::string id = {});

  std::size_t size() const noexcept { return static_cast<std::size_t>(values_.rows()); }
  std::size_t point_count() const noexcept { return static_cast<std::size_t>(values_.cols()); }
  const Eigen::MatrixXd& values() const noexcept { return values_; }
  const std::string& id() const noexcept { return id_; }

  double member_norm(std::size_t k) const;
  double norm_of(const Eigen::VectorXd& coefficients) const;

 private:
  Eigen::MatrixXd values_;
  std::string id_;
};

/// Self-adjoint k x k complex matrices with the operator norm.
class MatrixFamily {
 public:
  explicit MatrixFamily(std::vector<Eigen::MatrixXcd> matrices, std::string id = {});

  std::size_t size() const noexcept { return matrices_.size(); }
  std::size_t dim() const noexcept { return matrices_.empty() ? 0 : static_cast<std::size_t>(matrices_[0].rows()); }
  const std::vector<Eigen::MatrixXcd>& matrices() const noexcept { return matrices_; }
  const std::string& id() const noexcept { return id_; }

  Eigen::MatrixXcd combination(const Eigen::VectorXd& coefficients) const;
  double member_norm(std::size_t k) const;
  double norm_of(const Eigen::VectorXd& coefficients) const;
  /// True when every member is diagonal with real entries, in which case the
  /// operator norm is the sup norm over the diagonal.
  bool is_real_diagonal() const;
  FunctionFamily diagonal_family() const;

 private:
  std::vector<Eigen::MatrixXcd> matrices_;
  std::string id_;
};

using Family = std::variant<FunctionFamily, MatrixFamily>;

std::size_t family_size(const Family& f);
double family_norm(const Family& f, const Eigen::VectorXd& coefficients);
double family_member_norm(const Family& f, std::size_t k);
const std::string& family_id(const Family& f);

enum class DistortionMethod { ExactFace, Sampled };
std::string_view to_string(DistortionMethod m);
DistortionMethod distortion_method_from_string(std::string_view name);

struct DistortionReport {
  double lambda = 0.0;
  double max_norm = 0.0;
  double distortion = 0.0;  ///< +inf when degenerate
  Eigen::VectorXd witness;  ///< l1-normalized coefficients with norm lambda
  DistortionMethod method = DistortionMethod::ExactFace;
  /// exact_face: lambda minus a certified lower bound; sampled: final
  /// refinement step (no certificate).
  double tolerance = 0.0;
  bool degenerate = false;
  std::size_t evaluations = 0;
  std::string quantity = "basis distortion";
};

/// Throws Intractable when exact_face is requested with more than `cap`
/// members. Degeneracy is reported, not thrown; see require_nondegenerate.
DistortionReport lower_l1_constant(const Family& family, DistortionMethod method, std::size_t samples,
                                   std::uint64_t seed, std::size_t cap = kDefaultExactCap);

/// Throws Degenerate when the report has lambda below the threshold.
void require_nondegenerate(const DistortionReport& report);

/// For a +-1 valued family: whether every sign vector in {-1,1}^n appears
/// as a column. Throws NotSignValued otherwise.
bool verify_isometric_basis(const FunctionFamily& family);

enum class TransportMode { Diagram, Complexify };
std::string_view to_string(TransportMode m);
TransportMode transport_mode_from_string(std::string_view name);

/// Diagram: D / (1 - D delta), requiring delta < 1/D. Complexify: 2 D.
double transport_distortion(double d_in, double delta, TransportMode mode);

struct Type2Estimate {
  double ratio = 0.0;
  std::size_t trials = 0;
  std::string family_id;
};

/// sqrt(mean over random signs of ||sum eps_i x_i||^2) / sqrt(sum ||x_i||^2).
Type2Estimate estimate_type2(const Family& family, std::size_t trials, std::uint64_t seed);

/// Rows = members, columns = point values; '#' lines and blank lines skipped.
FunctionFamily load_function_family_csv(const std::string& path);
/// {"matrices": [[[[re, im], ...], ...], ...]} or a bare array of matrices;
/// real entries may be plain numbers.
MatrixFamily load_matrix_family_json(const std::string& path);

}  // namespace entrolab::ell1
