#include "entrolab/linprog.hpp"

#include <algorithm>
#include <limits>
#include <vector>

#include "entrolab/error.hpp"

namespace entrolab::linprog {

Result maximize(const Eigen::MatrixXd& a, const Eigen::VectorXd& b, const Eigen::VectorXd& c, double tolerance,
                std::size_t max_pivots) {
  const Eigen::Index m = a.rows();
  const Eigen::Index n = a.cols();
  if (b.size() != m || c.size() != n) throw Error(ErrorCode::DimensionMismatch, "LP data sizes disagree");
  if (m > 0 && b.minCoeff() < 0.0) throw Error(ErrorCode::OutOfRange, "LP right-hand side must be nonnegative");

  // Row i: basic_i = T(i, n) + sum_j T(i, j) * nonbasic_j; last row is the objective.
  Eigen::MatrixXd t(m + 1, n + 1);
  t.topLeftCorner(m, n) = -a;
  t.topRightCorner(m, 1) = b;
  t.bottomLeftCorner(1, n) = c.transpose();
  t(m, n) = 0.0;

  // Variable ids: 0..n-1 are y, n..n+m-1 are slacks.
  std::vector<Eigen::Index> nonbasic(static_cast<std::size_t>(n));
  std::vector<Eigen::Index> basic(static_cast<std::size_t>(m));
  for (Eigen::Index j = 0; j < n; ++j) nonbasic[static_cast<std::size_t>(j)] = j;
  for (Eigen::Index i = 0; i < m; ++i) basic[static_cast<std::size_t>(i)] = n + i;

  Result result;
  const double scale = std::max(1.0, c.cwiseAbs().maxCoeff());
  for (;;) {
    Eigen::Index enter = -1;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (t(m, j) > tolerance * scale &&
          (enter < 0 || nonbasic[static_cast<std::size_t>(j)] < nonbasic[static_cast<std::size_t>(enter)]))
        enter = j;
    }
    if (enter < 0) break;

    double best_ratio = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < m; ++i) {
      if (t(i, enter) < -tolerance) best_ratio = std::min(best_ratio, t(i, n) / -t(i, enter));
    }
    Eigen::Index leave = -1;
    for (Eigen::Index i = 0; i < m; ++i) {
      if (t(i, enter) >= -tolerance) continue;
      if (t(i, n) / -t(i, enter) > best_ratio + tolerance) continue;
      if (leave < 0 || basic[static_cast<std::size_t>(i)] < basic[static_cast<std::size_t>(leave)]) leave = i;
    }
    if (leave < 0) {
      result.status = Status::Unbounded;
      result.ray = Eigen::VectorXd::Zero(n);
      const Eigen::Index var = nonbasic[static_cast<std::size_t>(enter)];
      if (var < n) result.ray(var) = 1.0;
      for (Eigen::Index i = 0; i < m; ++i) {
        const Eigen::Index bv = basic[static_cast<std::size_t>(i)];
        if (bv < n) result.ray(bv) = t(i, enter);
      }
      result.value = std::numeric_limits<double>::infinity();
      return result;
    }
    if (++result.pivots > max_pivots) {
      result.status = Status::PivotLimit;
      return result;
    }

    // Jordan exchange on (leave, enter).
    const double p = t(leave, enter);
    Eigen::RowVectorXd pivot_row = -t.row(leave) / p;
    pivot_row(enter) = 1.0 / p;
    for (Eigen::Index i = 0; i <= m; ++i) {
      if (i == leave) continue;
      const double f = t(i, enter);
      if (f == 0.0) continue;
      t.row(i) += f * pivot_row;
      t(i, enter) = f / p;
    }
    t.row(leave) = pivot_row;
    std::swap(basic[static_cast<std::size_t>(leave)], nonbasic[static_cast<std::size_t>(enter)]);
  }

  result.status = Status::Optimal;
  result.value = t(m, n);
  result.solution = Eigen::VectorXd::Zero(n);
  for (Eigen::Index i = 0; i < m; ++i) {
    const Eigen::Index bv = basic[static_cast<std::size_t>(i)];
    if (bv < n) result.solution(bv) = std::max(0.0, t(i, n));
  }
  return result;
}

}  // namespace entrolab::linprog
