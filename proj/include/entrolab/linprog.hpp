#pragma once

// Dense simplex for small linear programs of the form
//
//   maximize c'y  subject to  A y <= b,  y >= 0,  with b >= 0,
//
// so the origin is a feasible starting vertex and no phase one is needed.
// Tableau pivots are Jordan exchanges with Bland's rule; the tableau is
// (rows + 1) x (columns + 1), which suits many constraints over few variables.

#include <Eigen/Dense>
#include <cstddef>

namespace entrolab::linprog {

enum class Status { Optimal, Unbounded, PivotLimit };

struct Result {
  Status status = Status::Optimal;
  double value = 0.0;
  Eigen::VectorXd solution;  ///< optimal y (Optimal)
  Eigen::VectorXd ray;       ///< y-direction with A d <= 0, c'd > 0 (Unbounded)
  std::size_t pivots = 0;
};

Result maximize(const Eigen::MatrixXd& a, const Eigen::VectorXd& b, const Eigen::VectorXd& c, double tolerance = 1e-12,
                std::size_t max_pivots = 200000);

}  // namespace entrolab::linprog
