#pragma once

// Brute-force reference computations shared by unit and acceptance tests.

#include <Eigen/Dense>
#include <cstddef>
#include <functional>
#include <limits>
#include <vector>

namespace oracle {

using Norm = std::function<double(const Eigen::VectorXd&)>;

/// Calls visit(m) for every composition m of `total` into `parts` parts.
inline void for_each_composition(std::size_t parts, std::size_t total,
                                 const std::function<void(const std::vector<std::size_t>&)>& visit) {
  std::vector<std::size_t> m(parts, 0);
  std::function<void(std::size_t, std::size_t)> rec = [&](std::size_t i, std::size_t left) {
    if (i + 1 == parts) {
      m[i] = left;
      visit(m);
      return;
    }
    for (std::size_t v = 0; v <= left; ++v) {
      m[i] = v;
      rec(i + 1, left - v);
    }
  };
  rec(0, total);
}

struct GridMin {
  double value = std::numeric_limits<double>::infinity();
  Eigen::VectorXd point;
  std::size_t evaluations = 0;
};

/// Minimum of `norm` over the grid {sigma .* m / total} on every sign face,
/// followed by `zoom_levels` rounds of a 10x finer grid on a shrunken copy
/// of the face simplex centred at the incumbent.
inline GridMin l1_sphere_grid_min(std::size_t n, const Norm& norm, std::size_t total, std::size_t zoom_levels = 0,
                                  std::size_t zoom_total = 0) {
  GridMin best;
  const std::size_t faces = std::size_t{1} << (n - 1);
  Eigen::VectorXd best_sigma;
  for (std::size_t f = 0; f < faces; ++f) {
    Eigen::VectorXd sigma = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(n));
    for (std::size_t k = 1; k < n; ++k)
      if ((f >> (k - 1)) & 1U) sigma(static_cast<Eigen::Index>(k)) = -1.0;
    for_each_composition(n, total, [&](const std::vector<std::size_t>& m) {
      Eigen::VectorXd c(static_cast<Eigen::Index>(n));
      for (std::size_t k = 0; k < n; ++k)
        c(static_cast<Eigen::Index>(k)) = sigma(static_cast<Eigen::Index>(k)) * static_cast<double>(m[k]) / static_cast<double>(total);
      const double v = norm(c);
      ++best.evaluations;
      if (v < best.value) {
        best.value = v;
        best.point = c;
        best_sigma = sigma;
      }
    });
  }
  double radius = 1.0;
  for (std::size_t level = 0; level < zoom_levels; ++level) {
    radius *= 0.1;
    const Eigen::VectorXd centre = best.point.cwiseProduct(best_sigma);  // on the standard simplex
    const Eigen::VectorXd bary = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(n), 1.0 / static_cast<double>(n));
    for_each_composition(n, zoom_total, [&](const std::vector<std::size_t>& m) {
      Eigen::VectorXd q(static_cast<Eigen::Index>(n));
      for (std::size_t k = 0; k < n; ++k) q(static_cast<Eigen::Index>(k)) = static_cast<double>(m[k]) / static_cast<double>(zoom_total);
      const Eigen::VectorXd p = centre + radius * (q - bary);
      if (p.minCoeff() < 0.0) return;
      const Eigen::VectorXd c = p.cwiseProduct(best_sigma);
      const double v = norm(c);
      ++best.evaluations;
      if (v < best.value) {
        best.value = v;
        best.point = c;
      }
    });
  }
  return best;
}

}  // namespace oracle
