#pragma once

// Packing/covering engine shared by the separated/spanning computations on
// finite metric systems and by the state-space experiments.
//
// A set is epsilon-separated when every pair is at distance > epsilon, and
// epsilon-spanning when every point lies within distance <= epsilon of it.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string_view>
#include <vector>

namespace entrolab::packing {

inline constexpr std::size_t kDefaultExactCap = 2000;
inline constexpr std::size_t kDefaultCoverNodeBudget = 5'000'000;
inline constexpr std::size_t kDefaultCliqueNodeBudget = 1'000'000;

enum class Method { Exact, Greedy };
enum class Mode { Separated, Spanning };

std::string_view to_string(Method m);
std::string_view to_string(Mode m);

struct SeparationReport {
  std::size_t n = 1;  ///< horizon of the Bowen metric the report refers to
  double epsilon = 0.0;
  std::size_t count = 0;
  bool exact = false;  ///< false: lower bound (separated) or upper bound (spanning)
  Mode mode = Mode::Separated;
  std::vector<std::size_t> members;  ///< the witnessing set, ascending
};

/// Dense undirected graph on bitset rows.
class BitGraph {
 public:
  explicit BitGraph(std::size_t vertices);

  std::size_t size() const noexcept { return n_; }
  std::size_t words() const noexcept { return words_; }
  void add_edge(std::size_t a, std::size_t b);
  bool adjacent(std::size_t a, std::size_t b) const;
  std::span<const std::uint64_t> row(std::size_t v) const {
    return {bits_.data() + v * words_, words_};
  }

 private:
  std::size_t n_;
  std::size_t words_;
  std::vector<std::uint64_t> bits_;
};

/// Maximum clique by branch and bound with greedy-colouring bounds.
/// Throws Intractable when the search exceeds node_budget.
std::vector<std::size_t> max_clique(const BitGraph& g, std::size_t node_budget = kDefaultCliqueNodeBudget);

/// First-fit clique in index order, optionally starting from a given clique.
std::vector<std::size_t> greedy_clique(const BitGraph& g, std::span<const std::size_t> start = {});

/// Minimum set of vertices whose closed neighbourhoods cover every vertex.
/// Throws Intractable when the search exceeds node_budget.
std::vector<std::size_t> min_dominating_set(const BitGraph& g,
                                            std::size_t node_budget = kDefaultCoverNodeBudget);

/// Largest-coverage-first dominating set, ties to the smallest index.
std::vector<std::size_t> greedy_dominating_set(const BitGraph& g);

using Metric = std::function<double(std::size_t, std::size_t)>;

/// Largest epsilon-separated subset of points {0..count-1}. Exact mode
/// throws Intractable above cap.
SeparationReport max_separated_subset(std::size_t count, const Metric& metric, double epsilon,
                                      Method method, std::size_t cap = kDefaultExactCap);

/// Smallest epsilon-spanning subset.
SeparationReport min_spanning_subset(std::size_t count, const Metric& metric, double epsilon,
                                     Method method, std::size_t cap = kDefaultExactCap);

}  // namespace entrolab::packing
