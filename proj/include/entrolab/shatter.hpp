#pragma once

// Sign itineraries of a two-cell partition and shattered index sets.
//
// For f = chi_{U_+} - chi_{U_-}, the itinerary of x over n steps is
// (f(x), f(Tx), ..., f(T^{n-1}x)). An index set I is shattered by a set of
// itineraries E when restricting E to I gives every sign assignment on I.

#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "entrolab/symdyn.hpp"

namespace entrolab::shatter {

inline constexpr std::size_t kMaxPatternLength = 63;
inline constexpr std::size_t kDefaultExactCap = 16;
inline constexpr double kDefaultZeroThreshold = 1e-3;

enum class Method { Exact, Greedy };
std::string_view to_string(Method m);

/// Packed sign vector: bit k set means entry k is +1.
struct SignPattern {
  std::uint64_t bits = 0;
  std::size_t length = 0;

  int at(std::size_t k) const { return (bits >> k) & 1U ? 1 : -1; }
  /// '+' / '-' per entry, index 0 first.
  std::string to_string() const;
  static SignPattern from_string(std::string_view text);
};

struct PatternSet {
  std::size_t n = 0;
  std::vector<std::uint64_t> patterns;  ///< sorted, distinct
  std::string source;

  std::size_t size() const noexcept { return patterns.size(); }
  SignPattern pattern(std::size_t i) const { return {patterns[i], n}; }
  /// Throws OutOfRange when empty, mixed-length or oversized.
  void validate() const;
};

PatternSet make_pattern_set(std::size_t n, std::vector<std::uint64_t> patterns, std::string source = {});

struct ShatterCertificate {
  std::size_t n = 0;
  std::vector<std::size_t> indices;
  bool verified = false;
  double density = 0.0;
  Method method = Method::Exact;
};

struct IndicatorFunction {
  symdyn::CylinderPartition partition;
  std::size_t plus_cell = 0;  ///< index of U_{+1}; the other cell is U_{-1}

  int value(const symdyn::Word& window_word) const;
  int value_of_block(const symdyn::Word& block) const;
};

/// Picks the two-cell candidate with the largest cover-join entropy estimate
/// at horizon n_max. Throws AllZero when every estimate is below threshold.
std::pair<symdyn::CylinderPartition, symdyn::EntropyEstimate> select_binary_partition(
    const symdyn::Subshift& s, const std::vector<symdyn::CylinderPartition>& candidates, std::size_t n_max,
    double threshold = kDefaultZeroThreshold);

/// f = chi_{U_1} - chi_{U_-1}, where U_1 is the cell with the larger label
/// (the first cell on ties).
IndicatorFunction indicator_difference(const symdyn::CylinderPartition& u);

/// The set E_n of sign itineraries realized by admissible sequences.
PatternSet realized_patterns(const symdyn::Subshift& s, const IndicatorFunction& f, std::size_t n);

/// Number of distinct restrictions of E to I.
std::size_t restriction_count(const PatternSet& e, const std::vector<std::size_t>& indices);
bool is_shattered(const PatternSet& e, const std::vector<std::size_t>& indices);

/// Maximum shattered set (exact) or first-index greedy growth. Exact throws
/// Intractable when n exceeds cap.
ShatterCertificate max_shattered(const PatternSet& e, Method method, std::size_t cap = kDefaultExactCap);

/// Largest d with size > sum_{i<d} C(n, i): every pattern set of that size
/// shatters some d-element index set.
std::size_t sauer_shelah_threshold(std::size_t n, std::uint64_t size);

}  // namespace entrolab::shatter
