#pragma once

// Shifts of finite type, their block languages, and entropy computations:
// block growth, cover joins, separated/spanning sets, and the Perron-root
// oracle.

#include <boost/multiprecision/cpp_int.hpp>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "entrolab/packing.hpp"

namespace entrolab::symdyn {

using Symbol = std::uint8_t;
using Word = std::vector<Symbol>;
using BigCount = boost::multiprecision::cpp_int;

/// Symbols print as base-36 digits, so alphabets up to 36 have string forms.
std::string format_word(const Word& w);
Word parse_word(std::string_view text, int alphabet_size);

/// Natural log of a nonnegative big integer (0 maps to -inf).
double log_count(const BigCount& c);

/// A shift of finite type over {0, ..., d-1}. The presentation graph has one
/// vertex per admissible block of length max(m-1, 1) (m = longest forbidden
/// word), trimmed to the blocks that occur in some bi-infinite sequence.
class Subshift {
 public:
  /// Throws BadWord for out-of-range symbols or empty words, EmptySubshift
  /// when no bi-infinite admissible sequence exists.
  static Subshift build(int alphabet_size, std::vector<Word> forbidden_words);

  int alphabet_size() const noexcept { return alphabet_size_; }
  const std::vector<Word>& forbidden_words() const noexcept { return forbidden_; }
  /// Longest forbidden word; 1 for the full shift.
  std::size_t block_order() const noexcept { return block_order_; }
  std::size_t state_length() const noexcept { return state_length_; }
  /// Essential blocks indexing the transition matrix, lexicographically sorted.
  const std::vector<Word>& states() const noexcept { return states_; }
  const std::vector<std::vector<std::uint8_t>>& transition_matrix() const noexcept { return matrix_; }
  const std::vector<std::vector<std::size_t>>& successors() const noexcept { return successors_; }

  bool has_forbidden_factor(const Word& w) const;
  std::string id() const;

 private:
  int alphabet_size_ = 1;
  std::vector<Word> forbidden_;
  std::size_t block_order_ = 1;
  std::size_t state_length_ = 1;
  std::vector<Word> states_;
  std::vector<std::vector<std::uint8_t>> matrix_;
  std::vector<std::vector<std::size_t>> successors_;
};

/// Admissible n-words (factors of the subshift), lexicographically sorted.
std::vector<Word> enumerate_blocks(const Subshift& s, std::size_t n);

/// |L_n| by transfer-matrix counting, exact at any size.
BigCount count_blocks(const Subshift& s, std::size_t n);

enum class EntropyMethod { BlockGrowth, CoverJoin, Separated, Spanning, Spectral };
std::string_view to_string(EntropyMethod m);

struct EntropySample {
  std::size_t n = 0;
  double value = 0.0;  ///< (1/n) log count, nats
};

struct EntropyEstimate {
  std::vector<EntropySample> samples;
  double extrapolated = 0.0;
  EntropyMethod method = EntropyMethod::BlockGrowth;
  std::string note;
};

/// (1/n) log |L_n| for n = 1..n_max; extrapolated is the minimum sample
/// (Fekete's lemma for the submultiplicative block counts).
EntropyEstimate entropy_block_growth(const Subshift& s, std::size_t n_max);

/// log of the Perron root of the transition matrix.
EntropyEstimate entropy_spectral(const Subshift& s);

/// A partition of the admissible window-words into labelled cells. The window
/// is a sorted set of nonnegative coordinate offsets.
struct CylinderPartition {
  std::vector<std::size_t> window;
  std::vector<std::vector<Word>> cells;
  std::vector<int> labels;

  static CylinderPartition symbol_partition(int alphabet_size);
  static CylinderPartition trivial(int alphabet_size);
  /// The 2-cell coarsenings {symbol k} | rest, labelled +1 / -1.
  static std::vector<CylinderPartition> binary_coarsenings(int alphabet_size);

  std::size_t span() const;
  /// Cell index of a word read on the window coordinates; -1 when absent.
  int cell_of(const Word& window_word) const;
  /// Cell index of a block of length >= span(), reading the window from its start.
  int cell_of_block(const Word& block) const;
  /// Checks disjointness and exhaustiveness over admissible window-words.
  void validate(const Subshift& s) const;
};

/// Vertex-labelled presentation: vertices are admissible blocks of length
/// max(state_length, span), each labelled with the partition cell it reads.
struct LabelledGraph {
  std::vector<Word> blocks;
  std::vector<std::size_t> label;
  std::vector<std::vector<std::size_t>> successors;
  std::size_t label_count = 0;
};

LabelledGraph labelled_graph(const Subshift& s, const CylinderPartition& u);

/// N(U v T^-1 U v ... v T^-(n-1) U): the number of distinct label
/// itineraries of length n, counted by subset construction.
BigCount join_cover_count(const Subshift& s, const CylinderPartition& u, std::size_t n);

/// (1/n) log join_cover_count for n = 1..n_max, extrapolated by the minimum.
EntropyEstimate entropy_cover_join(const Subshift& s, const CylinderPartition& u, std::size_t n_max);

/// A finite model of (X, d, T).
class FiniteMetricSystem {
 public:
  using Distance = std::function<double(std::size_t, std::size_t)>;

  FiniteMetricSystem(std::vector<std::string> labels, Distance distance, std::vector<std::size_t> map);
  static FiniteMetricSystem from_matrix(std::vector<std::string> labels, std::vector<double> distances,
                                        std::vector<std::size_t> map);

  std::size_t size() const noexcept { return map_.size(); }
  double distance(std::size_t a, std::size_t b) const { return distance_(a, b); }
  std::size_t map(std::size_t a) const { return map_[a]; }
  const std::vector<std::size_t>& mapping() const noexcept { return map_; }
  const std::string& label(std::size_t a) const { return labels_[a]; }

  /// Symmetry, zero diagonal and nonnegativity on all pairs; the triangle
  /// inequality on all triples when size() <= triangle_limit.
  void validate(double tolerance = 1e-12, std::size_t triangle_limit = 256) const;

  /// max_{0<=k<n} d(T^k a, T^k b).
  double bowen_distance(std::size_t n, std::size_t a, std::size_t b) const;

 private:
  std::vector<std::string> labels_;
  Distance distance_;
  std::vector<std::size_t> map_;
};

/// Compactification coordinate k/(1+|k|).
double compactification_coordinate(long k);

/// Z u {inf} truncated to {-m..m, inf}; k -> k+1, m -> inf, inf -> inf.
FiniteMetricSystem compactified_shift_model(int m);

/// Points of period dividing p in the full d-shift, with the left shift and
/// the ultrametric 2^-min{|k| : x_k != y_k}.
FiniteMetricSystem periodic_shift_model(int alphabet_size, int period);

/// Points on the real line with the identity map.
FiniteMetricSystem identity_system(std::vector<double> positions);

packing::SeparationReport separated_spanning(const FiniteMetricSystem& m, std::size_t n, double epsilon,
                                             packing::Mode mode, packing::Method method,
                                             std::size_t cap = packing::kDefaultExactCap);

}  // namespace entrolab::symdyn
