#include "entrolab/shatter.hpp"

#include <algorithm>
#include <cstdint>
#include <bit>
#include <map>

#include "entrolab/error.hpp"

namespace entrolab::shatter {

using symdyn::BigCount;
using symdyn::CylinderPartition;
using symdyn::Subshift;
using symdyn::Word;

std::string_view to_string(Method m) { return m == Method::Exact ? "exact" : "greedy"; }

std::string SignPattern::to_string() const {
  std::string out(length, '-');
  for (std::size_t k = 0; k < length; ++k)
    if ((bits >> k) & 1U) out[k] = '+';
  return out;
}

SignPattern SignPattern::from_string(std::string_view text) {
  if (text.empty() || text.size() > kMaxPatternLength)
    throw Error(ErrorCode::OutOfRange, "sign pattern length must be in [1, 63]");
  SignPattern p;
  p.length = text.size();
  for (std::size_t k = 0; k < text.size(); ++k) {
    if (text[k] == '+') p.bits |= std::uint64_t{1} << k;
    else if (text[k] != '-') throw Error(ErrorCode::NotSignValued, "pattern characters must be '+' or '-'");
  }
  return p;
}

void PatternSet::validate() const {
  if (n == 0 || n > kMaxPatternLength) throw Error(ErrorCode::OutOfRange, "pattern length must be in [1, 63]");
  if (patterns.empty()) throw Error(ErrorCode::OutOfRange, "pattern set is empty");
  const std::uint64_t limit = n == 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << n) - 1;
  for (auto p : patterns)
    if ((p & ~limit) != 0) throw Error(ErrorCode::OutOfRange, "pattern longer than n");
}

PatternSet make_pattern_set(std::size_t n, std::vector<std::uint64_t> patterns, std::string source) {
  std::sort(patterns.begin(), patterns.end());
  patterns.erase(std::unique(patterns.begin(), patterns.end()), patterns.end());
  PatternSet e{n, std::move(patterns), std::move(source)};
  e.validate();
  return e;
}

// ---------------------------------------------------------------- partition choice

std::pair<CylinderPartition, symdyn::EntropyEstimate> select_binary_partition(
    const Subshift& s, const std::vector<CylinderPartition>& candidates, std::size_t n_max, double threshold) {
  if (candidates.empty()) throw Error(ErrorCode::OutOfRange, "no candidate partitions");
  std::size_t best = 0;
  symdyn::EntropyEstimate best_estimate;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    if (candidates[i].cells.size() != 2)
      throw Error(ErrorCode::BadCellCount, "candidate " + std::to_string(i) + " does not have exactly 2 cells");
    auto est = symdyn::entropy_cover_join(s, candidates[i], n_max);
    if (i == 0 || est.extrapolated > best_estimate.extrapolated) {
      best = i;
      best_estimate = std::move(est);
    }
  }
  if (best_estimate.extrapolated < threshold)
    throw Error(ErrorCode::AllZero, "every candidate partition has estimated entropy below " + std::to_string(threshold));
  return {candidates[best], best_estimate};
}

IndicatorFunction indicator_difference(const CylinderPartition& u) {
  if (u.cells.size() != 2)
    throw Error(ErrorCode::BadCellCount, "indicator difference needs exactly 2 cells, got " + std::to_string(u.cells.size()));
  IndicatorFunction f;
  f.partition = u;
  f.plus_cell = (u.labels.size() == 2 && u.labels[1] > u.labels[0]) ? 1 : 0;
  return f;
}

int IndicatorFunction::value(const Word& window_word) const {
  const int cell = partition.cell_of(window_word);
  if (cell < 0) throw Error(ErrorCode::BadPartition, "word " + symdyn::format_word(window_word) + " lies in no cell");
  return static_cast<std::size_t>(cell) == plus_cell ? 1 : -1;
}

int IndicatorFunction::value_of_block(const Word& block) const {
  Word projected;
  for (std::size_t c : partition.window) projected.push_back(block.at(c));
  return value(projected);
}

// ---------------------------------------------------------------- patterns

PatternSet realized_patterns(const Subshift& s, const IndicatorFunction& f, std::size_t n) {
  if (n < 1 || n > kMaxPatternLength) throw Error(ErrorCode::OutOfRange, "n must be in [1, 63]");
  const auto g = symdyn::labelled_graph(s, f.partition);
  const std::size_t words = (g.blocks.size() + 63) / 64;
  using Bits = std::vector<std::uint64_t>;

  // Itinerary prefix -> set of blocks it can currently sit in.
  std::map<std::uint64_t, Bits> frontier;
  for (std::size_t v = 0; v < g.blocks.size(); ++v) {
    const std::uint64_t bit = g.label[v] == f.plus_cell ? 1 : 0;
    auto& set = frontier[bit];
    set.resize(words, 0);
    set[v / 64] |= std::uint64_t{1} << (v % 64);
  }
  for (std::size_t step = 1; step < n; ++step) {
    std::map<std::uint64_t, Bits> next;
    for (const auto& [prefix, set] : frontier) {
      Bits plus(words, 0), minus(words, 0);
      bool any_plus = false, any_minus = false;
      for (std::size_t w = 0; w < words; ++w) {
        std::uint64_t word = set[w];
        while (word != 0) {
          const std::size_t v = w * 64 + static_cast<std::size_t>(std::countr_zero(word));
          word &= word - 1;
          for (std::size_t x : g.successors[v]) {
            if (g.label[x] == f.plus_cell) {
              plus[x / 64] |= std::uint64_t{1} << (x % 64);
              any_plus = true;
            } else {
              minus[x / 64] |= std::uint64_t{1} << (x % 64);
              any_minus = true;
            }
          }
        }
      }
      if (any_minus) next.emplace(prefix, std::move(minus));
      if (any_plus) next.emplace(prefix | (std::uint64_t{1} << step), std::move(plus));
    }
    frontier = std::move(next);
  }
  std::vector<std::uint64_t> patterns;
  patterns.reserve(frontier.size());
  for (const auto& entry : frontier) patterns.push_back(entry.first);
  return make_pattern_set(n, std::move(patterns), s.id());
}

// ---------------------------------------------------------------- shattering

namespace {

/// Counts distinct restrictions. With a target, stops as soon as the count
/// reaches it or can no longer reach it.
std::size_t restriction_count_bounded(const PatternSet& e, const std::vector<std::size_t>& indices,
                                      std::size_t target = SIZE_MAX) {
  const std::size_t k = indices.size();
  if (k >= 40) throw Error(ErrorCode::OutOfRange, "index set too large to enumerate restrictions");
  const std::size_t cube = std::size_t{1} << k;
  std::vector<std::uint64_t> seen((cube + 63) / 64, 0);
  std::size_t distinct = 0;
  std::size_t remaining = e.patterns.size();
  for (std::uint64_t p : e.patterns) {
    std::size_t key = 0;
    for (std::size_t j = 0; j < k; ++j) key |= static_cast<std::size_t>((p >> indices[j]) & 1U) << j;
    std::uint64_t& slot = seen[key / 64];
    const std::uint64_t mask = std::uint64_t{1} << (key % 64);
    if ((slot & mask) == 0) {
      slot |= mask;
      if (++distinct == target) return distinct;
    }
    --remaining;
    if (target != SIZE_MAX && distinct + remaining < target) return distinct;
  }
  return distinct;
}

class ExactSearch {
 public:
  explicit ExactSearch(const PatternSet& e) : e_(e), n_(e.n) {
    // Shattering is hereditary: only indices taking both signs, and pairs
    // that are themselves shattered, can appear together in the answer.
    for (std::size_t i = 0; i < n_; ++i)
      if (is_shattered(e_, {i})) usable_ |= std::uint64_t{1} << i;
    compatible_.assign(n_, 0);
    for (std::size_t i = 0; i < n_; ++i) {
      if (!((usable_ >> i) & 1U)) continue;
      for (std::size_t j = i + 1; j < n_; ++j)
        if (((usable_ >> j) & 1U) && is_shattered(e_, {i, j})) {
          compatible_[i] |= std::uint64_t{1} << j;
          compatible_[j] |= std::uint64_t{1} << i;
        }
    }
  }

  /// Lexicographically first shattered set of the given size, if any.
  bool find(std::size_t size, std::vector<std::size_t>& out) {
    target_ = size;
    chosen_.clear();
    if (size == 0) {
      out.clear();
      return true;
    }
    if (size == 1) {
      if (usable_ == 0) return false;
      out = {static_cast<std::size_t>(std::countr_zero(usable_))};
      return true;
    }
    if (dfs(usable_)) {
      out = chosen_;
      return true;
    }
    return false;
  }

 private:
  bool dfs(std::uint64_t candidates) {
    if (chosen_.size() == target_) return is_shattered(e_, chosen_);
    if (static_cast<std::size_t>(std::popcount(candidates)) + chosen_.size() < target_) return false;
    while (candidates != 0) {
      const auto i = static_cast<std::size_t>(std::countr_zero(candidates));
      candidates &= candidates - 1;
      chosen_.push_back(i);
      // Larger indices only, and compatible with i.
      if (dfs(candidates & compatible_[i])) return true;
      chosen_.pop_back();
      if (static_cast<std::size_t>(std::popcount(candidates)) + chosen_.size() < target_) return false;
    }
    return false;
  }

  const PatternSet& e_;
  std::size_t n_;
  std::uint64_t usable_ = 0;
  std::vector<std::uint64_t> compatible_;
  std::vector<std::size_t> chosen_;
  std::size_t target_ = 0;
};

}  // namespace

std::size_t restriction_count(const PatternSet& e, const std::vector<std::size_t>& indices) {
  return restriction_count_bounded(e, indices);
}

bool is_shattered(const PatternSet& e, const std::vector<std::size_t>& indices) {
  if (indices.size() >= 63) return false;
  const std::uint64_t cube = std::uint64_t{1} << indices.size();
  if (e.patterns.size() < cube) return false;
  return restriction_count_bounded(e, indices, static_cast<std::size_t>(cube)) == cube;
}

ShatterCertificate max_shattered(const PatternSet& e, Method method, std::size_t cap) {
  e.validate();
  ShatterCertificate cert;
  cert.n = e.n;
  cert.method = method;
  if (method == Method::Exact) {
    if (e.n > cap)
      throw Error(ErrorCode::Intractable,
                  "exact shattering search over n=" + std::to_string(e.n) + " exceeds cap " + std::to_string(cap));
    // A shattered set of size d needs 2^d patterns; a set of the Sauer-Shelah
    // size is guaranteed to exist.
    const auto upper = std::min<std::size_t>(e.n, static_cast<std::size_t>(std::bit_width(e.patterns.size())) - 1);
    const std::size_t lower = sauer_shelah_threshold(e.n, e.patterns.size());
    ExactSearch search(e);
    for (std::size_t size = upper + 1; size-- > 0;) {
      if (search.find(size, cert.indices)) break;
      if (size <= lower)
        throw Error(ErrorCode::OutOfRange, "no shattered set at the guaranteed size; pattern set inconsistent");
    }
  } else {
    for (std::size_t i = 0; i < e.n; ++i) {
      cert.indices.push_back(i);
      if (!is_shattered(e, cert.indices)) cert.indices.pop_back();
    }
  }
  cert.verified = is_shattered(e, cert.indices);
  cert.density = static_cast<double>(cert.indices.size()) / static_cast<double>(e.n);
  return cert;
}

std::size_t sauer_shelah_threshold(std::size_t n, std::uint64_t size) {
  if (n > kMaxPatternLength) throw Error(ErrorCode::OutOfRange, "n must be at most 63");
  const std::uint64_t cube = std::uint64_t{1} << n;
  if (size < 1 || size > cube) throw Error(ErrorCode::OutOfRange, "size must be in [1, 2^n]");
  // sum_{i<d} C(n, i), accumulated while it stays below size.
  std::uint64_t binom = 1;  // C(n, d)
  std::uint64_t partial = 0;
  std::size_t d = 0;
  while (d < n) {
    partial += binom;  // now sum_{i<=d} C(n, i)
    if (!(size > partial)) break;
    ++d;
    binom = static_cast<std::uint64_t>(static_cast<unsigned __int128>(binom) * (n - d + 1) / d);
  }
  return size > partial ? n : d;
}

}  // namespace entrolab::shatter
