#include "entrolab/symdyn.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <numeric>
#include <sstream>

#include "entrolab/error.hpp"

namespace entrolab::symdyn {

namespace {

constexpr std::size_t kMaxStates = std::size_t{1} << 22;

std::size_t checked_power(std::size_t base, std::size_t exp, std::size_t limit) {
  std::size_t r = 1;
  for (std::size_t i = 0; i < exp; ++i) {
    if (base != 0 && r > limit / base) throw Error(ErrorCode::OutOfRange, "block space too large");
    r *= base;
  }
  return r;
}

bool contains_factor(const Word& w, const Word& f) {
  return std::search(w.begin(), w.end(), f.begin(), f.end()) != w.end();
}

/// (1/n) log count, exact when count is a perfect n-th power.
double per_symbol_log(const BigCount& count, std::size_t n) {
  const double value = log_count(count) / static_cast<double>(n);
  const double guess = std::round(std::exp(value));
  for (double r = std::max(1.0, guess - 1.0); r <= guess + 1.0; r += 1.0) {
    if (r > 9.0e15) break;
    BigCount p = boost::multiprecision::pow(BigCount(static_cast<long long>(r)), static_cast<unsigned>(n));
    if (p == count) return std::log(r);
  }
  return value;
}

using Bits = std::vector<std::uint64_t>;

}  // namespace

std::string format_word(const Word& w) {
  static constexpr std::string_view digits = "0123456789abcdefghijklmnopqrstuvwxyz";
  std::string out;
  out.reserve(w.size());
  for (Symbol s : w) out.push_back(s < digits.size() ? digits[s] : '?');
  return out;
}

Word parse_word(std::string_view text, int alphabet_size) {
  if (text.empty()) throw Error(ErrorCode::BadWord, "empty word");
  Word w;
  w.reserve(text.size());
  for (char c : text) {
    int v = -1;
    if (c >= '0' && c <= '9') v = c - '0';
    else if (c >= 'a' && c <= 'z') v = c - 'a' + 10;
    if (v < 0 || v >= alphabet_size)
      throw Error(ErrorCode::BadWord, "symbol '" + std::string(1, c) + "' outside alphabet of size " +
                                          std::to_string(alphabet_size));
    w.push_back(static_cast<Symbol>(v));
  }
  return w;
}

double log_count(const BigCount& c) {
  if (c <= 0) return -std::numeric_limits<double>::infinity();
  const std::size_t msb = boost::multiprecision::msb(c);
  if (msb < 1000) return std::log(c.convert_to<double>());
  const std::size_t shift = msb - 60;
  BigCount top = c >> shift;
  return std::log(top.convert_to<double>()) + static_cast<double>(shift) * std::log(2.0);
}

// ---------------------------------------------------------------- Subshift

Subshift Subshift::build(int alphabet_size, std::vector<Word> forbidden_words) {
  if (alphabet_size < 1 || alphabet_size > 255)
    throw Error(ErrorCode::OutOfRange, "alphabet size must be in [1, 255]");
  Subshift s;
  s.alphabet_size_ = alphabet_size;
  std::size_t m = 1;
  for (const Word& w : forbidden_words) {
    if (w.empty()) throw Error(ErrorCode::BadWord, "empty forbidden word");
    for (Symbol c : w)
      if (c >= alphabet_size)
        throw Error(ErrorCode::BadWord, "forbidden word " + format_word(w) + " uses a symbol outside the alphabet");
    m = std::max(m, w.size());
  }
  std::sort(forbidden_words.begin(), forbidden_words.end());
  forbidden_words.erase(std::unique(forbidden_words.begin(), forbidden_words.end()), forbidden_words.end());
  s.forbidden_ = std::move(forbidden_words);
  s.block_order_ = m;
  s.state_length_ = std::max<std::size_t>(m - 1, 1);

  const auto d = static_cast<std::size_t>(alphabet_size);
  const std::size_t len = s.state_length_;
  const std::size_t total = checked_power(d, len, kMaxStates);

  // All admissible blocks in lexicographic order.
  std::vector<Word> blocks;
  std::map<Word, std::size_t> index;
  Word w(len, 0);
  for (std::size_t i = 0; i < total; ++i) {
    if (!s.has_forbidden_factor(w)) {
      index.emplace(w, blocks.size());
      blocks.push_back(w);
    }
    for (std::size_t p = len; p-- > 0;) {
      if (++w[p] < d) break;
      w[p] = 0;
    }
  }

  std::vector<std::vector<std::size_t>> succ(blocks.size());
  std::vector<std::size_t> indeg(blocks.size(), 0);
  for (std::size_t u = 0; u < blocks.size(); ++u) {
    Word ext = blocks[u];
    ext.push_back(0);
    for (std::size_t a = 0; a < d; ++a) {
      ext.back() = static_cast<Symbol>(a);
      if (s.has_forbidden_factor(ext)) continue;
      Word next(ext.begin() + 1, ext.end());
      auto it = index.find(next);
      if (it == index.end()) continue;
      succ[u].push_back(it->second);
      ++indeg[it->second];
    }
  }

  // Trim to vertices lying on bi-infinite paths.
  std::vector<bool> alive(blocks.size(), true);
  std::vector<std::size_t> outdeg(blocks.size());
  for (std::size_t u = 0; u < blocks.size(); ++u) outdeg[u] = succ[u].size();
  std::vector<std::vector<std::size_t>> pred(blocks.size());
  for (std::size_t u = 0; u < blocks.size(); ++u)
    for (std::size_t v : succ[u]) pred[v].push_back(u);
  std::vector<std::size_t> queue;
  for (std::size_t u = 0; u < blocks.size(); ++u)
    if (outdeg[u] == 0 || indeg[u] == 0) {
      alive[u] = false;
      queue.push_back(u);
    }
  while (!queue.empty()) {
    const std::size_t u = queue.back();
    queue.pop_back();
    for (std::size_t v : succ[u])
      if (alive[v] && --indeg[v] == 0) {
        alive[v] = false;
        queue.push_back(v);
      }
    for (std::size_t p : pred[u])
      if (alive[p] && --outdeg[p] == 0) {
        alive[p] = false;
        queue.push_back(p);
      }
  }

  std::vector<std::size_t> remap(blocks.size(), blocks.size());
  for (std::size_t u = 0; u < blocks.size(); ++u)
    if (alive[u]) {
      remap[u] = s.states_.size();
      s.states_.push_back(blocks[u]);
    }
  if (s.states_.empty())
    throw Error(ErrorCode::EmptySubshift, "no bi-infinite admissible sequence for " + s.id());

  const std::size_t n = s.states_.size();
  s.matrix_.assign(n, std::vector<std::uint8_t>(n, 0));
  s.successors_.assign(n, {});
  for (std::size_t u = 0; u < blocks.size(); ++u) {
    if (!alive[u]) continue;
    for (std::size_t v : succ[u])
      if (alive[v]) {
        s.matrix_[remap[u]][remap[v]] = 1;
        s.successors_[remap[u]].push_back(remap[v]);
      }
  }
  return s;
}

bool Subshift::has_forbidden_factor(const Word& w) const {
  return std::any_of(forbidden_.begin(), forbidden_.end(), [&](const Word& f) { return contains_factor(w, f); });
}

std::string Subshift::id() const {
  std::ostringstream os;
  os << "sft(d=" << alphabet_size_ << ";forbidden=";
  for (std::size_t i = 0; i < forbidden_.size(); ++i) os << (i ? "," : "") << format_word(forbidden_[i]);
  os << ")";
  return os.str();
}

// ---------------------------------------------------------------- blocks

std::vector<Word> enumerate_blocks(const Subshift& s, std::size_t n) {
  if (n == 0) return {Word{}};
  const auto& states = s.states();
  const std::size_t len = s.state_length();
  std::vector<Word> out;
  if (n <= len) {
    for (const Word& st : states) out.emplace_back(st.begin(), st.begin() + static_cast<std::ptrdiff_t>(n));
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }
  const auto& succ = s.successors();
  const std::size_t steps = n - len;
  Word word;
  std::vector<std::pair<std::size_t, std::size_t>> stack;  // (vertex, next successor slot)
  for (std::size_t start = 0; start < states.size(); ++start) {
    word = states[start];
    stack.assign(1, {start, 0});
    while (!stack.empty()) {
      if (stack.size() == steps + 1) {
        out.push_back(word);
        stack.pop_back();
        word.pop_back();
        continue;
      }
      auto& [u, slot] = stack.back();
      if (slot == succ[u].size()) {
        stack.pop_back();
        if (!stack.empty()) word.pop_back();
        continue;
      }
      const std::size_t v = succ[u][slot++];
      word.push_back(states[v].back());
      stack.emplace_back(v, 0);
    }
  }
  return out;
}

namespace {

/// |L_n| for n = 0..n_max in one transfer-matrix sweep.
std::vector<BigCount> block_counts(const Subshift& s, std::size_t n_max) {
  std::vector<BigCount> counts(n_max + 1);
  const std::size_t len = s.state_length();
  for (std::size_t n = 0; n <= std::min(n_max, len); ++n) counts[n] = enumerate_blocks(s, n).size();
  const auto& succ = s.successors();
  std::vector<BigCount> paths(s.states().size(), 1);
  for (std::size_t n = len + 1; n <= n_max; ++n) {
    std::vector<BigCount> next(paths.size(), 0);
    for (std::size_t u = 0; u < paths.size(); ++u)
      for (std::size_t v : succ[u]) next[u] += paths[v];
    paths = std::move(next);
    counts[n] = std::accumulate(paths.begin(), paths.end(), BigCount(0));
  }
  return counts;
}

}  // namespace

BigCount count_blocks(const Subshift& s, std::size_t n) { return block_counts(s, n)[n]; }

std::string_view to_string(EntropyMethod m) {
  switch (m) {
    case EntropyMethod::BlockGrowth: return "block_growth";
    case EntropyMethod::CoverJoin: return "cover_join";
    case EntropyMethod::Separated: return "separated";
    case EntropyMethod::Spanning: return "spanning";
    case EntropyMethod::Spectral: return "spectral";
  }
  return "unknown";
}

namespace {
constexpr std::string_view kFiniteHorizonNote =
    "finite-horizon estimate: extrapolated is the minimum sample, an upper bound on the limit";
}

EntropyEstimate entropy_block_growth(const Subshift& s, std::size_t n_max) {
  if (n_max < 2) throw Error(ErrorCode::OutOfRange, "n_max must be at least 2");
  const auto counts = block_counts(s, n_max);
  EntropyEstimate est;
  est.method = EntropyMethod::BlockGrowth;
  est.note = std::string(kFiniteHorizonNote);
  for (std::size_t n = 1; n <= n_max; ++n) est.samples.push_back({n, per_symbol_log(counts[n], n)});
  est.extrapolated = std::min_element(est.samples.begin(), est.samples.end(), [](const auto& a, const auto& b) {
                       return a.value < b.value;
                     })->value;
  return est;
}

EntropyEstimate entropy_spectral(const Subshift& s) {
  const auto& a = s.transition_matrix();
  const std::size_t n = a.size();
  EntropyEstimate est;
  est.method = EntropyMethod::Spectral;
  est.note = "log of the Perron root of the transition matrix; exact for shifts of finite type";

  // Power iteration on A + I: the Perron root becomes strictly dominant in
  // modulus, and Collatz-Wielandt ratios bracket it at every step.
  constexpr std::size_t kMaxIterations = 100000;
  constexpr double kRelTol = 1e-10;
  std::vector<double> v(n, 1.0), w(n);
  double rho = -1.0;
  for (std::size_t it = 0; it < kMaxIterations; ++it) {
    for (std::size_t i = 0; i < n; ++i) {
      double acc = v[i];
      for (std::size_t j = 0; j < n; ++j)
        if (a[i][j]) acc += v[j];
      w[i] = acc;
    }
    double lo = std::numeric_limits<double>::infinity();
    double hi = 0.0;
    double top = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double r = w[i] / v[i];
      lo = std::min(lo, r);
      hi = std::max(hi, r);
      top = std::max(top, w[i]);
    }
    const double lo_rho = lo - 1.0;
    const double hi_rho = hi - 1.0;
    if (hi_rho - lo_rho <= kRelTol * std::max(1.0, hi_rho)) {
      rho = 0.5 * (lo_rho + hi_rho);
      break;
    }
    for (std::size_t i = 0; i < n; ++i) v[i] = w[i] / top;
  }
  if (rho < 0.0) {
    Eigen::MatrixXd dense(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        dense(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = a[i][j];
    Eigen::EigenSolver<Eigen::MatrixXd> solver(dense, false);
    if (solver.info() != Eigen::Success)
      throw Error(ErrorCode::NonConvergence, "power iteration and dense eigensolver both failed");
    rho = solver.eigenvalues().cwiseAbs().maxCoeff();
    est.note += "; power iteration hit its cap, dense eigenvalues used";
  }
  est.extrapolated = std::max(0.0, std::log(rho));
  return est;
}

// ---------------------------------------------------------------- partitions

CylinderPartition CylinderPartition::symbol_partition(int alphabet_size) {
  CylinderPartition p;
  p.window = {0};
  for (int a = 0; a < alphabet_size; ++a) {
    p.cells.push_back({Word{static_cast<Symbol>(a)}});
    p.labels.push_back(a);
  }
  return p;
}

CylinderPartition CylinderPartition::trivial(int alphabet_size) {
  CylinderPartition p;
  p.window = {0};
  p.cells.emplace_back();
  for (int a = 0; a < alphabet_size; ++a) p.cells.back().push_back(Word{static_cast<Symbol>(a)});
  p.labels = {0};
  return p;
}

std::vector<CylinderPartition> CylinderPartition::binary_coarsenings(int alphabet_size) {
  std::vector<CylinderPartition> out;
  for (int k = 0; k < alphabet_size; ++k) {
    CylinderPartition p;
    p.window = {0};
    p.cells.resize(2);
    for (int a = 0; a < alphabet_size; ++a) p.cells[a == k ? 0 : 1].push_back(Word{static_cast<Symbol>(a)});
    p.labels = {1, -1};
    out.push_back(std::move(p));
  }
  return out;
}

std::size_t CylinderPartition::span() const { return window.empty() ? 0 : window.back() + 1; }

int CylinderPartition::cell_of(const Word& window_word) const {
  for (std::size_t c = 0; c < cells.size(); ++c)
    if (std::find(cells[c].begin(), cells[c].end(), window_word) != cells[c].end()) return static_cast<int>(c);
  return -1;
}

int CylinderPartition::cell_of_block(const Word& block) const {
  Word projected;
  projected.reserve(window.size());
  for (std::size_t c : window) projected.push_back(block.at(c));
  return cell_of(projected);
}

void CylinderPartition::validate(const Subshift& s) const {
  if (window.empty()) throw Error(ErrorCode::BadPartition, "empty window");
  if (!std::is_sorted(window.begin(), window.end()) ||
      std::adjacent_find(window.begin(), window.end()) != window.end())
    throw Error(ErrorCode::BadPartition, "window coordinates must be sorted and distinct");
  if (cells.empty()) throw Error(ErrorCode::BadPartition, "partition needs at least one cell");
  if (labels.size() != cells.size()) throw Error(ErrorCode::BadPartition, "one label per cell required");
  std::map<Word, std::size_t> owner;
  for (std::size_t c = 0; c < cells.size(); ++c)
    for (const Word& w : cells[c]) {
      if (w.size() != window.size())
        throw Error(ErrorCode::BadPartition, "cell word " + format_word(w) + " does not match the window");
      for (Symbol x : w)
        if (x >= s.alphabet_size()) throw Error(ErrorCode::BadWord, "cell word " + format_word(w));
      if (!owner.emplace(w, c).second)
        throw Error(ErrorCode::BadPartition, "cells overlap on " + format_word(w));
    }
  for (const Word& b : enumerate_blocks(s, span()))
    if (cell_of_block(b) < 0)
      throw Error(ErrorCode::BadPartition, "admissible block " + format_word(b) + " lies in no cell");
}

LabelledGraph labelled_graph(const Subshift& s, const CylinderPartition& u) {
  u.validate(s);
  const std::size_t len = std::max(s.state_length(), u.span());
  LabelledGraph g;
  g.blocks = enumerate_blocks(s, len);
  g.label_count = u.cells.size();
  std::map<Word, std::size_t> index;
  for (std::size_t i = 0; i < g.blocks.size(); ++i) {
    index.emplace(g.blocks[i], i);
    g.label.push_back(static_cast<std::size_t>(u.cell_of_block(g.blocks[i])));
  }
  g.successors.assign(g.blocks.size(), {});
  for (const Word& e : enumerate_blocks(s, len + 1)) {
    const Word head(e.begin(), e.end() - 1);
    const Word tail(e.begin() + 1, e.end());
    g.successors[index.at(head)].push_back(index.at(tail));
  }
  return g;
}

namespace {

std::map<Bits, BigCount> initial_itinerary_sets(const LabelledGraph& g) {
  const std::size_t words = (g.blocks.size() + 63) / 64;
  std::vector<Bits> by_label(g.label_count, Bits(words, 0));
  std::vector<bool> used(g.label_count, false);
  for (std::size_t v = 0; v < g.blocks.size(); ++v) {
    by_label[g.label[v]][v / 64] |= std::uint64_t{1} << (v % 64);
    used[g.label[v]] = true;
  }
  std::map<Bits, BigCount> sets;
  for (std::size_t l = 0; l < g.label_count; ++l)
    if (used[l]) sets[by_label[l]] += 1;
  return sets;
}

}  // namespace

BigCount join_cover_count(const Subshift& s, const CylinderPartition& u, std::size_t n) {
  if (n == 0) return 1;
  const LabelledGraph g = labelled_graph(s, u);
  const std::size_t words = (g.blocks.size() + 63) / 64;
  // Each distinct itinerary determines the set of blocks it can end in; we
  // track how many itineraries share each such set.
  auto sets = initial_itinerary_sets(g);
  for (std::size_t step = 1; step < n; ++step) {
    std::map<Bits, BigCount> next;
    std::vector<Bits> by_label(g.label_count);
    for (const auto& [set, count] : sets) {
      for (auto& b : by_label) b.assign(words, 0);
      std::vector<bool> used(g.label_count, false);
      for (std::size_t w = 0; w < words; ++w) {
        std::uint64_t word = set[w];
        while (word != 0) {
          const std::size_t v = w * 64 + static_cast<std::size_t>(std::countr_zero(word));
          word &= word - 1;
          for (std::size_t x : g.successors[v]) {
            by_label[g.label[x]][x / 64] |= std::uint64_t{1} << (x % 64);
            used[g.label[x]] = true;
          }
        }
      }
      for (std::size_t l = 0; l < g.label_count; ++l)
        if (used[l]) next[by_label[l]] += count;
    }
    sets = std::move(next);
  }
  BigCount total = 0;
  for (const auto& [set, count] : sets) total += count;
  return total;
}

EntropyEstimate entropy_cover_join(const Subshift& s, const CylinderPartition& u, std::size_t n_max) {
  if (n_max < 2) throw Error(ErrorCode::OutOfRange, "n_max must be at least 2");
  EntropyEstimate est;
  est.method = EntropyMethod::CoverJoin;
  est.note = std::string(kFiniteHorizonNote);
  for (std::size_t n = 1; n <= n_max; ++n) est.samples.push_back({n, per_symbol_log(join_cover_count(s, u, n), n)});
  est.extrapolated = std::min_element(est.samples.begin(), est.samples.end(), [](const auto& a, const auto& b) {
                       return a.value < b.value;
                     })->value;
  return est;
}

// ---------------------------------------------------------------- metric systems

FiniteMetricSystem::FiniteMetricSystem(std::vector<std::string> labels, Distance distance,
                                       std::vector<std::size_t> map)
    : labels_(std::move(labels)), distance_(std::move(distance)), map_(std::move(map)) {
  if (labels_.size() != map_.size()) throw Error(ErrorCode::SizeMismatch, "one label per point required");
  if (map_.empty()) throw Error(ErrorCode::OutOfRange, "metric system needs at least one point");
  for (std::size_t x : map_)
    if (x >= map_.size()) throw Error(ErrorCode::OutOfRange, "map leaves the point set");
}

FiniteMetricSystem FiniteMetricSystem::from_matrix(std::vector<std::string> labels, std::vector<double> distances,
                                                   std::vector<std::size_t> map) {
  const std::size_t n = map.size();
  if (distances.size() != n * n) throw Error(ErrorCode::SizeMismatch, "distance matrix must be n x n");
  auto table = std::make_shared<std::vector<double>>(std::move(distances));
  FiniteMetricSystem m(std::move(labels), [table, n](std::size_t a, std::size_t b) { return (*table)[a * n + b]; },
                       std::move(map));
  m.validate();
  return m;
}

void FiniteMetricSystem::validate(double tolerance, std::size_t triangle_limit) const {
  const std::size_t n = size();
  for (std::size_t a = 0; a < n; ++a) {
    if (distance(a, a) != 0.0) throw Error(ErrorCode::OutOfRange, "nonzero diagonal distance");
    for (std::size_t b = a + 1; b < n; ++b) {
      const double d = distance(a, b);
      if (d < 0.0 || std::abs(d - distance(b, a)) > tolerance)
        throw Error(ErrorCode::OutOfRange, "distance must be symmetric and nonnegative");
    }
  }
  if (n > triangle_limit) return;
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b)
      for (std::size_t c = 0; c < n; ++c)
        if (distance(a, c) > distance(a, b) + distance(b, c) + tolerance)
          throw Error(ErrorCode::OutOfRange, "triangle inequality fails");
}

double FiniteMetricSystem::bowen_distance(std::size_t n, std::size_t a, std::size_t b) const {
  double d = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    d = std::max(d, distance(a, b));
    a = map_[a];
    b = map_[b];
  }
  return d;
}

double compactification_coordinate(long k) {
  return static_cast<double>(k) / (1.0 + static_cast<double>(k < 0 ? -k : k));
}

FiniteMetricSystem compactified_shift_model(int m) {
  if (m < 1) throw Error(ErrorCode::OutOfRange, "m must be at least 1");
  const auto count = static_cast<std::size_t>(2 * m + 2);
  auto coord = std::make_shared<std::vector<double>>(count);
  std::vector<std::string> labels(count);
  std::vector<std::size_t> map(count);
  for (int k = -m; k <= m; ++k) {
    const auto i = static_cast<std::size_t>(k + m);
    (*coord)[i] = compactification_coordinate(k);
    labels[i] = std::to_string(k);
    map[i] = i + 1;  // m maps to the point at infinity, index 2m+1
  }
  (*coord)[count - 1] = 1.0;
  labels[count - 1] = "inf";
  map[count - 1] = count - 1;
  return {std::move(labels), [coord](std::size_t a, std::size_t b) { return std::abs((*coord)[a] - (*coord)[b]); },
          std::move(map)};
}

FiniteMetricSystem periodic_shift_model(int alphabet_size, int period) {
  if (alphabet_size < 1 || period < 1) throw Error(ErrorCode::OutOfRange, "alphabet and period must be positive");
  const auto d = static_cast<std::size_t>(alphabet_size);
  const auto p = static_cast<std::size_t>(period);
  const std::size_t count = checked_power(d, p, kMaxStates);
  auto words = std::make_shared<std::vector<Word>>();
  words->reserve(count);
  Word w(p, 0);
  std::vector<std::string> labels;
  for (std::size_t i = 0; i < count; ++i) {
    words->push_back(w);
    labels.push_back(format_word(w));
    for (std::size_t q = p; q-- > 0;) {
      if (++w[q] < d) break;
      w[q] = 0;
    }
  }
  const std::size_t tail = count / d;  // d^(p-1)
  std::vector<std::size_t> map(count);
  for (std::size_t i = 0; i < count; ++i) map[i] = (i % tail) * d + (*words)[i][0];
  auto distance = [words, p](std::size_t a, std::size_t b) {
    if (a == b) return 0.0;
    const Word& x = (*words)[a];
    const Word& y = (*words)[b];
    for (std::size_t j = 0; j <= p / 2; ++j) {
      if (x[j] != y[j] || x[(p - j) % p] != y[(p - j) % p]) return std::ldexp(1.0, -static_cast<int>(j));
    }
    return 0.0;
  };
  return {std::move(labels), distance, std::move(map)};
}

FiniteMetricSystem identity_system(std::vector<double> positions) {
  std::vector<std::string> labels;
  std::vector<std::size_t> map(positions.size());
  std::iota(map.begin(), map.end(), std::size_t{0});
  for (double x : positions) {
    std::ostringstream os;
    os << x;
    labels.push_back(os.str());
  }
  auto pos = std::make_shared<std::vector<double>>(std::move(positions));
  return {std::move(labels), [pos](std::size_t a, std::size_t b) { return std::abs((*pos)[a] - (*pos)[b]); },
          std::move(map)};
}

packing::SeparationReport separated_spanning(const FiniteMetricSystem& m, std::size_t n, double epsilon,
                                             packing::Mode mode, packing::Method method, std::size_t cap) {
  if (n < 1) throw Error(ErrorCode::OutOfRange, "horizon n must be at least 1");
  const std::size_t count = m.size();
  if (method == packing::Method::Exact && count > cap)
    throw Error(ErrorCode::Intractable, std::to_string(count) + " points exceed the exact cap of " +
                                            std::to_string(cap) + "; use greedy");
  std::vector<std::size_t> orbit(n * count);
  for (std::size_t x = 0; x < count; ++x) {
    std::size_t y = x;
    for (std::size_t k = 0; k < n; ++k) {
      orbit[k * count + x] = y;
      y = m.map(y);
    }
  }
  auto bowen = [&](std::size_t a, std::size_t b) {
    double d = 0.0;
    for (std::size_t k = 0; k < n; ++k) d = std::max(d, m.distance(orbit[k * count + a], orbit[k * count + b]));
    return d;
  };
  auto report = mode == packing::Mode::Separated ? packing::max_separated_subset(count, bowen, epsilon, method, cap)
                                                 : packing::min_spanning_subset(count, bowen, epsilon, method, cap);
  report.n = n;
  return report;
}

}  // namespace entrolab::symdyn
