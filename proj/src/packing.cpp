#include "entrolab/packing.hpp"

#include <algorithm>
#include <bit>
#include <string>

#include "entrolab/error.hpp"

namespace entrolab::packing {

std::string_view to_string(Method m) { return m == Method::Exact ? "exact" : "greedy"; }
std::string_view to_string(Mode m) { return m == Mode::Separated ? "separated" : "spanning"; }

BitGraph::BitGraph(std::size_t vertices)
    : n_(vertices), words_((vertices + 63) / 64), bits_(n_ * words_, 0) {}

void BitGraph::add_edge(std::size_t a, std::size_t b) {
  if (a == b) return;
  bits_[a * words_ + b / 64] |= std::uint64_t{1} << (b % 64);
  bits_[b * words_ + a / 64] |= std::uint64_t{1} << (a % 64);
}

bool BitGraph::adjacent(std::size_t a, std::size_t b) const {
  return (bits_[a * words_ + b / 64] >> (b % 64)) & 1U;
}

namespace {

using Bits = std::vector<std::uint64_t>;

bool any(const Bits& b) {
  return std::any_of(b.begin(), b.end(), [](std::uint64_t w) { return w != 0; });
}

std::size_t popcount(const Bits& b) {
  std::size_t c = 0;
  for (auto w : b) c += static_cast<std::size_t>(std::popcount(w));
  return c;
}

void reset(Bits& b, std::size_t v) { b[v / 64] &= ~(std::uint64_t{1} << (v % 64)); }

bool test(const Bits& b, std::size_t v) { return (b[v / 64] >> (v % 64)) & 1U; }

template <typename F>
void for_each_bit(const Bits& b, F&& f) {
  for (std::size_t w = 0; w < b.size(); ++w) {
    std::uint64_t word = b[w];
    while (word != 0) {
      const auto bit = static_cast<std::size_t>(std::countr_zero(word));
      f(w * 64 + bit);
      word &= word - 1;
    }
  }
}

Bits full_set(std::size_t n) {
  Bits b((n + 63) / 64, ~std::uint64_t{0});
  if (n % 64 != 0) b.back() = (std::uint64_t{1} << (n % 64)) - 1;
  if (n == 0) b.clear();
  return b;
}

class CliqueSearch {
 public:
  CliqueSearch(const BitGraph& g, std::size_t budget) : g_(g), budget_(budget) {}

  std::vector<std::size_t> run() {
    Bits all = full_set(g_.size());
    std::vector<std::size_t> current;
    expand(current, all);
    std::sort(best_.begin(), best_.end());
    return best_;
  }

 private:
  // Sequential greedy colouring; vertices come out in nondecreasing colour.
  void colour_sort(const Bits& p, std::vector<std::size_t>& order, std::vector<std::size_t>& colour) {
    Bits uncoloured = p;
    std::size_t k = 0;
    while (any(uncoloured)) {
      ++k;
      Bits available = uncoloured;
      while (any(available)) {
        std::size_t v = 0;
        for (std::size_t w = 0; w < available.size(); ++w) {
          if (available[w] != 0) {
            v = w * 64 + static_cast<std::size_t>(std::countr_zero(available[w]));
            break;
          }
        }
        reset(uncoloured, v);
        reset(available, v);
        auto row = g_.row(v);
        for (std::size_t w = 0; w < available.size(); ++w) available[w] &= ~row[w];
        order.push_back(v);
        colour.push_back(k);
      }
    }
  }

  void expand(std::vector<std::size_t>& current, Bits p) {
    if (++nodes_ > budget_)
      throw Error(ErrorCode::Intractable, "maximum clique search exceeded " + std::to_string(budget_) + " nodes");
    std::vector<std::size_t> order;
    std::vector<std::size_t> colour;
    colour_sort(p, order, colour);
    for (std::size_t i = order.size(); i-- > 0;) {
      if (current.size() + colour[i] <= best_.size()) return;
      const std::size_t v = order[i];
      current.push_back(v);
      Bits next = p;
      auto row = g_.row(v);
      for (std::size_t w = 0; w < next.size(); ++w) next[w] &= row[w];
      if (!any(next)) {
        if (current.size() > best_.size()) best_ = current;
      } else {
        expand(current, std::move(next));
      }
      current.pop_back();
      reset(p, v);
    }
  }

  const BitGraph& g_;
  std::size_t budget_;
  std::size_t nodes_ = 0;
  std::vector<std::size_t> best_;
};

class CoverSearch {
 public:
  CoverSearch(const BitGraph& g, std::size_t budget) : g_(g), budget_(budget) {
    closed_.reserve(g.size());
    for (std::size_t v = 0; v < g.size(); ++v) {
      Bits row(g.row(v).begin(), g.row(v).end());
      row[v / 64] |= std::uint64_t{1} << (v % 64);
      closed_.push_back(std::move(row));
    }
  }

  std::vector<std::size_t> run(std::vector<std::size_t> incumbent) {
    best_ = std::move(incumbent);
    std::vector<std::size_t> chosen;
    search(full_set(g_.size()), chosen);
    std::sort(best_.begin(), best_.end());
    return best_;
  }

 private:
  std::size_t coverage(std::size_t v, const Bits& uncovered) const {
    std::size_t c = 0;
    for (std::size_t w = 0; w < uncovered.size(); ++w)
      c += static_cast<std::size_t>(std::popcount(closed_[v][w] & uncovered[w]));
    return c;
  }

  void search(const Bits& uncovered, std::vector<std::size_t>& chosen) {
    if (++nodes_ > budget_)
      throw Error(ErrorCode::Intractable, "exact spanning search exceeded node budget " + std::to_string(budget_));
    const std::size_t remaining = popcount(uncovered);
    if (remaining == 0) {
      if (chosen.size() < best_.size()) best_ = chosen;
      return;
    }
    std::size_t max_cover = 0;
    for (std::size_t v = 0; v < g_.size(); ++v) max_cover = std::max(max_cover, coverage(v, uncovered));
    const std::size_t lower = (remaining + max_cover - 1) / max_cover;
    if (chosen.size() + lower >= best_.size()) return;

    // Branch on the uncovered vertex with the fewest possible coverers.
    std::size_t pivot = 0;
    std::size_t fewest = g_.size() + 1;
    for_each_bit(uncovered, [&](std::size_t u) {
      const std::size_t c = popcount(closed_[u]);
      if (c < fewest) {
        fewest = c;
        pivot = u;
      }
    });
    std::vector<std::size_t> options;
    for_each_bit(closed_[pivot], [&](std::size_t v) { options.push_back(v); });
    std::stable_sort(options.begin(), options.end(), [&](std::size_t a, std::size_t b) {
      return coverage(a, uncovered) > coverage(b, uncovered);
    });
    for (std::size_t v : options) {
      Bits next = uncovered;
      for (std::size_t w = 0; w < next.size(); ++w) next[w] &= ~closed_[v][w];
      chosen.push_back(v);
      search(next, chosen);
      chosen.pop_back();
    }
  }

  const BitGraph& g_;
  std::size_t budget_;
  std::size_t nodes_ = 0;
  std::vector<Bits> closed_;
  std::vector<std::size_t> best_;
};

}  // namespace

std::vector<std::size_t> max_clique(const BitGraph& g, std::size_t node_budget) {
  if (g.size() == 0) return {};
  return CliqueSearch(g, node_budget).run();
}

std::vector<std::size_t> greedy_clique(const BitGraph& g, std::span<const std::size_t> start) {
  std::vector<std::size_t> clique(start.begin(), start.end());
  Bits in_clique((g.size() + 63) / 64, 0);
  Bits candidates = full_set(g.size());
  for (std::size_t v : clique) {
    in_clique[v / 64] |= std::uint64_t{1} << (v % 64);
    auto row = g.row(v);
    for (std::size_t w = 0; w < candidates.size(); ++w) candidates[w] &= row[w];
  }
  for (std::size_t v = 0; v < g.size(); ++v) {
    if (test(in_clique, v) || !test(candidates, v)) continue;
    clique.push_back(v);
    auto row = g.row(v);
    for (std::size_t w = 0; w < candidates.size(); ++w) candidates[w] &= row[w];
  }
  std::sort(clique.begin(), clique.end());
  return clique;
}

std::vector<std::size_t> greedy_dominating_set(const BitGraph& g) {
  Bits uncovered = full_set(g.size());
  std::vector<std::size_t> chosen;
  while (any(uncovered)) {
    std::size_t best_v = 0;
    std::size_t best_c = 0;
    for (std::size_t v = 0; v < g.size(); ++v) {
      auto row = g.row(v);
      std::size_t c = test(uncovered, v) ? 1 : 0;
      for (std::size_t w = 0; w < uncovered.size(); ++w)
        c += static_cast<std::size_t>(std::popcount(row[w] & uncovered[w]));
      if (c > best_c) {
        best_c = c;
        best_v = v;
      }
    }
    chosen.push_back(best_v);
    reset(uncovered, best_v);
    auto row = g.row(best_v);
    for (std::size_t w = 0; w < uncovered.size(); ++w) uncovered[w] &= ~row[w];
  }
  std::sort(chosen.begin(), chosen.end());
  return chosen;
}

std::vector<std::size_t> min_dominating_set(const BitGraph& g, std::size_t node_budget) {
  if (g.size() == 0) return {};
  return CoverSearch(g, node_budget).run(greedy_dominating_set(g));
}

namespace {

void check_cap(std::size_t count, Method method, std::size_t cap) {
  if (method == Method::Exact && count > cap)
    throw Error(ErrorCode::Intractable, std::to_string(count) + " points exceed the exact cap of " +
                                            std::to_string(cap) + "; use greedy");
}

void check_epsilon(double epsilon) {
  if (!(epsilon > 0.0)) throw Error(ErrorCode::OutOfRange, "epsilon must be positive");
}

}  // namespace

SeparationReport max_separated_subset(std::size_t count, const Metric& metric, double epsilon,
                                      Method method, std::size_t cap) {
  check_epsilon(epsilon);
  check_cap(count, method, cap);
  SeparationReport r;
  r.epsilon = epsilon;
  r.mode = Mode::Separated;
  r.exact = method == Method::Exact;
  if (!r.exact) {
    // First-fit in index order; same set as greedy_clique on the full graph.
    for (std::size_t a = 0; a < count; ++a) {
      bool ok = true;
      for (std::size_t b : r.members) {
        if (!(metric(a, b) > epsilon)) {
          ok = false;
          break;
        }
      }
      if (ok) r.members.push_back(a);
    }
    r.count = r.members.size();
    return r;
  }
  BitGraph g(count);
  for (std::size_t a = 0; a < count; ++a)
    for (std::size_t b = a + 1; b < count; ++b)
      if (metric(a, b) > epsilon) g.add_edge(a, b);
  r.members = max_clique(g);
  r.count = r.members.size();
  return r;
}

SeparationReport min_spanning_subset(std::size_t count, const Metric& metric, double epsilon,
                                     Method method, std::size_t cap) {
  check_epsilon(epsilon);
  check_cap(count, method, cap);
  BitGraph g(count);
  for (std::size_t a = 0; a < count; ++a)
    for (std::size_t b = a + 1; b < count; ++b)
      if (metric(a, b) <= epsilon) g.add_edge(a, b);
  SeparationReport r;
  r.epsilon = epsilon;
  r.mode = Mode::Spanning;
  r.exact = method == Method::Exact;
  r.members = r.exact ? min_dominating_set(g) : greedy_dominating_set(g);
  r.count = r.members.size();
  return r;
}

}  // namespace entrolab::packing
