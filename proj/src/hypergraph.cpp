#include "nimfa/hypergraph.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "nimfa/errors.hpp"
#include "nimfa/util.hpp"

namespace nimfa {

namespace {

double factorial(int m) {
  double f = 1.0;
  for (int k = 2; k <= m; ++k) f *= k;
  return f;
}

void check_vertex(int v, int n) {
  if (v < 0 || v >= n)
    throw StructuralError("vertex index " + std::to_string(v) + " outside [0, " +
                          std::to_string(n) + ")");
}

}  // namespace

const char* to_string(Convention c) {
  switch (c) {
    case Convention::One: return "1";
    case Convention::Two: return "2";
    case Convention::Explicit: return "explicit";
  }
  return "?";
}

void RawHypergraph::add_edge(int head, std::vector<int> tail, double multiplicity) {
  edges.push_back(RawEdge{head, std::move(tail), multiplicity});
}

void RawHypergraph::add_undirected(std::span<const int> members) {
  if (members.size() < 2) throw StructuralError("hyperedge needs at least two members");
  for (std::size_t h = 0; h < members.size(); ++h) {
    std::vector<int> rest;
    for (std::size_t k = 0; k < members.size(); ++k)
      if (k != h) rest.push_back(members[k]);
    std::sort(rest.begin(), rest.end());
    do {
      add_edge(members[h], rest);
    } while (std::next_permutation(rest.begin(), rest.end()));
  }
}

// ---------------------------------------------------------------------------

std::size_t WeightedHypergraph::edge_count() const {
  std::size_t total = 0;
  for (const auto& o : orders_) total += o.edge_count();
  return total;
}

double WeightedHypergraph::max_weight() const {
  double w = 0.0;
  for (const auto& o : orders_)
    for (double x : o.weights) w = std::max(w, x);
  return w;
}

double WeightedHypergraph::weight_sum(int m, int head) const {
  if (m > max_order()) return 0.0;
  const Order& o = order(m);
  double s = 0.0;
  for (std::size_t e = o.begin(head); e < o.end(head); ++e) s += o.weights[e];
  return s;
}

double WeightedHypergraph::weight(int head, std::span<const int> tail) const {
  const int m = static_cast<int>(tail.size());
  if (m < 1 || m > max_order()) return 0.0;
  const Order& o = order(m);
  std::size_t lo = o.begin(head), hi = o.end(head);
  // entries of one head are sorted lexicographically by tail
  while (lo < hi) {
    std::size_t mid = lo + (hi - lo) / 2;
    auto t = o.tail(mid);
    if (std::lexicographical_compare(t.begin(), t.end(), tail.begin(), tail.end()))
      lo = mid + 1;
    else
      hi = mid;
  }
  if (lo < o.end(head) && std::ranges::equal(o.tail(lo), tail)) return o.weights[lo];
  return 0.0;
}

std::uint64_t WeightedHypergraph::fingerprint() const {
  Fnv1a h;
  h.value(n_);
  h.value(static_cast<int>(convention_));
  h.value(max_order());
  for (const auto& o : orders_) {
    h.value(o.m);
    h.bytes(o.head_offsets.data(), o.head_offsets.size() * sizeof(std::size_t));
    h.bytes(o.tails.data(), o.tails.size() * sizeof(int));
    h.bytes(o.weights.data(), o.weights.size() * sizeof(double));
  }
  return h.digest();
}

// ---------------------------------------------------------------------------

HypergraphBuilder::HypergraphBuilder(int n_vertices, int max_order) : n_(n_vertices) {
  if (n_vertices <= 0) throw StructuralError("hypergraph needs at least one vertex");
  if (max_order <= 0) throw StructuralError("max order must be positive");
  pending_.resize(static_cast<std::size_t>(max_order));
}

void HypergraphBuilder::add(int head, std::span<const int> tail, double weight) {
  const int m = static_cast<int>(tail.size());
  if (m < 1 || m > max_order())
    throw StructuralError("edge order " + std::to_string(m) + " outside [1, " +
                          std::to_string(max_order()) + "]");
  if (!std::isfinite(weight) || weight < 0.0)
    throw StructuralError("edge weight must be finite and nonnegative");
  check_vertex(head, n_);
  for (int j : tail) check_vertex(j, n_);
  Pending& p = pending_[static_cast<std::size_t>(m - 1)];
  p.heads.push_back(head);
  p.tails.insert(p.tails.end(), tail.begin(), tail.end());
  p.weights.push_back(weight);
}

WeightedHypergraph HypergraphBuilder::build(Convention tag, bool allow_loops) && {
  WeightedHypergraph h;
  h.n_ = n_;
  h.convention_ = tag;
  h.orders_.resize(pending_.size());
  for (std::size_t mi = 0; mi < pending_.size(); ++mi) {
    const int m = static_cast<int>(mi) + 1;
    Pending& p = pending_[mi];
    const std::size_t count = p.weights.size();
    auto tail_of = [&](std::size_t e) { return p.tails.data() + e * static_cast<std::size_t>(m); };

    if (m == 1 && !allow_loops)
      for (std::size_t e = 0; e < count; ++e)
        if (p.heads[e] == p.tails[e])
          throw StructuralError("traditional loop at vertex " + std::to_string(p.heads[e]));

    std::vector<std::size_t> idx(count);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    auto less = [&](std::size_t a, std::size_t b) {
      if (p.heads[a] != p.heads[b]) return p.heads[a] < p.heads[b];
      return std::lexicographical_compare(tail_of(a), tail_of(a) + m, tail_of(b), tail_of(b) + m);
    };
    bool sorted = true;
    for (std::size_t e = 1; e < count && sorted; ++e) sorted = less(idx[e - 1], idx[e]);
    if (!sorted) std::stable_sort(idx.begin(), idx.end(), less);

    WeightedHypergraph::Order& o = h.orders_[mi];
    o.m = m;
    o.head_offsets.assign(static_cast<std::size_t>(n_) + 1, 0);
    o.tails.reserve(p.tails.size());
    o.weights.reserve(count);
    std::vector<int> heads;
    heads.reserve(count);
    for (std::size_t k = 0; k < count;) {
      const std::size_t first = idx[k];
      double w = 0.0;
      std::size_t k2 = k;
      while (k2 < count && p.heads[idx[k2]] == p.heads[first] &&
             std::equal(tail_of(first), tail_of(first) + m, tail_of(idx[k2]))) {
        w += p.weights[idx[k2]];
        ++k2;
      }
      if (w > 0.0) {
        heads.push_back(p.heads[first]);
        o.tails.insert(o.tails.end(), tail_of(first), tail_of(first) + m);
        o.weights.push_back(w);
      }
      k = k2;
    }
    for (int hd : heads) ++o.head_offsets[static_cast<std::size_t>(hd) + 1];
    std::partial_sum(o.head_offsets.begin(), o.head_offsets.end(), o.head_offsets.begin());
    p = Pending{};
  }
  return h;
}

// ---------------------------------------------------------------------------

namespace {

void validate_raw(const RawHypergraph& raw) {
  if (raw.n_vertices <= 0) throw StructuralError("hypergraph needs at least one vertex");
  if (raw.max_order <= 0) throw StructuralError("max order must be positive");
  for (const RawEdge& e : raw.edges) {
    const int m = static_cast<int>(e.tail.size());
    if (m < 1 || m > raw.max_order)
      throw StructuralError("edge order " + std::to_string(m) + " outside [1, " +
                            std::to_string(raw.max_order) + "]");
    check_vertex(e.head, raw.n_vertices);
    for (int j : e.tail) check_vertex(j, raw.n_vertices);
    if (m == 1 && e.head == e.tail[0])
      throw StructuralError("traditional loop at vertex " + std::to_string(e.head));
    if (!std::isfinite(e.multiplicity) || e.multiplicity < 0.0)
      throw StructuralError("edge multiplicity must be finite and nonnegative");
  }
}

}  // namespace

DegreeReport degree_report(const RawHypergraph& raw) {
  validate_raw(raw);
  const auto n = static_cast<std::size_t>(raw.n_vertices);
  const auto mm = static_cast<std::size_t>(raw.max_order);
  DegreeReport r;
  r.degree.assign(mm, std::vector<double>(n, 0.0));
  r.normalized.assign(mm, std::vector<double>(n, 0.0));
  r.normalized_out.assign(n, 0.0);
  r.mean_degree.assign(mm, 0.0);
  for (const RawEdge& e : raw.edges) {
    const std::size_t mi = e.tail.size() - 1;
    r.normalized[mi][static_cast<std::size_t>(e.head)] += e.multiplicity;
    if (mi == 0) r.normalized_out[static_cast<std::size_t>(e.tail[0])] += e.multiplicity;
  }
  for (std::size_t mi = 0; mi < mm; ++mi) {
    const double fact = factorial(static_cast<int>(mi) + 1);
    for (std::size_t i = 0; i < n; ++i) r.degree[mi][i] = r.normalized[mi][i] / fact;
    r.mean_degree[mi] =
        std::accumulate(r.degree[mi].begin(), r.degree[mi].end(), 0.0) / static_cast<double>(n);
  }
  return r;
}

WeightedHypergraph normalize(const RawHypergraph& raw, Convention convention) {
  if (convention == Convention::Explicit)
    throw ParameterError("normalize expects Convention 1 or 2");
  const DegreeReport deg = degree_report(raw);
  HypergraphBuilder b(raw.n_vertices, raw.max_order);
  for (const RawEdge& e : raw.edges) {
    const int m = static_cast<int>(e.tail.size());
    const std::size_t mi = static_cast<std::size_t>(m - 1);
    const double denom_degree = convention == Convention::One
                                    ? deg.mean_degree[mi]
                                    : deg.degree[mi][static_cast<std::size_t>(e.head)];
    const double denom = factorial(m) * denom_degree;
    // 0/0 -> 0: a zero denominator only occurs when every numerator is zero
    const double w = denom > 0.0 ? e.multiplicity / denom : 0.0;
    b.add(e.head, e.tail, w);
  }
  return std::move(b).build(convention);
}

DegreeReport degree_report(const WeightedHypergraph& h) {
  const auto n = static_cast<std::size_t>(h.n_vertices());
  const auto mm = static_cast<std::size_t>(h.max_order());
  DegreeReport r;
  r.degree.assign(mm, std::vector<double>(n, 0.0));
  r.normalized.assign(mm, std::vector<double>(n, 0.0));
  r.normalized_out.assign(n, 0.0);
  r.mean_degree.assign(mm, 0.0);
  for (std::size_t mi = 0; mi < mm; ++mi) {
    const auto& o = h.order(static_cast<int>(mi) + 1);
    const double fact = factorial(o.m);
    for (std::size_t i = 0; i < n; ++i) {
      const int head = static_cast<int>(i);
      r.degree[mi][i] = static_cast<double>(o.end(head) - o.begin(head)) / fact;
      double s = 0.0;
      for (std::size_t e = o.begin(head); e < o.end(head); ++e) {
        s += o.weights[e];
        if (mi == 0) r.normalized_out[static_cast<std::size_t>(o.tails[e])] += o.weights[e];
      }
      r.normalized[mi][i] = s;
    }
    r.mean_degree[mi] =
        std::accumulate(r.degree[mi].begin(), r.degree[mi].end(), 0.0) / static_cast<double>(n);
  }
  return r;
}

bool is_secondary_loop(std::span<const int> tail) {
  for (std::size_t a = 0; a < tail.size(); ++a)
    for (std::size_t b = a + 1; b < tail.size(); ++b)
      if (tail[a] == tail[b]) return true;
  return false;
}

RegularityReport regularity_report(const WeightedHypergraph& h) {
  const auto n = static_cast<std::size_t>(h.n_vertices());
  const auto mm = static_cast<std::size_t>(h.max_order());
  const DegreeReport deg = degree_report(h);
  RegularityReport r;
  r.w_max = h.max_weight();
  for (const auto& row : deg.normalized)
    for (double d : row) r.delta_max = std::max(r.delta_max, d);
  for (double d : deg.normalized_out) r.delta_max_out = std::max(r.delta_max_out, d);

  r.sloop_weight.assign(n, std::vector<double>(mm, 0.0));
  for (std::size_t mi = 1; mi < mm; ++mi) {
    const auto& o = h.order(static_cast<int>(mi) + 1);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t e = o.begin(static_cast<int>(i)); e < o.end(static_cast<int>(i)); ++e)
        if (is_secondary_loop(o.tail(e))) r.sloop_weight[i][mi] += o.weights[e];
  }
  double worst = 0.0;
  for (const auto& row : r.sloop_weight)
    for (double s : row) worst = std::max(worst, s);
  r.sloop_ratio = r.w_max > 0.0 ? worst / std::sqrt(r.w_max) : 0.0;

  r.mu.assign(n, 0.0);
  const auto& o1 = h.order(1);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t e = o1.begin(static_cast<int>(i)); e < o1.end(static_cast<int>(i)); ++e)
      s += o1.weights[e] * o1.weights[e];
    r.mu[i] = std::sqrt(s);
    total += s;
  }
  r.frobenius_sq = total / static_cast<double>(n);
  return r;
}

WeightedHypergraph scale_orders(const WeightedHypergraph& h, std::span<const double> factors) {
  if (factors.size() != static_cast<std::size_t>(h.max_order()))
    throw ParameterError("need one scale factor per order");
  for (double f : factors)
    if (!std::isfinite(f) || f < 0.0) throw ParameterError("scale factors must be nonnegative");
  HypergraphBuilder b(h.n_vertices(), h.max_order());
  bool loops = false;
  for (int m = 1; m <= h.max_order(); ++m) {
    const auto& o = h.order(m);
    for (int i = 0; i < h.n_vertices(); ++i)
      for (std::size_t e = o.begin(i); e < o.end(i); ++e) {
        if (m == 1 && o.tails[e] == i) loops = true;
        b.add(i, o.tail(e), o.weights[e] * factors[static_cast<std::size_t>(m - 1)]);
      }
  }
  return std::move(b).build(h.convention(), loops);
}

}  // namespace nimfa
