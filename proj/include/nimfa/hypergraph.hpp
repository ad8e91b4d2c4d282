#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <vector>

namespace nimfa {

/// How the weights of a hypergraph were obtained.
///   One      - w = a / (m! * mean in-degree)
///   Two      - w = a / (m! * own in-degree)
///   Explicit - weights given directly (mean-field limits, reduced group graphs, files)
enum class Convention { One, Two, Explicit };

const char* to_string(Convention c);

/// One ordered (head, tail) adjacency entry of an unweighted hypergraph.
/// The order m of the interaction is tail.size().
struct RawEdge {
  int head = 0;
  std::vector<int> tail;
  double multiplicity = 1.0;
};

/// Unweighted (or multiplicity-weighted) hypergraph prior to normalization.
///
/// Every ordered tail is its own entry: an undirected triangle {0,1,2} contributes
/// (0,(1,2)), (0,(2,1)), (1,(0,2)), ... so that degree counts carry the m! factor.
struct RawHypergraph {
  int n_vertices = 0;
  int max_order = 1;
  std::vector<RawEdge> edges;

  RawHypergraph() = default;
  RawHypergraph(int n, int max_order) : n_vertices(n), max_order(max_order) {}

  void add_edge(int head, std::vector<int> tail, double multiplicity = 1.0);

  /// Adds every (head, ordered tail) realisation of an undirected hyperedge with
  /// members.size() = m + 1 vertices.
  void add_undirected(std::span<const int> members);
};

class HypergraphBuilder;

/// Weighted directed hypergraph with a distinguished first vertex per edge.
///
/// Edges of each order m are stored head-major (CSR): for head i the entries
/// [head_offsets[i], head_offsets[i+1]) hold ordered m-tuples and their weights.
/// Instances are immutable once built.
class WeightedHypergraph {
 public:
  struct Order {
    int m = 1;
    std::vector<std::size_t> head_offsets;
    std::vector<int> tails;  // m entries per edge
    std::vector<double> weights;

    std::size_t edge_count() const { return weights.size(); }
    std::span<const int> tail(std::size_t e) const {
      return {tails.data() + e * static_cast<std::size_t>(m), static_cast<std::size_t>(m)};
    }
    std::size_t begin(int head) const { return head_offsets[head]; }
    std::size_t end(int head) const { return head_offsets[head + 1]; }
  };

  WeightedHypergraph() = default;

  int n_vertices() const { return n_; }
  int max_order() const { return static_cast<int>(orders_.size()); }
  Convention convention() const { return convention_; }

  /// Edges of order m, 1 <= m <= max_order().
  const Order& order(int m) const { return orders_.at(static_cast<std::size_t>(m - 1)); }

  std::size_t edge_count() const;
  std::size_t edge_count(int m) const { return order(m).edge_count(); }

  /// Largest weight over all orders.
  double max_weight() const;

  /// delta^(m)(i): total m-weight acting on vertex i.
  double weight_sum(int m, int head) const;

  /// Weight of a single ordered entry, 0 when absent.
  double weight(int head, std::span<const int> tail) const;

  /// Stable 64-bit content hash (vertex count, convention, every entry).
  std::uint64_t fingerprint() const;

 private:
  friend class HypergraphBuilder;
  int n_ = 0;
  Convention convention_ = Convention::Explicit;
  std::vector<Order> orders_;
};

/// Collects weighted entries and produces a WeightedHypergraph. Duplicate
/// (head, tail) entries are summed; zero weights are dropped.
class HypergraphBuilder {
 public:
  HypergraphBuilder(int n_vertices, int max_order);

  void add(int head, std::span<const int> tail, double weight);
  void add(int head, std::initializer_list<int> tail, double weight) {
    add(head, std::span<const int>(tail.begin(), tail.size()), weight);
  }

  int n_vertices() const { return n_; }
  int max_order() const { return static_cast<int>(pending_.size()); }

  /// Traditional loops (m = 1, head == tail) are rejected unless allow_loops is
  /// set; the mean-field limit graphs and reduced group graphs need them.
  WeightedHypergraph build(Convention tag, bool allow_loops = false) &&;

 private:
  struct Pending {
    std::vector<int> heads;
    std::vector<int> tails;
    std::vector<double> weights;
  };
  int n_;
  std::vector<Pending> pending_;
};

struct DegreeReport {
  std::vector<std::vector<double>> degree;      // [m-1][i], d^(m)(i)
  std::vector<double> mean_degree;              // [m-1]
  std::vector<std::vector<double>> normalized;  // [m-1][i], delta^(m)(i)
  std::vector<double> normalized_out;           // m = 1 only, delta_out(j)
};

struct RegularityReport {
  double w_max = 0.0;
  double delta_max = 0.0;
  double delta_max_out = 0.0;
  std::vector<std::vector<double>> sloop_weight;  // [i][m-1]
  double sloop_ratio = 0.0;                       // max sloop_weight / sqrt(w_max)
  double frobenius_sq = 0.0;                      // (1/N) sum_ij w_ij^2, m = 1
  std::vector<double> mu;                         // sqrt(sum_j w_ij^2), m = 1
};

/// Normalizes adjacency multiplicities by Convention 1 or 2. Zero denominators give zero weights.
WeightedHypergraph normalize(const RawHypergraph& raw, Convention convention);

DegreeReport degree_report(const WeightedHypergraph& h);
/// Degrees of the unnormalized multiplicities; "normalized" equals the raw weight sums.
DegreeReport degree_report(const RawHypergraph& raw);

RegularityReport regularity_report(const WeightedHypergraph& h);

/// True when some tail position repeats a vertex (a secondary loop).
bool is_secondary_loop(std::span<const int> tail);

/// Multiplies every order-m weight by factors[m-1] (majority rule importance factors).
WeightedHypergraph scale_orders(const WeightedHypergraph& h, std::span<const double> factors);

}  // namespace nimfa
