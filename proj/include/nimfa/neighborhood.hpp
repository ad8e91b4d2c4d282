#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "nimfa/hypergraph.hpp"

namespace nimfa {

/// Dense indexing of neighbourhood vectors: for every order m = 1..M one slot
/// per state tuple in S^m. Tuples are numbered in base |S| with the first tail
/// position most significant.
class NeighborhoodLayout {
 public:
  NeighborhoodLayout() = default;
  NeighborhoodLayout(int n_states, int max_order);

  int n_states() const { return n_states_; }
  int max_order() const { return max_order_; }
  std::size_t size() const { return offsets_.back(); }
  std::size_t offset(int m) const { return offsets_[static_cast<std::size_t>(m - 1)]; }
  std::size_t tuple_count(int m) const {
    return offsets_[static_cast<std::size_t>(m)] - offsets_[static_cast<std::size_t>(m - 1)];
  }

  std::size_t tuple_index(std::span<const int> states) const;
  std::vector<int> tuple_states(int m, std::size_t index) const;
  /// Number of entries equal to `state` in tuple `index` of order m.
  int count_state(int m, std::size_t index, int state) const;

  bool operator==(const NeighborhoodLayout&) const = default;

 private:
  int n_states_ = 0;
  int max_order_ = 0;
  std::vector<std::size_t> offsets_{0};
};

/// Read-only view of one vertex's neighbourhood vector.
class NeighborhoodView {
 public:
  NeighborhoodView(const NeighborhoodLayout& layout, std::span<const double> values)
      : layout_(&layout), values_(values) {}

  const NeighborhoodLayout& layout() const { return *layout_; }
  std::span<const double> values() const { return values_; }
  std::span<const double> order(int m) const {
    return values_.subspan(layout_->offset(m), layout_->tuple_count(m));
  }
  double at(int m, std::size_t tuple) const { return values_[layout_->offset(m) + tuple]; }

 private:
  const NeighborhoodLayout* layout_;
  std::span<const double> values_;
};

/// Owning neighbourhood vector.
class Neighborhood {
 public:
  explicit Neighborhood(const NeighborhoodLayout& layout)
      : layout_(layout), values_(layout.size(), 0.0) {}

  NeighborhoodView view() const { return {layout_, values_}; }
  operator NeighborhoodView() const { return view(); }

  const NeighborhoodLayout& layout() const { return layout_; }
  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }
  double at(int m, std::size_t tuple) const { return values_[layout_.offset(m) + tuple]; }
  double& at(int m, std::size_t tuple) { return values_[layout_.offset(m) + tuple]; }
  /// Convenience for tuples given state by state.
  double& at(std::initializer_list<int> states) {
    const int m = static_cast<int>(states.size());
    return at(m, layout_.tuple_index(std::span<const int>(states.begin(), states.size())));
  }

 private:
  NeighborhoodLayout layout_;
  std::vector<double> values_;
};

/// phi_i from a full state assignment: sum over stored tails of w * indicator.
/// Orders beyond the hypergraph's max order stay zero; orders beyond the layout are ignored.
void empirical_neighborhood(const WeightedHypergraph& h, const NeighborhoodLayout& layout,
                            std::span<const int> states, int head, std::span<double> out);

/// zeta_i for all vertices from occupancy probabilities z (N x |S|, row-major).
/// out has N x layout.size() entries. If dz is non-empty, dzeta receives the
/// time derivative of zeta along dz (product rule for m >= 2).
void mean_field_neighborhoods(const WeightedHypergraph& h, const NeighborhoodLayout& layout,
                              std::span<const double> z, std::span<double> out,
                              std::span<const double> dz = {}, std::span<double> dzeta = {});

}  // namespace nimfa
