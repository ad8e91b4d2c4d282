#include "nimfa/neighborhood.hpp"

#include <algorithm>

#include "nimfa/errors.hpp"

namespace nimfa {

NeighborhoodLayout::NeighborhoodLayout(int n_states, int max_order)
    : n_states_(n_states), max_order_(max_order) {
  if (n_states < 1 || max_order < 1) throw ParameterError("layout needs |S| >= 1 and M >= 1");
  std::size_t count = 1;
  for (int m = 1; m <= max_order; ++m) {
    count *= static_cast<std::size_t>(n_states);
    offsets_.push_back(offsets_.back() + count);
  }
}

std::size_t NeighborhoodLayout::tuple_index(std::span<const int> states) const {
  std::size_t idx = 0;
  for (int s : states) idx = idx * static_cast<std::size_t>(n_states_) + static_cast<std::size_t>(s);
  return idx;
}

std::vector<int> NeighborhoodLayout::tuple_states(int m, std::size_t index) const {
  std::vector<int> s(static_cast<std::size_t>(m));
  for (int l = m - 1; l >= 0; --l) {
    s[static_cast<std::size_t>(l)] = static_cast<int>(index % static_cast<std::size_t>(n_states_));
    index /= static_cast<std::size_t>(n_states_);
  }
  return s;
}

int NeighborhoodLayout::count_state(int m, std::size_t index, int state) const {
  int c = 0;
  for (int l = 0; l < m; ++l) {
    if (static_cast<int>(index % static_cast<std::size_t>(n_states_)) == state) ++c;
    index /= static_cast<std::size_t>(n_states_);
  }
  return c;
}

void empirical_neighborhood(const WeightedHypergraph& h, const NeighborhoodLayout& layout,
                            std::span<const int> states, int head, std::span<double> out) {
  std::fill(out.begin(), out.end(), 0.0);
  const int top = std::min(h.max_order(), layout.max_order());
  for (int m = 1; m <= top; ++m) {
    const auto& o = h.order(m);
    const std::size_t base = layout.offset(m);
    for (std::size_t e = o.begin(head); e < o.end(head); ++e) {
      std::size_t idx = 0;
      for (int j : o.tail(e))
        idx = idx * static_cast<std::size_t>(layout.n_states()) +
              static_cast<std::size_t>(states[static_cast<std::size_t>(j)]);
      out[base + idx] += o.weights[e];
    }
  }
}

namespace {

// Accumulates w * prod_l z_{j_l, s_l} into every tuple slot (and its derivative).
void accumulate_tuple(int m, int n_states, std::span<const int> tail, double w,
                      std::span<const double> z, std::span<const double> dz, double* out,
                      double* dout) {
  const auto S = static_cast<std::size_t>(n_states);
  std::size_t total = 1;
  for (int l = 0; l < m; ++l) total *= S;
  const bool deriv = dout != nullptr;
  for (std::size_t idx = 0; idx < total; ++idx) {
    double p = w, dp = 0.0;
    std::size_t rest = idx, div = total;
    for (int l = 0; l < m; ++l) {
      div /= S;
      const std::size_t s = rest / div;
      rest %= div;
      const std::size_t k = static_cast<std::size_t>(tail[static_cast<std::size_t>(l)]) * S + s;
      if (deriv) dp = dp * z[k] + p * dz[k];
      p *= z[k];
    }
    out[idx] += p;
    if (deriv) dout[idx] += dp;
  }
}

}  // namespace

void mean_field_neighborhoods(const WeightedHypergraph& h, const NeighborhoodLayout& layout,
                              std::span<const double> z, std::span<double> out,
                              std::span<const double> dz, std::span<double> dzeta) {
  const int n = h.n_vertices();
  const auto S = static_cast<std::size_t>(layout.n_states());
  const std::size_t L = layout.size();
  std::fill(out.begin(), out.end(), 0.0);
  const bool deriv = !dz.empty();
  if (deriv) std::fill(dzeta.begin(), dzeta.end(), 0.0);
  const int top = std::min(h.max_order(), layout.max_order());
  for (int m = 1; m <= top; ++m) {
    const auto& o = h.order(m);
    const std::size_t base = layout.offset(m);
    for (int i = 0; i < n; ++i) {
      double* dst = out.data() + static_cast<std::size_t>(i) * L + base;
      double* ddst = deriv ? dzeta.data() + static_cast<std::size_t>(i) * L + base : nullptr;
      if (m == 1) {
        // linear case, kept tight since it dominates graph workloads
        for (std::size_t e = o.begin(i); e < o.end(i); ++e) {
          const double w = o.weights[e];
          const std::size_t j = static_cast<std::size_t>(o.tails[e]) * S;
          for (std::size_t s = 0; s < S; ++s) dst[s] += w * z[j + s];
          if (deriv)
            for (std::size_t s = 0; s < S; ++s) ddst[s] += w * dz[j + s];
        }
      } else {
        for (std::size_t e = o.begin(i); e < o.end(i); ++e)
          accumulate_tuple(m, layout.n_states(), o.tail(e), o.weights[e], z, dz, dst, ddst);
      }
    }
  }
}

}  // namespace nimfa
