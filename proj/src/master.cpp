#include <algorithm>
#include <cmath>
#include <string>

#include "nimfa/errors.hpp"
#include "nimfa/ode.hpp"
#include "nimfa/stochastic.hpp"

namespace nimfa {

std::size_t product_index(std::span<const int> states, int n_states) {
  std::size_t idx = 0;
  for (int s : states) idx = idx * static_cast<std::size_t>(n_states) + static_cast<std::size_t>(s);
  return idx;
}

int MasterSolution::vertex_state(std::size_t x, int i) const {
  for (int k = n_vertices - 1; k > i; --k) x /= static_cast<std::size_t>(n_states);
  return static_cast<int>(x % static_cast<std::size_t>(n_states));
}

double MasterSolution::marginal(std::size_t g, int i, int s) const {
  double p = 0.0;
  const auto& d = distribution[g];
  for (std::size_t x = 0; x < d.size(); ++x)
    if (vertex_state(x, i) == s) p += d[x];
  return p;
}

double MasterSolution::pair_marginal(std::size_t g, int i, int j, int si, int sj) const {
  double p = 0.0;
  const auto& d = distribution[g];
  for (std::size_t x = 0; x < d.size(); ++x)
    if (vertex_state(x, i) == si && vertex_state(x, j) == sj) p += d[x];
  return p;
}

double MasterSolution::total(std::size_t g) const {
  double p = 0.0;
  for (double v : distribution[g]) p += v;
  return p;
}

MasterSolution master_solve(const WeightedHypergraph& h, const RateModel& model,
                            std::span<const double> init_distribution,
                            std::span<const double> grid) {
  const int N = h.n_vertices();
  const int S = model.n_states();
  if (h.max_order() > model.max_order())
    throw ParameterError("hypergraph order exceeds the model's maximal order");
  double count = 1.0;
  for (int i = 0; i < N; ++i) count *= S;
  if (count > static_cast<double>(kMasterCapacity))
    throw CapacityError("master equation needs |S|^N = " + std::to_string(S) + "^" +
                        std::to_string(N) + " states, above the guard of " +
                        std::to_string(kMasterCapacity));
  const auto X = static_cast<std::size_t>(count);
  if (init_distribution.size() != X)
    throw ParameterError("initial distribution must have |S|^N entries");
  double mass = 0.0;
  for (double p : init_distribution) {
    if (!(p >= 0.0)) throw ParameterError("initial distribution has a negative entry");
    mass += p;
  }
  if (std::abs(mass - 1.0) > 1e-12) throw ParameterError("initial distribution must sum to 1");
  for (double t : grid)
    if (!(t >= 0.0)) throw ParameterError("grid times must be nonnegative");

  // Sparse off-diagonal transitions, source-major.
  const NeighborhoodLayout& layout = model.layout();
  std::vector<std::size_t> target;
  std::vector<double> rate;
  std::vector<std::size_t> offsets{0};
  std::vector<double> exit(X, 0.0);
  std::vector<int> states(static_cast<std::size_t>(N));
  std::vector<double> phi(layout.size());
  std::vector<std::size_t> place(static_cast<std::size_t>(N));
  {
    std::size_t p = 1;
    for (int i = N - 1; i >= 0; --i) {
      place[static_cast<std::size_t>(i)] = p;
      p *= static_cast<std::size_t>(S);
    }
  }
  for (std::size_t x = 0; x < X; ++x) {
    std::size_t rest = x;
    for (int i = N - 1; i >= 0; --i) {
      states[static_cast<std::size_t>(i)] = static_cast<int>(rest % static_cast<std::size_t>(S));
      rest /= static_cast<std::size_t>(S);
    }
    for (int i = 0; i < N; ++i) {
      empirical_neighborhood(h, layout, states, i, phi);
      const int from = states[static_cast<std::size_t>(i)];
      for (int to = 0; to < S; ++to) {
        if (to == from) continue;
        const double q = model.rate(from, to, NeighborhoodView(layout, phi));
        if (!(q >= 0.0) || !std::isfinite(q)) throw ModelError("rate function returned an invalid value");
        if (q == 0.0) continue;
        const std::size_t y = x + static_cast<std::size_t>(to - from) * place[static_cast<std::size_t>(i)];
        target.push_back(y);
        rate.push_back(q);
        exit[x] += q;
      }
    }
    offsets.push_back(target.size());
  }

  ode::Rhs rhs = [&](double, std::span<const double> p, std::span<double> dp) {
    for (std::size_t x = 0; x < X; ++x) dp[x] = -exit[x] * p[x];
    for (std::size_t x = 0; x < X; ++x) {
      const double px = p[x];
      if (px == 0.0) continue;
      for (std::size_t k = offsets[x]; k < offsets[x + 1]; ++k) dp[target[k]] += rate[k] * px;
    }
  };

  ode::Options opt;
  opt.rtol = 1e-10;
  opt.atol = 1e-13;
  opt.stop_times.assign(grid.begin(), grid.end());
  const double t_end = grid.empty() ? 0.0 : *std::max_element(grid.begin(), grid.end());
  ode::DenseSolution dense = ode::integrate(rhs, init_distribution, 0.0, t_end, opt);

  MasterSolution out;
  out.n_vertices = N;
  out.n_states = S;
  out.grid.assign(grid.begin(), grid.end());
  for (double t : grid) out.distribution.push_back(dense.eval(t));
  return out;
}

}  // namespace nimfa
