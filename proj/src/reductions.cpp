#include <algorithm>
#include <cmath>
#include <map>

#include "nimfa/errors.hpp"
#include "nimfa/meanfield.hpp"

namespace nimfa {

namespace {

ode::StateCheck row_simplex_guard(std::size_t S) {
  return [S](std::span<const double> y) {
    for (std::size_t r = 0; r * S < y.size(); ++r) {
      double sum = 0.0;
      for (std::size_t s = 0; s < S; ++s) {
        if (y[r * S + s] < -1e-9) return false;
        sum += y[r * S + s];
      }
      if (std::abs(sum - 1.0) > 1e-9) return false;
    }
    return true;
  };
}

void apply_generator(const RateModel& model, NeighborhoodView zeta, const double* z, double* dz) {
  const int S = model.n_states();
  for (int s = 0; s < S; ++s) dz[s] = 0.0;
  for (int from = 0; from < S; ++from) {
    if (z[from] == 0.0) continue;
    for (int to = 0; to < S; ++to) {
      if (to == from) continue;
      const double flow = model.rate(from, to, zeta) * z[from];
      dz[to] += flow;
      dz[from] -= flow;
    }
  }
}

// Integrates a class system where fill(z, zeta) writes every class's
// neighbourhood vector (C x L) from the class occupancies (C x |S|).
template <typename Fill>
ReducedSolution solve_classes(const RateModel& model, std::size_t classes,
                              std::span<const double> z0, double t_end,
                              const ode::Options& options, Fill fill) {
  const auto S = static_cast<std::size_t>(model.n_states());
  if (z0.size() != classes * S)
    throw ParameterError("initial condition must hold one simplex vector per class");
  check_simplex(z0, model.n_states(), 1e-9);
  const NeighborhoodLayout& layout = model.layout();
  const std::size_t L = layout.size();
  std::vector<double> zeta(classes * L);
  ode::Rhs rhs = [&](double, std::span<const double> z, std::span<double> dz) {
    std::fill(zeta.begin(), zeta.end(), 0.0);
    fill(z, std::span<double>(zeta));
    for (std::size_t c = 0; c < classes; ++c)
      apply_generator(model, NeighborhoodView(layout, {zeta.data() + c * L, L}), &z[c * S],
                      &dz[c * S]);
  };
  ode::Options opt = options;
  if (!opt.accept) opt.accept = row_simplex_guard(S);
  ReducedSolution out;
  out.n_states = model.n_states();
  out.dense = ode::integrate(rhs, z0, 0.0, t_end, opt);
  return out;
}

// Writes f * prod_l x^(l)_{s_l} into every tuple slot of order m, where
// the factor for position l is given by pick(l, s).
template <typename Pick>
void fill_products(const NeighborhoodLayout& layout, int m, double f, double* out, Pick pick) {
  const std::size_t base = layout.offset(m);
  for (std::size_t idx = 0; idx < layout.tuple_count(m); ++idx) {
    const auto states = layout.tuple_states(m, idx);
    out[base + idx] += f * pick(states);
  }
}

}  // namespace

MetapopReduction metapop_reduce(const WeightedHypergraph& h, std::span<const int> group_of,
                                std::span<const double> z0, int n_states) {
  const int N = h.n_vertices();
  if (group_of.size() != static_cast<std::size_t>(N))
    throw ParameterError("partition must assign every vertex to a group");
  int K = 0;
  for (int g : group_of) {
    if (g < 0) throw ParameterError("group indices must be nonnegative");
    K = std::max(K, g + 1);
  }
  std::vector<double> sizes(static_cast<std::size_t>(K), 0.0);
  for (int g : group_of) sizes[static_cast<std::size_t>(g)] += 1.0;
  for (int k = 0; k < K; ++k)
    if (sizes[static_cast<std::size_t>(k)] == 0.0)
      throw ParameterError("group " + std::to_string(k) + " is empty");

  HypergraphBuilder builder(K, h.max_order());
  std::vector<int> tail;
  for (int m = 1; m <= h.max_order(); ++m) {
    const auto& o = h.order(m);
    tail.resize(static_cast<std::size_t>(m));
    for (int i = 0; i < N; ++i) {
      const int k = group_of[static_cast<std::size_t>(i)];
      const double inv = 1.0 / sizes[static_cast<std::size_t>(k)];
      for (std::size_t e = o.begin(i); e < o.end(i); ++e) {
        auto t = o.tail(e);
        for (std::size_t l = 0; l < t.size(); ++l)
          tail[l] = group_of[static_cast<std::size_t>(t[l])];
        builder.add(k, tail, o.weights[e] * inv);
      }
    }
  }

  MetapopReduction out;
  out.reduced = std::move(builder).build(Convention::Explicit, true);
  out.group_sizes = sizes;
  const auto S = static_cast<std::size_t>(n_states);
  if (z0.size() != static_cast<std::size_t>(N) * S)
    throw ParameterError("initial condition must hold one simplex vector per vertex");
  out.z0.assign(static_cast<std::size_t>(K) * S, 0.0);
  for (std::size_t i = 0; i < static_cast<std::size_t>(N); ++i) {
    const auto k = static_cast<std::size_t>(group_of[i]);
    for (std::size_t s = 0; s < S; ++s) out.z0[k * S + s] += z0[i * S + s] / sizes[k];
  }
  return out;
}

ReducedSolution metapop_solve(const MetapopReduction& reduction, const RateModel& model,
                              double t_end, const ode::Options& options) {
  NimfaSolution sol = nimfa_solve(reduction.reduced, model, reduction.z0, t_end, options, false);
  ReducedSolution out;
  out.tag = ReductionTag::Metapopulation;
  out.n_states = model.n_states();
  out.group_sizes = reduction.group_sizes;
  double total = 0.0;
  for (double s : out.group_sizes) total += s;
  for (double s : out.group_sizes) out.group_weights.push_back(s / total);
  out.dense = sol.dense();
  return out;
}

DegreeClasses degree_classes(const std::vector<std::vector<double>>& degrees) {
  if (degrees.empty()) throw ParameterError("degree sequence is empty");
  const std::size_t N = degrees.front().size();
  for (const auto& d : degrees)
    if (d.size() != N) throw ParameterError("degree sequences of all orders need equal length");
  std::map<std::vector<double>, std::vector<int>> classes;
  for (std::size_t i = 0; i < N; ++i) {
    std::vector<double> key;
    for (const auto& d : degrees) {
      if (!(d[i] >= 0.0) || !std::isfinite(d[i]))
        throw ParameterError("degrees must be finite and nonnegative");
      key.push_back(d[i]);
    }
    classes[key].push_back(static_cast<int>(i));
  }
  DegreeClasses out;
  out.class_of.assign(N, 0);
  int c = 0;
  for (const auto& [key, members] : classes) {
    out.degrees.push_back(key);
    out.sizes.push_back(static_cast<double>(members.size()));
    for (int i : members) out.class_of[static_cast<std::size_t>(i)] = c;
    ++c;
  }
  return out;
}

ReducedSolution imfa_solve(const std::vector<std::vector<double>>& degrees,
                           const RateModel& model, Convention convention,
                           std::span<const double> z0, double t_end,
                           const ode::Options& options) {
  if (convention == Convention::Explicit)
    throw ParameterError("IMFA needs Convention 1 or 2");
  const DegreeClasses dc = degree_classes(degrees);
  const int M = static_cast<int>(degrees.size());
  if (M > model.max_order()) throw ParameterError("degree orders exceed the model's order");
  const std::size_t C = dc.sizes.size();
  const auto S = static_cast<std::size_t>(model.n_states());
  const NeighborhoodLayout& layout = model.layout();
  const std::size_t L = layout.size();
  double N = 0.0;
  for (double s : dc.sizes) N += s;

  std::vector<double> dbar(static_cast<std::size_t>(M), 0.0);
  for (std::size_t c = 0; c < C; ++c)
    for (int m = 0; m < M; ++m)
      dbar[static_cast<std::size_t>(m)] += dc.sizes[c] * dc.degrees[c][static_cast<std::size_t>(m)];
  for (double& d : dbar) d /= N;

  std::vector<double> theta(S);
  auto fill = [&](std::span<const double> z, std::span<double> zeta) {
    for (int m = 1; m <= M; ++m) {
      const double db = dbar[static_cast<std::size_t>(m - 1)];
      if (db == 0.0) continue;
      std::fill(theta.begin(), theta.end(), 0.0);
      for (std::size_t c = 0; c < C; ++c) {
        const double wgt = dc.sizes[c] * dc.degrees[c][static_cast<std::size_t>(m - 1)] / (db * N);
        for (std::size_t s = 0; s < S; ++s) theta[s] += wgt * z[c * S + s];
      }
      for (std::size_t c = 0; c < C; ++c) {
        const double k = dc.degrees[c][static_cast<std::size_t>(m - 1)];
        const double f = convention == Convention::One ? k / db : (k > 0.0 ? 1.0 : 0.0);
        if (f == 0.0) continue;
        fill_products(layout, m, f, zeta.data() + c * L, [&](const std::vector<int>& st) {
          double p = 1.0;
          for (int s : st) p *= theta[static_cast<std::size_t>(s)];
          return p;
        });
      }
    }
  };
  ReducedSolution out = solve_classes(model, C, z0, t_end, options, fill);
  out.tag = ReductionTag::IMFA;
  out.group_sizes = dc.sizes;
  for (double s : dc.sizes) out.group_weights.push_back(s / N);
  return out;
}

ReducedSolution activity_solve(const std::vector<std::vector<double>>& activities,
                               std::span<const double> class_sizes, const RateModel& model,
                               std::span<const double> z0, double t_end,
                               const ode::Options& options) {
  const std::size_t C = class_sizes.size();
  const int M = static_cast<int>(activities.size());
  if (C == 0) throw ParameterError("activity model needs at least one class");
  if (M > model.max_order()) throw ParameterError("activity orders exceed the model's order");
  double N = 0.0;
  for (double s : class_sizes) {
    if (!(s > 0.0)) throw ParameterError("activity classes must be non-empty");
    N += s;
  }
  for (const auto& a : activities) {
    if (a.size() != C) throw ParameterError("one activity per class and order is required");
    for (double v : a)
      if (!(v >= 0.0) || !std::isfinite(v))
        throw ParameterError("activities must be finite and nonnegative");
  }
  const auto S = static_cast<std::size_t>(model.n_states());
  const NeighborhoodLayout& layout = model.layout();
  const std::size_t L = layout.size();
  std::vector<double> E(S), psi(S);

  auto fill = [&](std::span<const double> z, std::span<double> zeta) {
    std::fill(E.begin(), E.end(), 0.0);
    for (std::size_t c = 0; c < C; ++c)
      for (std::size_t s = 0; s < S; ++s) E[s] += class_sizes[c] / N * z[c * S + s];
    for (int m = 1; m <= M; ++m) {
      const auto& a = activities[static_cast<std::size_t>(m - 1)];
      std::fill(psi.begin(), psi.end(), 0.0);
      for (std::size_t c = 0; c < C; ++c)
        for (std::size_t s = 0; s < S; ++s) psi[s] += class_sizes[c] / N * a[c] * z[c * S + s];
      for (std::size_t c = 0; c < C; ++c) {
        // a_c prod_l E_{s_l} + sum_r psi_{s_r} prod_{l != r} E_{s_l}
        fill_products(layout, m, 1.0, zeta.data() + c * L, [&](const std::vector<int>& st) {
          double all = a[c];
          for (int s : st) all *= E[static_cast<std::size_t>(s)];
          double mixed = 0.0;
          for (std::size_t r = 0; r < st.size(); ++r) {
            double p = psi[static_cast<std::size_t>(st[r])];
            for (std::size_t l = 0; l < st.size(); ++l)
              if (l != r) p *= E[static_cast<std::size_t>(st[l])];
            mixed += p;
          }
          return all + mixed;
        });
      }
    }
  };
  ReducedSolution out = solve_classes(model, C, z0, t_end, options, fill);
  out.tag = ReductionTag::ActivityDriven;
  out.group_sizes.assign(class_sizes.begin(), class_sizes.end());
  for (double s : class_sizes) out.group_weights.push_back(s / N);
  return out;
}

PartitionSpec PartitionSpec::from_blocks(std::vector<int> block_of) {
  PartitionSpec p;
  for (int b : block_of) {
    if (b < 0) throw ParameterError("block indices must be nonnegative");
    p.n_blocks = std::max(p.n_blocks, b);
  }
  p.block_of = std::move(block_of);
  return p;
}

PartitionReduction partition_reduce(const WeightedHypergraph& h, const PartitionSpec& partition,
                                    const RateModel& model, std::span<const double> z0,
                                    double t_end, const ode::Options& options) {
  for (int m = 2; m <= h.max_order(); ++m)
    if (h.edge_count(m) > 0) throw UnsupportedError("partition reduction is defined for graphs only");
  if (model.affine() == nullptr)
    throw UnsupportedError("partition reduction needs a model with affine rates");
  const int N = h.n_vertices();
  const int K = partition.n_blocks;
  if (partition.block_of.size() != static_cast<std::size_t>(N))
    throw ParameterError("partition must assign every vertex to a block");
  if (K < 1) throw ParameterError("partition needs at least one regular block");

  std::vector<double> size(static_cast<std::size_t>(K) + 1, 0.0);
  for (int b : partition.block_of) {
    if (b < 0 || b > K) throw ParameterError("block index out of range");
    size[static_cast<std::size_t>(b)] += 1.0;
  }
  for (int k = 2; k <= K; ++k)
    if (size[static_cast<std::size_t>(k)] != size[1])
      throw ParameterError("non-exceptional blocks must have equal sizes");
  if (size[1] == 0.0) throw ParameterError("regular blocks must be non-empty");

  PartitionReduction out;
  const auto Ku = static_cast<std::size_t>(K);
  out.rho.assign(Ku, std::vector<double>(Ku, 0.0));
  double edges = 0.0;
  const auto& o = h.order(1);
  for (int i = 0; i < N; ++i)
    for (std::size_t e = o.begin(i); e < o.end(i); ++e) {
      if (!(o.weights[e] > 0.0)) continue;
      edges += 1.0;
      const int k = partition.block_of[static_cast<std::size_t>(i)];
      const int l = partition.block_of[static_cast<std::size_t>(o.tails[e])];
      if (k > 0 && l > 0) out.rho[static_cast<std::size_t>(k - 1)][static_cast<std::size_t>(l - 1)] += 1.0;
    }
  for (auto& row : out.rho)
    for (double& v : row) v /= size[1] * size[1];
  const double dbar = edges / N;
  out.p = dbar / N;
  out.kappa = size[1] / N;
  if (out.p == 0.0) throw ParameterError("graph has no edges");

  HypergraphBuilder builder(K, 1);
  out.wbar.assign(Ku, std::vector<double>(Ku, 0.0));
  for (int k = 0; k < K; ++k)
    for (int l = 0; l < K; ++l) {
      const double w = out.kappa / out.p * out.rho[static_cast<std::size_t>(k)][static_cast<std::size_t>(l)];
      out.wbar[static_cast<std::size_t>(k)][static_cast<std::size_t>(l)] = w;
      builder.add(k, {l}, w);
    }
  out.reduced = std::move(builder).build(Convention::Explicit, true);

  const auto S = static_cast<std::size_t>(model.n_states());
  if (z0.size() != static_cast<std::size_t>(N) * S)
    throw ParameterError("initial condition must hold one simplex vector per vertex");
  out.v0.assign(Ku * S, 0.0);
  for (std::size_t i = 0; i < static_cast<std::size_t>(N); ++i) {
    const int b = partition.block_of[i];
    if (b == 0) continue;
    for (std::size_t s = 0; s < S; ++s)
      out.v0[static_cast<std::size_t>(b - 1) * S + s] += z0[i * S + s] / size[1];
  }

  NimfaSolution sol = nimfa_solve(out.reduced, model, out.v0, t_end, options, false);
  out.solution.tag = ReductionTag::Partition;
  out.solution.n_states = model.n_states();
  out.solution.group_sizes.assign(Ku, size[1]);
  out.solution.group_weights.assign(Ku, out.kappa);
  out.solution.dense = sol.dense();
  return out;
}

}  // namespace nimfa
