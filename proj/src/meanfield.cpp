#include "nimfa/meanfield.hpp"

#include <algorithm>
#include <cmath>

#include "nimfa/errors.hpp"
#include "nimfa/util.hpp"

namespace nimfa {

ode::Options meanfield_options() {
  ode::Options o;
  o.rtol = 1e-8;
  o.atol = 1e-10;
  o.h_min_factor = 1e-12;
  return o;
}

void check_simplex(std::span<const double> z, int n_states, double tol) {
  const auto S = static_cast<std::size_t>(n_states);
  if (S == 0 || z.size() % S != 0) throw ParameterError("initial condition has the wrong size");
  for (std::size_t r = 0; r * S < z.size(); ++r) {
    double sum = 0.0;
    for (std::size_t s = 0; s < S; ++s) {
      const double v = z[r * S + s];
      if (!std::isfinite(v) || v < -tol)
        throw ParameterError("initial vector " + std::to_string(r) + " has a negative entry");
      sum += v;
    }
    if (std::abs(sum - 1.0) > std::max(tol, 1e-12) * static_cast<double>(S))
      throw ParameterError("initial vector " + std::to_string(r) + " does not sum to 1");
  }
}

namespace {

// Rejects states that left the simplex by more than the admissible drift.
ode::StateCheck simplex_guard(std::size_t S) {
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

// dz = Q(zeta) z for one row.
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

double simplex_defect(const ode::DenseSolution& d, std::size_t S) {
  double worst = 0.0;
  for (std::size_t k = 0; k < d.nodes(); ++k) {
    auto y = d.value(k);
    for (std::size_t r = 0; r * S < y.size(); ++r) {
      double sum = 0.0;
      for (std::size_t s = 0; s < S; ++s) sum += y[r * S + s];
      worst = std::max(worst, std::abs(sum - 1.0));
    }
  }
  return worst;
}

double smallest(const ode::DenseSolution& d) {
  double low = 0.0;
  bool first = true;
  for (std::size_t k = 0; k < d.nodes(); ++k)
    for (double v : d.value(k)) {
      low = first ? v : std::min(low, v);
      first = false;
    }
  return low;
}

}  // namespace

double NimfaSolution::z(int i, int s, double t) const {
  return z_.eval(t, static_cast<std::size_t>(i) * static_cast<std::size_t>(n_states()) +
                        static_cast<std::size_t>(s));
}

void NimfaSolution::zeta(int i, double t, std::span<double> out) const {
  if (zeta_.empty()) throw InputError("solution was computed without neighbourhood storage");
  const std::size_t L = layout_.size();
  const std::size_t N = static_cast<std::size_t>(n_);
  const std::size_t row = static_cast<std::size_t>(i) * L;
  const auto& ts = z_.times();
  if (ts.size() == 1) {
    std::copy_n(zeta_.begin() + static_cast<std::ptrdiff_t>(row), L, out.begin());
    return;
  }
  const std::size_t k = z_.locate(t);
  const double* a = zeta_.data() + k * N * L + row;
  const double* b = a + N * L;
  const double* da = dzeta_.data() + k * N * L + row;
  const double* db = da + N * L;
  ode::hermite(ts[k], ts[k + 1], {a, L}, {da, L}, {b, L}, {db, L}, t, out);
}

std::vector<double> NimfaSolution::mean(double t) const {
  const auto S = static_cast<std::size_t>(n_states());
  std::vector<double> z = state(t), m(S, 0.0);
  for (std::size_t i = 0; i < static_cast<std::size_t>(n_); ++i)
    for (std::size_t s = 0; s < S; ++s) m[s] += z[i * S + s];
  for (double& v : m) v /= static_cast<double>(n_);
  return m;
}

double NimfaSolution::max_simplex_defect() const {
  return simplex_defect(z_, static_cast<std::size_t>(n_states()));
}

double NimfaSolution::min_component() const { return smallest(z_); }

NimfaSolution nimfa_solve(const WeightedHypergraph& h, const RateModel& model,
                          std::span<const double> z0, double t_end, const ode::Options& options,
                          bool store_zeta) {
  const int N = h.n_vertices();
  const auto S = static_cast<std::size_t>(model.n_states());
  if (z0.size() != static_cast<std::size_t>(N) * S)
    throw ParameterError("initial condition must hold one simplex vector per vertex");
  check_simplex(z0, model.n_states(), 1e-9);
  if (h.max_order() > model.max_order())
    throw ParameterError("hypergraph order exceeds the model's maximal order");

  NimfaSolution sol;
  sol.n_ = N;
  sol.layout_ = model.layout();
  const NeighborhoodLayout& layout = sol.layout_;
  const std::size_t L = layout.size();

  std::vector<double> zeta(static_cast<std::size_t>(N) * L);
  ode::Rhs rhs = [&](double, std::span<const double> z, std::span<double> dz) {
    mean_field_neighborhoods(h, layout, z, zeta);
    for (std::size_t i = 0; i < static_cast<std::size_t>(N); ++i)
      apply_generator(model, NeighborhoodView(layout, {zeta.data() + i * L, L}), &z[i * S],
                      &dz[i * S]);
  };

  ode::Options opt = options;
  if (!opt.accept) opt.accept = simplex_guard(S);
  sol.z_ = ode::integrate(rhs, z0, 0.0, t_end, opt);

  if (store_zeta) {
    const std::size_t nodes = sol.z_.nodes();
    const std::size_t block = static_cast<std::size_t>(N) * L;
    sol.zeta_.resize(nodes * block);
    sol.dzeta_.resize(nodes * block);
    for (std::size_t k = 0; k < nodes; ++k)
      mean_field_neighborhoods(h, layout, sol.z_.value(k), {sol.zeta_.data() + k * block, block},
                               sol.z_.slope(k), {sol.dzeta_.data() + k * block, block});
  }

  sol.network_ = h.fingerprint();
  sol.model_ = model.fingerprint();
  Fnv1a hash;
  hash.value(sol.network_);
  hash.value(sol.model_);
  for (double v : z0) hash.value(v);
  hash.value(t_end);
  sol.instance_ = hash.digest();
  return sol;
}

const char* to_string(ReductionTag tag) {
  switch (tag) {
    case ReductionTag::HMFA: return "hmfa";
    case ReductionTag::Metapopulation: return "metapopulation";
    case ReductionTag::IMFA: return "imfa";
    case ReductionTag::ActivityDriven: return "activity";
    case ReductionTag::Partition: return "partition";
  }
  return "?";
}

std::vector<double> ReducedSolution::group(std::size_t k, double t) const {
  const auto S = static_cast<std::size_t>(n_states);
  std::vector<double> out(S);
  for (std::size_t s = 0; s < S; ++s) out[s] = dense.eval(t, k * S + s);
  return out;
}

std::vector<double> ReducedSolution::population_mean(double t) const {
  const auto S = static_cast<std::size_t>(n_states);
  std::vector<double> all = dense.eval(t), out(S, 0.0);
  for (std::size_t k = 0; k < n_groups(); ++k)
    for (std::size_t s = 0; s < S; ++s) out[s] += group_weights[k] * all[k * S + s];
  return out;
}

double ReducedSolution::max_simplex_defect() const {
  return simplex_defect(dense, static_cast<std::size_t>(n_states));
}

double ReducedSolution::min_component() const { return smallest(dense); }

ReducedSolution hmfa_solve(const RateModel& model, std::span<const double> u0, double t_end,
                           const ode::Options& options) {
  const auto S = static_cast<std::size_t>(model.n_states());
  if (u0.size() != S) throw ParameterError("HMFA initial condition must be one simplex vector");
  check_simplex(u0, model.n_states(), 1e-9);
  const NeighborhoodLayout& layout = model.layout();
  std::vector<double> U(layout.size());

  ode::Rhs rhs = [&](double, std::span<const double> u, std::span<double> du) {
    for (int m = 1; m <= layout.max_order(); ++m) {
      const std::size_t base = layout.offset(m);
      for (std::size_t idx = 0; idx < layout.tuple_count(m); ++idx) {
        double p = 1.0;
        for (int s : layout.tuple_states(m, idx)) p *= u[static_cast<std::size_t>(s)];
        U[base + idx] = p;
      }
    }
    apply_generator(model, NeighborhoodView(layout, U), u.data(), du.data());
  };

  ode::Options opt = options;
  if (!opt.accept) opt.accept = simplex_guard(S);
  ReducedSolution out;
  out.tag = ReductionTag::HMFA;
  out.n_states = model.n_states();
  out.group_sizes = {1.0};
  out.group_weights = {1.0};
  out.dense = ode::integrate(rhs, u0, 0.0, t_end, opt);
  return out;
}

std::vector<double> group_averages(const NimfaSolution& sol, std::span<const int> group_of,
                                   int n_groups, double t) {
  const auto S = static_cast<std::size_t>(sol.n_states());
  const auto K = static_cast<std::size_t>(n_groups);
  std::vector<double> z = sol.state(t), avg(K * S, 0.0), count(K, 0.0);
  for (std::size_t i = 0; i < group_of.size(); ++i) {
    if (group_of[i] < 0) continue;
    const auto k = static_cast<std::size_t>(group_of[i]);
    count[k] += 1.0;
    for (std::size_t s = 0; s < S; ++s) avg[k * S + s] += z[i * S + s];
  }
  for (std::size_t k = 0; k < K; ++k)
    for (std::size_t s = 0; s < S; ++s)
      if (count[k] > 0) avg[k * S + s] /= count[k];
  return avg;
}

}  // namespace nimfa
