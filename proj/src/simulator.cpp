#include <algorithm>
#include <cmath>

#include "nimfa/errors.hpp"
#include "nimfa/parallel.hpp"
#include "nimfa/stochastic.hpp"
#include "nimfa/util.hpp"

namespace nimfa {

std::vector<int> Trajectory::states_at(double t) const {
  std::vector<int> s = initial.state;
  for (const Event& e : events) {
    if (e.time > t) break;
    s[static_cast<std::size_t>(e.vertex)] = e.to;
  }
  return s;
}

std::vector<std::vector<double>> Trajectory::fractions_on_grid(std::span<const double> grid) const {
  const auto S = static_cast<std::size_t>(n_states);
  const double n = static_cast<double>(initial.state.size());
  std::vector<double> count(S, 0.0);
  for (int s : initial.state) count[static_cast<std::size_t>(s)] += 1.0;
  std::vector<std::vector<double>> out;
  out.reserve(grid.size());
  std::size_t next = 0;
  for (double t : grid) {
    while (next < events.size() && events[next].time <= t) {
      count[static_cast<std::size_t>(events[next].from)] -= 1.0;
      count[static_cast<std::size_t>(events[next].to)] += 1.0;
      ++next;
    }
    std::vector<double> f(S);
    for (std::size_t s = 0; s < S; ++s) f[s] = count[s] / n;
    out.push_back(std::move(f));
  }
  return out;
}

std::size_t CoupledRun::common_prefix() const {
  std::size_t k = 0;
  while (k < xi.events.size() && k < xihat.events.size() && xi.events[k] == xihat.events[k]) ++k;
  return k;
}

std::vector<int> sample_initial(std::span<const double> z, int n_states, Rng& rng) {
  const auto S = static_cast<std::size_t>(n_states);
  std::vector<int> out(z.size() / S);
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double u = uniform01(rng);
    double acc = 0.0;
    int pick = n_states - 1;
    for (std::size_t s = 0; s < S; ++s) {
      acc += z[i * S + s];
      if (u < acc) {
        pick = static_cast<int>(s);
        break;
      }
    }
    // never land on a zero-probability state through rounding
    while (pick > 0 && z[i * S + static_cast<std::size_t>(pick)] == 0.0) --pick;
    out[i] = pick;
  }
  return out;
}

PopulationState InitialCondition::draw(int n_states, Rng& rng) const {
  PopulationState p;
  p.state = fixed.empty() ? sample_initial(z0, n_states, rng) : fixed;
  return p;
}

Simulator::Simulator(const WeightedHypergraph& h, ModelPtr model)
    : h_(&h),
      model_(std::move(model)),
      network_fp_(h.fingerprint()),
      model_fp_(model_->fingerprint()),
      S_(static_cast<std::size_t>(model_->n_states())) {
  if (h.max_order() > model_->max_order())
    throw ParameterError("hypergraph order exceeds the model's maximal order");
  const int N = h.n_vertices();
  const auto Nu = static_cast<std::size_t>(N);

  bounds_.assign(Nu * S_ * S_, 0.0);
  for (int i = 0; i < N; ++i) {
    double delta = 0.0;
    for (int m = 1; m <= h.max_order(); ++m) delta = std::max(delta, h.weight_sum(m, i));
    // slack covers roundoff in incrementally maintained phi and interpolated zeta
    delta *= 1.0 + 1e-6;
    for (std::size_t f = 0; f < S_; ++f)
      for (std::size_t to = 0; to < S_; ++to) {
        if (f == to) continue;
        const double b = model_->rate_bound(static_cast<int>(f), static_cast<int>(to), delta);
        if (!(b >= 0.0) || !std::isfinite(b)) throw ModelError("rate bound is not finite");
        bounds_[(static_cast<std::size_t>(i) * S_ + f) * S_ + to] = b;
      }
  }

  std::vector<std::size_t> count(Nu + 1, 0);
  edge_head_.resize(static_cast<std::size_t>(h.max_order()));
  std::vector<int> seen;
  for (int m = 1; m <= h.max_order(); ++m) {
    const auto& o = h.order(m);
    auto& heads = edge_head_[static_cast<std::size_t>(m - 1)];
    heads.resize(o.edge_count());
    for (int i = 0; i < N; ++i)
      for (std::size_t e = o.begin(i); e < o.end(i); ++e) {
        heads[e] = i;
        auto t = o.tail(e);
        seen.assign(t.begin(), t.end());
        std::sort(seen.begin(), seen.end());
        seen.erase(std::unique(seen.begin(), seen.end()), seen.end());
        for (int j : seen) ++count[static_cast<std::size_t>(j) + 1];
      }
  }
  for (std::size_t j = 0; j < Nu; ++j) count[j + 1] += count[j];
  incidence_offsets_ = count;
  incidence_.resize(count[Nu]);
  std::vector<std::size_t> fill(count.begin(), count.end() - 1);
  for (int m = 1; m <= h.max_order(); ++m) {
    const auto& o = h.order(m);
    for (std::size_t e = 0; e < o.edge_count(); ++e) {
      auto t = o.tail(e);
      seen.assign(t.begin(), t.end());
      std::sort(seen.begin(), seen.end());
      seen.erase(std::unique(seen.begin(), seen.end()), seen.end());
      for (int j : seen) incidence_[fill[static_cast<std::size_t>(j)]++] = {m, e};
    }
  }
}

namespace {

// Complete binary tree of partial sums over vertex proposal rates.
class SumTree {
 public:
  explicit SumTree(std::size_t n) {
    size_ = 1;
    while (size_ < n) size_ <<= 1;
    node_.assign(2 * size_, 0.0);
  }
  void set(std::size_t i, double v) {
    std::size_t k = i + size_;
    node_[k] = v;
    for (k >>= 1; k >= 1; k >>= 1) node_[k] = node_[2 * k] + node_[2 * k + 1];
  }
  void build() {
    for (std::size_t k = size_ - 1; k >= 1; --k) node_[k] = node_[2 * k] + node_[2 * k + 1];
  }
  void put(std::size_t i, double v) { node_[i + size_] = v; }
  double total() const { return node_[1]; }
  double leaf(std::size_t i) const { return node_[i + size_]; }
  // Leaf containing cumulative position x; x is reduced to the offset inside it.
  std::size_t find(double& x) const {
    std::size_t k = 1;
    while (k < size_) {
      if (x < node_[2 * k] || node_[2 * k + 1] <= 0.0) {
        k = 2 * k;
      } else {
        x -= node_[2 * k];
        k = 2 * k + 1;
      }
    }
    return k - size_;
  }

 private:
  std::size_t size_;
  std::vector<double> node_;
};

double checked_rate(double q, double bound) {
  if (!(q >= 0.0) || !std::isfinite(q)) throw ModelError("rate function returned an invalid value");
  if (q > bound) throw ModelError("rate exceeds its certified bound; thinning would be biased");
  return q;
}

}  // namespace

class SimulationRun {
 public:
  SimulationRun(const Simulator& sim, const NimfaSolution* nimfa)
      : sim_(sim),
        h_(*sim.h_),
        model_(*sim.model_),
        layout_(model_.layout()),
        N_(static_cast<std::size_t>(h_.n_vertices())),
        S_(sim.S_),
        L_(layout_.size()),
        nimfa_(nimfa),
        tree_(N_),
        zeta_(L_),
        phi_buf_(L_) {}

  void run(const PopulationState& init, double t_end, Rng& rng, Trajectory& xi, Trajectory* xihat,
           std::vector<double>* disagreement) {
    if (init.state.size() != N_) throw InputError("initial state has the wrong number of vertices");
    for (int s : init.state)
      if (s < 0 || static_cast<std::size_t>(s) >= S_) throw InputError("initial state out of range");
    if (!(t_end > 0.0)) throw InputError("simulation horizon must be positive");

    xi_ = init.state;
    xh_ = init.state;
    coupled_ = xihat != nullptr;
    phi_.assign(N_ * L_, 0.0);
    for (std::size_t i = 0; i < N_; ++i)
      empirical_neighborhood(h_, layout_, xi_, static_cast<int>(i), {phi_.data() + i * L_, L_});
    for (std::size_t i = 0; i < N_; ++i) tree_.put(i, vertex_rate(i));
    tree_.build();

    xi.n_states = static_cast<int>(S_);
    xi.initial = init;
    xi.t_end = t_end;
    xi.events.clear();
    if (coupled_) {
      xihat->n_states = static_cast<int>(S_);
      xihat->initial = init;
      xihat->t_end = t_end;
      xihat->events.clear();
      disagreement->assign(N_, kNever);
    }

    double t = init.time;
    for (;;) {
      const double total = tree_.total();
      if (!(total > 0.0)) break;
      t += -std::log1p(-uniform01(rng)) / total;
      if (t >= t_end) break;
      double x = uniform01(rng) * total;
      const std::size_t i = tree_.find(x);
      int from = -1, to = -1;
      double bound = 0.0;
      pick_channel(i, x, from, to, bound);
      if (from < 0) continue;  // rounding at a boundary; proposal discarded
      const double mark = uniform01(rng) * bound;

      const bool xi_here = xi_[i] == from;
      const bool xh_here = coupled_ && xh_[i] == from;
      bool jump_xi = false, jump_xh = false;
      if (xi_here) {
        const double q = checked_rate(model_.rate(from, to, phi_view(i)), bound);
        jump_xi = mark < q;
      }
      if (xh_here) {
        nimfa_->zeta(static_cast<int>(i), t, zeta_);
        const double q =
            checked_rate(model_.rate(from, to, NeighborhoodView(layout_, zeta_)), bound);
        jump_xh = mark < q;
      }
      if (!jump_xi && !jump_xh) continue;

      if (jump_xi) {
        move_xi(i, to);
        xi.events.push_back({t, static_cast<int>(i), from, to});
      }
      if (jump_xh) {
        xh_[i] = to;
        xihat->events.push_back({t, static_cast<int>(i), from, to});
      }
      tree_.set(i, vertex_rate(i));
      if (coupled_ && xi_[i] != xh_[i] && (*disagreement)[i] == kNever) (*disagreement)[i] = t;
    }
  }

 private:
  double vertex_rate(std::size_t i) const {
    double r = 0.0;
    for (std::size_t to = 0; to < S_; ++to)
      if (to != static_cast<std::size_t>(xi_[i])) r += sim_.channel_bound(static_cast<int>(i), xi_[i], static_cast<int>(to));
    if (coupled_ && xh_[i] != xi_[i])
      for (std::size_t to = 0; to < S_; ++to)
        if (to != static_cast<std::size_t>(xh_[i])) r += sim_.channel_bound(static_cast<int>(i), xh_[i], static_cast<int>(to));
    return r;
  }

  void pick_channel(std::size_t i, double x, int& from, int& to, double& bound) const {
    const int actives[2] = {xi_[i], xh_[i]};
    const int n_active = coupled_ && xh_[i] != xi_[i] ? 2 : 1;
    for (int a = 0; a < n_active; ++a) {
      const int f = actives[a];
      for (std::size_t s = 0; s < S_; ++s) {
        if (static_cast<int>(s) == f) continue;
        const double b = sim_.channel_bound(static_cast<int>(i), f, static_cast<int>(s));
        if (x < b) {
          from = f;
          to = static_cast<int>(s);
          bound = b;
          return;
        }
        x -= b;
      }
    }
  }

  NeighborhoodView phi_view(std::size_t i) {
    // incremental updates may leave -1e-17 style residue on empty slots
    const double* src = phi_.data() + i * L_;
    for (std::size_t k = 0; k < L_; ++k) phi_buf_[k] = std::max(0.0, src[k]);
    return NeighborhoodView(layout_, phi_buf_);
  }

  void move_xi(std::size_t j, int to) {
    const int from = xi_[j];
    const auto S = S_;
    for (std::size_t k = sim_.incidence_offsets_[j]; k < sim_.incidence_offsets_[j + 1]; ++k) {
      const auto& inc = sim_.incidence_[k];
      const auto& o = h_.order(inc.order);
      const auto head = static_cast<std::size_t>(sim_.edge_head_[static_cast<std::size_t>(inc.order - 1)][inc.edge]);
      const double w = o.weights[inc.edge];
      double* dst = phi_.data() + head * L_ + layout_.offset(inc.order);
      if (inc.order == 1) {
        dst[from] -= w;
        dst[to] += w;
        continue;
      }
      std::size_t old_idx = 0, new_idx = 0;
      for (int v : o.tail(inc.edge)) {
        const int s = xi_[static_cast<std::size_t>(v)];
        old_idx = old_idx * S + static_cast<std::size_t>(s);
        new_idx = new_idx * S + static_cast<std::size_t>(static_cast<std::size_t>(v) == j ? to : s);
      }
      dst[old_idx] -= w;
      dst[new_idx] += w;
    }
    xi_[j] = to;
  }

  const Simulator& sim_;
  const WeightedHypergraph& h_;
  const RateModel& model_;
  const NeighborhoodLayout& layout_;
  std::size_t N_, S_, L_;
  const NimfaSolution* nimfa_;
  bool coupled_ = false;
  SumTree tree_;
  std::vector<int> xi_, xh_;
  std::vector<double> phi_;
  std::vector<double> zeta_, phi_buf_;
};

Trajectory Simulator::simulate(const PopulationState& init, double t_end, Rng& rng) const {
  Trajectory xi;
  SimulationRun run(*this, nullptr);
  run.run(init, t_end, rng, xi, nullptr, nullptr);
  return xi;
}

Trajectory Simulator::simulate(const PopulationState& init, double t_end, std::uint64_t seed) const {
  Rng rng(seed);
  return simulate(init, t_end, rng);
}

CoupledRun Simulator::simulate_coupled(const PopulationState& init, const NimfaSolution& nimfa,
                                       double t_end, Rng& rng) const {
  if (nimfa.network_fingerprint() != network_fp_ || nimfa.model_fingerprint() != model_fp_)
    throw InputError("NIMFA solution belongs to a different instance");
  if (!nimfa.has_zeta()) throw InputError("NIMFA solution lacks stored neighbourhoods");
  if (nimfa.t_end() < t_end) throw InputError("NIMFA horizon is shorter than the coupled run");
  CoupledRun out;
  out.instance = nimfa.instance();
  SimulationRun run(*this, &nimfa);
  run.run(init, t_end, rng, out.xi, &out.xihat, &out.disagreement);
  return out;
}

CoupledRun Simulator::simulate_coupled(const PopulationState& init, const NimfaSolution& nimfa,
                                       double t_end, std::uint64_t seed) const {
  Rng rng(seed);
  CoupledRun out = simulate_coupled(init, nimfa, t_end, rng);
  out.seed = seed;
  return out;
}

Trajectory simulate(const WeightedHypergraph& h, ModelPtr model, const PopulationState& init,
                    double t_end, std::uint64_t seed) {
  return Simulator(h, std::move(model)).simulate(init, t_end, seed);
}

CoupledRun simulate_coupled(const WeightedHypergraph& h, ModelPtr model,
                            const PopulationState& init, const NimfaSolution& nimfa, double t_end,
                            std::uint64_t seed) {
  return Simulator(h, std::move(model)).simulate_coupled(init, nimfa, t_end, seed);
}

double MarginalEstimate::mean(std::size_t g, int i, int s) const {
  const std::size_t k = (g * static_cast<std::size_t>(n_vertices) + static_cast<std::size_t>(i)) *
                            static_cast<std::size_t>(n_states) +
                        static_cast<std::size_t>(s);
  return sum[k] / static_cast<double>(replicas);
}

double MarginalEstimate::stderr_of(std::size_t g, int i, int s) const {
  const double p = mean(g, i, s);
  return std::sqrt(p * (1.0 - p) / static_cast<double>(replicas));
}

double MarginalEstimate::prevalence(std::size_t g, int s) const {
  return prevalence_mean[g * static_cast<std::size_t>(n_states) + static_cast<std::size_t>(s)] /
         static_cast<double>(replicas);
}

double MarginalEstimate::prevalence_stderr(std::size_t g, int s) const {
  const double R = static_cast<double>(replicas);
  const double m = prevalence(g, s);
  const double sq =
      prevalence_sq[g * static_cast<std::size_t>(n_states) + static_cast<std::size_t>(s)] / R;
  if (replicas < 2) return 0.0;
  return std::sqrt(std::max(0.0, sq - m * m) / (R - 1.0));
}

void MarginalEstimate::merge(const MarginalEstimate& other) {
  if (sum.empty()) {
    *this = other;
    return;
  }
  replicas += other.replicas;
  for (std::size_t k = 0; k < sum.size(); ++k) sum[k] += other.sum[k];
  for (std::size_t k = 0; k < prevalence_mean.size(); ++k) {
    prevalence_mean[k] += other.prevalence_mean[k];
    prevalence_sq[k] += other.prevalence_sq[k];
  }
}

MarginalEstimate estimate_marginals(const Simulator& sim, const InitialCondition& init,
                                    std::span<const double> grid, std::size_t replicas,
                                    std::uint64_t seed, unsigned threads) {
  if (grid.empty()) throw InputError("marginal estimation needs a time grid");
  const int N = sim.hypergraph().n_vertices();
  const int S = sim.model().n_states();
  const auto G = grid.size();
  const double t_end = *std::max_element(grid.begin(), grid.end());
  auto make = [&] {
    MarginalEstimate e;
    e.grid.assign(grid.begin(), grid.end());
    e.n_vertices = N;
    e.n_states = S;
    e.sum.assign(G * static_cast<std::size_t>(N) * static_cast<std::size_t>(S), 0.0);
    e.prevalence_mean.assign(G * static_cast<std::size_t>(S), 0.0);
    e.prevalence_sq.assign(G * static_cast<std::size_t>(S), 0.0);
    return e;
  };
  auto body = [&](MarginalEstimate& acc, std::size_t idx) {
    Rng rng(replica_seed(seed, idx));
    const PopulationState start = init.draw(S, rng);
    // a zero-length horizon still needs a valid call
    Trajectory traj = sim.simulate(start, std::max(t_end, 1e-300), rng);
    std::vector<int> state = start.state;
    std::size_t next = 0;
    for (std::size_t g = 0; g < G; ++g) {
      while (next < traj.events.size() && traj.events[next].time <= grid[g]) {
        state[static_cast<std::size_t>(traj.events[next].vertex)] = traj.events[next].to;
        ++next;
      }
      std::vector<double> frac(static_cast<std::size_t>(S), 0.0);
      for (int i = 0; i < N; ++i) {
        const auto s = static_cast<std::size_t>(state[static_cast<std::size_t>(i)]);
        acc.sum[(g * static_cast<std::size_t>(N) + static_cast<std::size_t>(i)) * static_cast<std::size_t>(S) + s] += 1.0;
        frac[s] += 1.0 / N;
      }
      for (std::size_t s = 0; s < static_cast<std::size_t>(S); ++s) {
        acc.prevalence_mean[g * static_cast<std::size_t>(S) + s] += frac[s];
        acc.prevalence_sq[g * static_cast<std::size_t>(S) + s] += frac[s] * frac[s];
      }
    }
    acc.replicas += 1;
  };
  return parallel_accumulate<MarginalEstimate>(replicas, threads, make, body);
}

}  // namespace nimfa
