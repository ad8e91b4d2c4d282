#pragma once

#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <vector>

#include "nimfa/hypergraph.hpp"
#include "nimfa/meanfield.hpp"
#include "nimfa/models.hpp"

namespace nimfa {

using Rng = std::mt19937_64;

/// Uniform on [0, 1) with 53 random bits; identical on every platform.
inline double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

struct PopulationState {
  std::vector<int> state;
  double time = 0.0;
};

struct Event {
  double time = 0.0;
  int vertex = 0;
  int from = 0;
  int to = 0;

  bool operator==(const Event&) const = default;
};

struct Trajectory {
  int n_states = 0;
  PopulationState initial;
  std::vector<Event> events;
  double t_end = 0.0;

  /// Configuration just after all events with time <= t.
  std::vector<int> states_at(double t) const;
  /// Fraction of vertices per state at each grid time ([g][s]).
  std::vector<std::vector<double>> fractions_on_grid(std::span<const double> grid) const;
};

inline constexpr double kNever = std::numeric_limits<double>::infinity();

struct CoupledRun {
  Trajectory xi;
  Trajectory xihat;
  std::vector<double> disagreement;  // first time xi_i != xihat_i, kNever if none
  std::uint64_t seed = 0;
  std::uint64_t instance = 0;

  /// Number of leading events shared by both logs.
  std::size_t common_prefix() const;
};

/// Samples one state per vertex from z (N x |S| rows on the simplex).
std::vector<int> sample_initial(std::span<const double> z, int n_states, Rng& rng);

/// Exact simulator for one (hypergraph, model) pair.
///
/// Events are generated by thinning: vertex i proposes s -> s' jumps at the
/// certified rate Lambda = rate_bound(s, s', delta_i); a proposal with uniform
/// mark x in [0, Lambda) is accepted when x < q(phi_i). The neighbourhood
/// vectors phi are maintained incrementally through a reverse edge index.
/// The coupled variant drives xi and xihat with the same proposals per
/// (vertex, from, to) channel; xihat uses zeta_i(t) from a NIMFA solution.
class Simulator {
 public:
  Simulator(const WeightedHypergraph& h, ModelPtr model);

  const WeightedHypergraph& hypergraph() const { return *h_; }
  const RateModel& model() const { return *model_; }

  Trajectory simulate(const PopulationState& init, double t_end, Rng& rng) const;
  Trajectory simulate(const PopulationState& init, double t_end, std::uint64_t seed) const;

  CoupledRun simulate_coupled(const PopulationState& init, const NimfaSolution& nimfa,
                              double t_end, Rng& rng) const;
  CoupledRun simulate_coupled(const PopulationState& init, const NimfaSolution& nimfa,
                              double t_end, std::uint64_t seed) const;

  /// Proposal rate bound of channel (i, from, to).
  double channel_bound(int i, int from, int to) const {
    return bounds_[(static_cast<std::size_t>(i) * S_ + static_cast<std::size_t>(from)) * S_ +
                   static_cast<std::size_t>(to)];
  }

 private:
  struct Incidence {
    int order;
    std::size_t edge;
  };

  friend class SimulationRun;
  const WeightedHypergraph* h_;
  ModelPtr model_;
  std::uint64_t network_fp_ = 0, model_fp_ = 0;
  std::size_t S_ = 0;
  std::vector<double> bounds_;                   // [i][from][to]
  std::vector<std::vector<int>> edge_head_;      // [m-1][e]
  std::vector<std::size_t> incidence_offsets_;   // CSR over vertices
  std::vector<Incidence> incidence_;
};

/// Free-function forms.
Trajectory simulate(const WeightedHypergraph& h, ModelPtr model, const PopulationState& init,
                    double t_end, std::uint64_t seed);
CoupledRun simulate_coupled(const WeightedHypergraph& h, ModelPtr model,
                            const PopulationState& init, const NimfaSolution& nimfa, double t_end,
                            std::uint64_t seed);

/// Monte Carlo estimate of E[xi_{i,s}(t)] on a grid.
struct MarginalEstimate {
  std::vector<double> grid;
  int n_vertices = 0;
  int n_states = 0;
  std::size_t replicas = 0;
  std::vector<double> sum;  // [g][i][s] counts

  double mean(std::size_t g, int i, int s) const;
  /// Binomial standard error of the mean.
  double stderr_of(std::size_t g, int i, int s) const;
  /// Mean fraction of vertices in state s and its standard error ([g][s]).
  std::vector<double> prevalence_mean;
  std::vector<double> prevalence_sq;
  double prevalence(std::size_t g, int s) const;
  double prevalence_stderr(std::size_t g, int s) const;

  void merge(const MarginalEstimate& other);
};

/// Initial condition of each replica: either a fixed configuration or
/// independent per-vertex draws from z0 (N x |S|).
struct InitialCondition {
  std::vector<int> fixed;
  std::vector<double> z0;

  PopulationState draw(int n_states, Rng& rng) const;
};

MarginalEstimate estimate_marginals(const Simulator& sim, const InitialCondition& init,
                                    std::span<const double> grid, std::size_t replicas,
                                    std::uint64_t seed, unsigned threads);

/// Exact forward (master) equation on S^N. Product states are numbered with
/// vertex 0 as the most significant base-|S| digit.
struct MasterSolution {
  int n_vertices = 0;
  int n_states = 0;
  std::vector<double> grid;
  std::vector<std::vector<double>> distribution;  // [g][state]

  std::size_t state_count() const { return distribution.empty() ? 0 : distribution[0].size(); }
  int vertex_state(std::size_t product_state, int i) const;
  double marginal(std::size_t g, int i, int s) const;
  double pair_marginal(std::size_t g, int i, int j, int si, int sj) const;
  double total(std::size_t g) const;
};

inline constexpr std::size_t kMasterCapacity = std::size_t{1} << 20;

/// Throws CapacityError when |S|^N exceeds kMasterCapacity.
MasterSolution master_solve(const WeightedHypergraph& h, const RateModel& model,
                            std::span<const double> init_distribution,
                            std::span<const double> grid);

/// Product-state index of a configuration.
std::size_t product_index(std::span<const int> states, int n_states);

}  // namespace nimfa
