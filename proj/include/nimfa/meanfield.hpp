#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "nimfa/hypergraph.hpp"
#include "nimfa/models.hpp"
#include "nimfa/ode.hpp"

namespace nimfa {

/// Solver defaults used by every mean-field system.
ode::Options meanfield_options();

/// Solution of the per-vertex NIMFA system dz_i/dt = Q(zeta_i) z_i.
///
/// Besides z the solution stores zeta and its time derivative at every step
/// node, so that zeta_i(t) can be interpolated in O(|S|^M) without touching the
/// neighbours of i.
class NimfaSolution {
 public:
  NimfaSolution() = default;

  int n_vertices() const { return n_; }
  int n_states() const { return layout_.n_states(); }
  const NeighborhoodLayout& layout() const { return layout_; }
  const ode::DenseSolution& dense() const { return z_; }
  const std::vector<double>& times() const { return z_.times(); }
  double t_end() const { return z_.t_end(); }

  /// Full state (N x |S|, row-major) at time t.
  void state(double t, std::span<double> out) const { z_.eval(t, out); }
  std::vector<double> state(double t) const { return z_.eval(t); }
  double z(int i, int s, double t) const;

  /// zeta_i(t) laid out as in layout().
  void zeta(int i, double t, std::span<double> out) const;
  bool has_zeta() const { return !zeta_.empty(); }

  /// (1/N) sum_i z_i(t).
  std::vector<double> mean(double t) const;

  /// Largest |sum_s z_{i,s} - 1| and smallest component over all step nodes.
  double max_simplex_defect() const;
  double min_component() const;

  /// Identifies (hypergraph, model, z0, horizon).
  std::uint64_t instance() const { return instance_; }
  std::uint64_t network_fingerprint() const { return network_; }
  std::uint64_t model_fingerprint() const { return model_; }

 private:
  friend NimfaSolution nimfa_solve(const WeightedHypergraph&, const RateModel&,
                                   std::span<const double>, double, const ode::Options&, bool);
  int n_ = 0;
  NeighborhoodLayout layout_;
  ode::DenseSolution z_;
  std::vector<double> zeta_, dzeta_;  // [node][i][L]
  std::uint64_t instance_ = 0;
  std::uint64_t network_ = 0, model_ = 0;
};

/// Integrates NIMFA from z0 (N x |S|, each row on the simplex) to t_end.
/// Steps leaving the simplex by more than 1e-9 are rejected and halved.
NimfaSolution nimfa_solve(const WeightedHypergraph& h, const RateModel& model,
                          std::span<const double> z0, double t_end,
                          const ode::Options& options = meanfield_options(),
                          bool store_zeta = true);

/// Throws ParameterError unless every row of z (rows of width n_states) is on the simplex.
void check_simplex(std::span<const double> z, int n_states, double tol = 1e-12);

enum class ReductionTag { HMFA, Metapopulation, IMFA, ActivityDriven, Partition };
const char* to_string(ReductionTag tag);

/// Group-level solution of a reduced system.
struct ReducedSolution {
  ReductionTag tag = ReductionTag::HMFA;
  int n_states = 0;
  std::vector<double> group_sizes;    // vertex counts
  std::vector<double> group_weights;  // population share of each group
  ode::DenseSolution dense;           // K x |S| per node

  std::size_t n_groups() const { return group_sizes.size(); }
  std::vector<double> group(std::size_t k, double t) const;
  /// sum_k weight_k * group_k(t)
  std::vector<double> population_mean(double t) const;
  double max_simplex_defect() const;
  double min_component() const;
};

/// Well-mixed system du/dt = Q(U) u with U^(m)_{s1..sm} = u_{s1} ... u_{sm}.
ReducedSolution hmfa_solve(const RateModel& model, std::span<const double> u0, double t_end,
                           const ode::Options& options = meanfield_options());

/// Group graph of a vertex partition: wbar^(m)_{k,l1..lm} = (1/N_k) sum over
/// i in V_k and j_r in V_{l_r} of w^(m)_{i,j}. Loops are kept.
struct MetapopReduction {
  WeightedHypergraph reduced;
  std::vector<double> group_sizes;
  std::vector<double> z0;  // K x |S| group means
};

MetapopReduction metapop_reduce(const WeightedHypergraph& h, std::span<const int> group_of,
                                std::span<const double> z0, int n_states);

ReducedSolution metapop_solve(const MetapopReduction& reduction, const RateModel& model,
                              double t_end, const ode::Options& options = meanfield_options());

/// Distinct per-order degree tuples in lexicographic order.
struct DegreeClasses {
  std::vector<std::vector<double>> degrees;  // [class][m-1]
  std::vector<double> sizes;
  std::vector<int> class_of;  // per vertex
};

DegreeClasses degree_classes(const std::vector<std::vector<double>>& degrees);

/// Degree-class (IMFA) system for the annealed configuration model.
/// z0 holds one simplex row per class of degree_classes(degrees).
ReducedSolution imfa_solve(const std::vector<std::vector<double>>& degrees,
                           const RateModel& model, Convention convention,
                           std::span<const double> z0, double t_end,
                           const ode::Options& options = meanfield_options());

/// Activity-driven class system. activities[m-1][c] is the m-activity of class c,
/// class_sizes[c] its vertex count, z0 one simplex row per class.
ReducedSolution activity_solve(const std::vector<std::vector<double>>& activities,
                               std::span<const double> class_sizes, const RateModel& model,
                               std::span<const double> z0, double t_end,
                               const ode::Options& options = meanfield_options());

/// Vertex partition V_0, V_1..V_K of a simple graph. block_of[i] = 0 marks the
/// exceptional set.
struct PartitionSpec {
  std::vector<int> block_of;
  int n_blocks = 0;  // K

  static PartitionSpec from_blocks(std::vector<int> block_of);
};

struct PartitionReduction {
  std::vector<std::vector<double>> rho;   // K x K edge densities
  double p = 0.0;                         // dbar / N
  double kappa = 0.0;                     // |V_k| / N
  std::vector<std::vector<double>> wbar;  // (kappa / p) rho
  WeightedHypergraph reduced;
  std::vector<double> v0;  // K x |S|
  ReducedSolution solution;

  /// vbar(t) = sum_k (|V_k| / N) v_k(t)
  std::vector<double> vbar(double t) const { return solution.population_mean(t); }
};

/// Requires M = 1 and an affine model. Adjacency is read as w > 0.
PartitionReduction partition_reduce(const WeightedHypergraph& h, const PartitionSpec& partition,
                                    const RateModel& model, std::span<const double> z0,
                                    double t_end,
                                    const ode::Options& options = meanfield_options());

/// Group averages of a full NIMFA solution at time t (K x |S|); vertices with a
/// negative group index are skipped.
std::vector<double> group_averages(const NimfaSolution& sol, std::span<const int> group_of,
                                   int n_groups, double t);

}  // namespace nimfa
