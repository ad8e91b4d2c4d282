#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "nimfa/hypergraph.hpp"

namespace nimfa {

// Deterministic network families. Families without a seed argument are pure
// functions of their parameters.

WeightedHypergraph complete_graph(int n, Convention convention);

/// Cycle where each vertex is joined to its k nearest neighbours on each side.
WeightedHypergraph ring_graph(int n, int k, Convention convention);

WeightedHypergraph star_graph(int n_leaves, Convention convention);
WeightedHypergraph path_graph(int n, Convention convention);

/// Well-mixed limit: w^(m) = 1/N^m on every tail in [N]^m, loops included.
WeightedHypergraph hmfa_hypergraph(int n, int max_order);

/// Annealed configuration model, expected weights only (no sampling).
///
/// degrees[m-1][i] is the prescribed m-degree of vertex i. Weights are
///   Convention 1: w = d(i) prod_r d(j_r) / (dbar^(m+1) N^m)
///   Convention 2: w = prod_r d(j_r) / ((dbar N)^m), zero for d(i) = 0
/// normalized with the prescribed degrees. For m = 1 the self pair i = j is
/// dropped unless keep_self_pairs is set.
WeightedHypergraph annealed_configuration(const std::vector<std::vector<double>>& degrees,
                                          Convention convention, bool keep_self_pairs = false);

/// Expected weights of an activity-driven network:
/// w^(m)_{i,j} = (a^(m)(i) + sum_r a^(m)(j_r)) / N^m over all of [N]^m.
WeightedHypergraph activity_driven(const std::vector<std::vector<double>>& activities);

/// Ideal metapopulation: w_ij = block_weights[k(i)][k(j)] for i != j, blocks laid out
/// contiguously with the given sizes. sizes must sum to n.
WeightedHypergraph block_graph(int n, const std::vector<int>& sizes,
                               const std::vector<std::vector<double>>& block_weights);

/// Undirected G(n, p), normalized by the given convention.
WeightedHypergraph erdos_renyi(int n, double p, Convention convention, std::uint64_t seed);

/// Undirected stochastic block graph; probs[k][l] is the edge probability between blocks.
WeightedHypergraph stochastic_block(const std::vector<int>& sizes,
                                    const std::vector<std::vector<double>>& probs,
                                    Convention convention, std::uint64_t seed);

/// (m+1)-uniform hypergraph with n_edges distinct random hyperedges of m+1 distinct vertices.
WeightedHypergraph random_uniform_hypergraph(int n, int m, int n_edges, Convention convention,
                                             std::uint64_t seed);

/// Generator parameters as key=value strings. Lists are comma separated and
/// accept run-length items, e.g. "2x100,4x100".
using GeneratorParams = std::map<std::string, std::string>;

/// Dispatches to a family by name: complete, ring, star, path, hmfa, annealed,
/// activity, block, er, sbm, uniform_hypergraph.
WeightedHypergraph generate(const std::string& family, const GeneratorParams& params,
                            std::uint64_t seed);

std::vector<double> parse_number_list(const std::string& text);

}  // namespace nimfa
