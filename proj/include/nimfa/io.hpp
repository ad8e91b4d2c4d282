#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "nimfa/analysis.hpp"
#include "nimfa/hypergraph.hpp"
#include "nimfa/meanfield.hpp"
#include "nimfa/stochastic.hpp"

namespace nimfa {

// Hypergraph text files.
//
//   # comment lines anywhere
//   N M tag
//   m i j1 ... jm value
//
// Vertex labels are 1-based. tag "1" or "2" means the values are adjacency
// multiplicities to be normalized by that convention; "w1", "w2" and
// "explicit" mean the values are final weights (carrying that tag).

WeightedHypergraph read_hypergraph(std::istream& in);
WeightedHypergraph read_hypergraph(const std::filesystem::path& path);
void write_hypergraph(std::ostream& out, const WeightedHypergraph& h);

/// Output file header line carrying the configuration hash.
std::string hash_header(std::uint64_t config_hash);

/// Plain CSV table. Every value is printed with format_double.
struct CsvTable {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

void write_csv(std::ostream& out, const CsvTable& table, std::uint64_t config_hash);
void write_csv(const std::filesystem::path& path, const CsvTable& table, std::uint64_t config_hash);

/// time, vertex, from, to (vertex 1-based).
CsvTable event_table(const Trajectory& traj);
/// time, state_0_fraction, ... at the start and after every event.
CsvTable prevalence_table(const Trajectory& traj);
/// time, vertex, state, probability on the grid (vertex 1-based).
CsvTable nimfa_table(const NimfaSolution& sol, std::span<const double> grid);
/// time, state_0, ...: population mean of the NIMFA solution.
CsvTable nimfa_mean_table(const NimfaSolution& sol, std::span<const double> grid);
/// time, group, state, probability (group 1-based).
CsvTable reduced_table(const ReducedSolution& sol, std::span<const double> grid);
/// time, mean_state_s, stderr_state_s ... from a replica aggregate.
CsvTable marginal_table(const MarginalEstimate& est);

/// JSON documents (pretty printed, 2-space indent).
std::string to_json(const ErrorReport& report, std::uint64_t config_hash);
std::string to_json(const BoundReport& report, std::uint64_t config_hash);
std::string to_json(const MarginalEstimate& est, std::uint64_t config_hash);

void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace nimfa
