#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "nimfa/generators.hpp"
#include "nimfa/hypergraph.hpp"
#include "nimfa/models.hpp"

namespace nimfa {

inline constexpr const char* kArtifactVersion = "1.0.0";

struct ExperimentConfig {
  // network: generator family with parameters, or a hypergraph file
  std::string family;
  GeneratorParams network_params;
  std::string network_file;

  std::string model;
  std::map<std::string, std::string> model_params;

  // initial condition: exactly one of these
  std::vector<double> initial_uniform;  // one simplex vector for every vertex
  std::optional<int> initial_state;     // every vertex in this state
  std::string initial_file;             // one simplex row per vertex

  double t_end = 1.0;
  int grid_points = 101;
  std::size_t replicas = 0;
  std::optional<std::uint64_t> seed;
  unsigned threads = 0;  // 0: hardware concurrency

  bool out_nimfa = false;
  bool out_trajectories = false;
  std::size_t trajectory_logs = 1;  // replicas whose event logs are written
  std::string reduction;            // hmfa, metapop, imfa, activity, partition
  std::map<std::string, std::string> reduction_params;
  bool out_errors = false;
  bool out_neighborhood_errors = false;
  bool out_bounds = false;
  bool out_master = false;
  std::vector<int> scaling_sizes;  // replaces network parameter "n"

  /// Deterministic textual form; its FNV-1a hash tags every output file.
  std::string canonical() const;
  std::uint64_t hash() const;
  bool stochastic() const {
    return replicas > 0 && (out_trajectories || out_errors || !scaling_sizes.empty());
  }
};

/// Parses YAML text. Throws InputError on syntax errors or unknown keys.
ExperimentConfig parse_config(const std::string& yaml_text);
ExperimentConfig load_config(const std::filesystem::path& path);

struct Diagnostic {
  enum class Kind { Validation, Capacity };
  Kind kind = Kind::Validation;
  std::string field;
  std::string message;
};

/// Empty iff run() would start.
std::vector<Diagnostic> validate(const ExperimentConfig& config);

struct RunManifest {
  std::uint64_t config_hash = 0;
  std::string version = kArtifactVersion;
  std::map<std::string, std::string> files;  // output name -> path
  std::map<std::string, double> timings;     // stage -> wall-clock seconds
  int n_vertices = 0;
  int max_order = 0;
  std::vector<std::size_t> edge_counts;
  RegularityReport regularity;
  std::map<std::string, double> summary;  // headline numbers (p_max, fitted exponent, ...)

  std::string to_json() const;
};

/// Builds the network described by the configuration (n overrides "n" when positive).
WeightedHypergraph build_network(const ExperimentConfig& config, int n = 0);
ModelPtr build_model(const ExperimentConfig& config);
/// Initial occupancy rows (N x |S|).
std::vector<double> build_initial(const ExperimentConfig& config, int n_vertices, int n_states);

/// Produces every requested output under out_dir and writes manifest.json.
/// Throws ParameterError with all diagnostics when validation fails.
RunManifest run(const ExperimentConfig& config, const std::filesystem::path& out_dir);

}  // namespace nimfa
