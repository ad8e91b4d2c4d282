// Command line front end: each subcommand runs one stage of an experiment config.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

#include "nimfa/errors.hpp"
#include "nimfa/experiment.hpp"
#include "nimfa/io.hpp"

namespace {

enum ExitCode { kOk = 0, kValidation = 2, kCapacity = 3, kNumerical = 4 };

// Keeps only the outputs belonging to one stage.
nimfa::ExperimentConfig restrict_to(nimfa::ExperimentConfig c, const std::string& stage) {
  if (stage == "run") return c;
  const std::string reduction = c.reduction;
  c.out_nimfa = c.out_trajectories = c.out_errors = c.out_bounds = c.out_master = false;
  c.out_neighborhood_errors = false;
  c.reduction.clear();
  c.scaling_sizes.clear();
  if (stage == "simulate") c.out_trajectories = true;
  if (stage == "nimfa") c.out_nimfa = true;
  if (stage == "reduce") c.reduction = reduction.empty() ? "hmfa" : reduction;
  if (stage == "couple") c.out_errors = true;
  if (stage == "analyze") c.out_bounds = true;
  return c;
}

int report(const std::vector<nimfa::Diagnostic>& diags) {
  bool capacity_only = true;
  for (const auto& d : diags) {
    std::cerr << "invalid " << d.field << ": " << d.message << '\n';
    capacity_only = capacity_only && d.kind == nimfa::Diagnostic::Kind::Capacity;
  }
  return capacity_only ? kCapacity : kValidation;
}

int execute(const std::string& stage, const std::string& config_path,
            std::optional<std::uint64_t> seed, const std::string& out_dir,
            std::optional<unsigned> threads) {
  nimfa::ExperimentConfig config = nimfa::load_config(config_path);
  if (seed) config.seed = *seed;
  if (threads) config.threads = *threads;

  if (stage == "generate") {
    config = restrict_to(config, "generate");
    auto diags = nimfa::validate(config);
    if (!diags.empty()) return report(diags);
    std::filesystem::create_directories(out_dir);
    const auto h = nimfa::build_network(config);
    const auto path = std::filesystem::path(out_dir) / "network.txt";
    std::ofstream out(path, std::ios::binary);
    out << nimfa::hash_header(config.hash()) << '\n';
    nimfa::write_hypergraph(out, h);
    std::cout << path.string() << '\n';
    return kOk;
  }

  config = restrict_to(config, stage);
  auto diags = nimfa::validate(config);
  if (!diags.empty()) return report(diags);
  const nimfa::RunManifest manifest = nimfa::run(config, out_dir);
  for (const auto& [name, path] : manifest.files) std::cout << name << '\t' << path << '\n';
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mean-field approximations and exact simulation of network population processes"};
  app.require_subcommand(1);
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir = "out";
  std::optional<unsigned> threads;

  const std::vector<std::pair<std::string, std::string>> stages{
      {"generate", "write the configured network as a hypergraph file"},
      {"simulate", "run stochastic replicas and write prevalence data"},
      {"nimfa", "solve the NIMFA system"},
      {"reduce", "solve the configured reduced system"},
      {"couple", "run coupled replicas and write the error report"},
      {"analyze", "evaluate bound ingredients of the network"},
      {"run", "produce every output requested by the config"}};
  for (const auto& [name, help] : stages) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config_path, "experiment config (YAML)")->required();
    sub->add_option("--seed", seed, "master seed, overrides the config");
    sub->add_option("--out-dir", out_dir, "output directory");
    sub->add_option("--threads", threads, "worker threads");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kValidation;
  }

  const std::string stage = app.get_subcommands().front()->get_name();
  try {
    return execute(stage, config_path, seed, out_dir, threads);
  } catch (const nimfa::CapacityError& e) {
    std::cerr << "capacity: " << e.what() << '\n';
    return kCapacity;
  } catch (const nimfa::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kNumerical;
  } catch (const nimfa::ModelError& e) {
    std::cerr << "model failure: " << e.what() << '\n';
    return kNumerical;
  } catch (const nimfa::Error& e) {
    std::cerr << "invalid input: " << e.what() << '\n';
    return kValidation;
  }
}
