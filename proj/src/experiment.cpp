#include "nimfa/experiment.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>
#include <yaml-cpp/yaml.h>

#include "nimfa/analysis.hpp"
#include "nimfa/errors.hpp"
#include "nimfa/io.hpp"
#include "nimfa/meanfield.hpp"
#include "nimfa/parallel.hpp"
#include "nimfa/stochastic.hpp"
#include "nimfa/util.hpp"

namespace nimfa {

namespace {

std::string join(const std::vector<double>& v) {
  std::string s;
  for (std::size_t k = 0; k < v.size(); ++k) s += (k ? "," : "") + format_double(v[k]);
  return s;
}

// Flattens scalars and (nested) sequences into the comma separated parameter syntax.
std::string scalar_text(const YAML::Node& node, const std::string& field) {
  if (node.IsScalar()) return node.as<std::string>();
  if (node.IsSequence()) {
    std::string s;
    for (std::size_t k = 0; k < node.size(); ++k) s += (k ? "," : "") + scalar_text(node[k], field);
    return s;
  }
  throw InputError(field + ": expected a value or a list");
}

std::map<std::string, std::string> param_map(const YAML::Node& node, const std::string& field) {
  std::map<std::string, std::string> out;
  if (!node) return out;
  if (!node.IsMap()) throw InputError(field + ": expected a mapping");
  for (const auto& kv : node) {
    const auto key = kv.first.as<std::string>();
    out[key] = scalar_text(kv.second, field + "." + key);
  }
  return out;
}

void check_keys(const YAML::Node& node, const std::set<std::string>& allowed,
                const std::string& field) {
  if (!node) return;
  if (!node.IsMap()) throw InputError((field.empty() ? "config" : field) + ": expected a mapping");
  for (const auto& kv : node) {
    const auto key = kv.first.as<std::string>();
    if (!allowed.count(key))
      throw InputError((field.empty() ? key : field + "." + key) + ": unknown key");
  }
}

template <typename T>
T read(const YAML::Node& node, const std::string& field) {
  try {
    return node.as<T>();
  } catch (const YAML::Exception&) {
    throw InputError(field + ": invalid value '" + (node.IsScalar() ? node.Scalar() : "") + "'");
  }
}

std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> g;
  if (n < 2) return {b};
  for (int k = 0; k < n; ++k) g.push_back(k == n - 1 ? b : a + (b - a) * k / (n - 1));
  return g;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::vector<int> int_list(const std::string& text) {
  std::vector<int> out;
  for (double v : parse_number_list(text)) {
    if (v != std::floor(v)) throw ParameterError("group labels must be integers");
    out.push_back(static_cast<int>(v));
  }
  return out;
}

}  // namespace

std::string ExperimentConfig::canonical() const {
  std::ostringstream s;
  s << "family=" << family << '\n';
  for (const auto& [k, v] : network_params) s << "network." << k << '=' << v << '\n';
  s << "network_file=" << network_file << '\n';
  s << "model=" << model << '\n';
  for (const auto& [k, v] : model_params) s << "model." << k << '=' << v << '\n';
  s << "initial.uniform=" << join(initial_uniform) << '\n';
  s << "initial.state=" << (initial_state ? std::to_string(*initial_state) : "") << '\n';
  s << "initial.file=" << initial_file << '\n';
  s << "t_end=" << format_double(t_end) << '\n';
  s << "grid=" << grid_points << '\n';
  s << "replicas=" << replicas << '\n';
  s << "seed=" << (seed ? std::to_string(*seed) : "") << '\n';
  s << "outputs.nimfa=" << out_nimfa << '\n';
  s << "outputs.trajectories=" << out_trajectories << '\n';
  s << "outputs.trajectory_logs=" << trajectory_logs << '\n';
  s << "outputs.reduction=" << reduction << '\n';
  for (const auto& [k, v] : reduction_params) s << "outputs.reduction." << k << '=' << v << '\n';
  s << "outputs.errors=" << out_errors << '\n';
  s << "outputs.neighborhood_errors=" << out_neighborhood_errors << '\n';
  s << "outputs.bounds=" << out_bounds << '\n';
  s << "outputs.master=" << out_master << '\n';
  s << "outputs.scaling=";
  for (int n : scaling_sizes) s << n << ',';
  s << '\n';
  return s.str();
}

std::uint64_t ExperimentConfig::hash() const {
  Fnv1a h;
  h.text(canonical());
  return h.digest();
}

ExperimentConfig parse_config(const std::string& yaml_text) {
  YAML::Node root;
  try {
    root = YAML::Load(yaml_text);
  } catch (const YAML::Exception& e) {
    throw InputError(std::string("config: ") + e.what());
  }
  ExperimentConfig c;
  if (!root || root.IsNull()) throw InputError("config: empty document");
  check_keys(root,
             {"network", "model", "initial", "t_end", "grid", "replicas", "seed", "threads",
              "outputs"},
             "");

  const YAML::Node net = root["network"];
  if (!net) throw InputError("network: missing section");
  check_keys(net, {"family", "params", "file"}, "network");
  if (net["family"]) c.family = read<std::string>(net["family"], "network.family");
  if (net["file"]) c.network_file = read<std::string>(net["file"], "network.file");
  c.network_params = param_map(net["params"], "network.params");

  const YAML::Node model = root["model"];
  if (!model) throw InputError("model: missing section");
  check_keys(model, {"name", "params"}, "model");
  if (!model["name"]) throw InputError("model.name: missing");
  c.model = read<std::string>(model["name"], "model.name");
  c.model_params = param_map(model["params"], "model.params");

  const YAML::Node init = root["initial"];
  if (init) {
    check_keys(init, {"uniform", "state", "file"}, "initial");
    if (init["uniform"])
      c.initial_uniform = parse_number_list(scalar_text(init["uniform"], "initial.uniform"));
    if (init["state"]) c.initial_state = read<int>(init["state"], "initial.state");
    if (init["file"]) c.initial_file = read<std::string>(init["file"], "initial.file");
  }

  if (root["t_end"]) c.t_end = read<double>(root["t_end"], "t_end");
  if (root["grid"]) c.grid_points = read<int>(root["grid"], "grid");
  if (root["replicas"]) {
    const long long r = read<long long>(root["replicas"], "replicas");
    if (r < 0) throw InputError("replicas: must be nonnegative");
    c.replicas = static_cast<std::size_t>(r);
  }
  if (root["seed"]) c.seed = read<std::uint64_t>(root["seed"], "seed");
  if (root["threads"]) c.threads = read<unsigned>(root["threads"], "threads");

  const YAML::Node out = root["outputs"];
  if (out) {
    check_keys(out,
               {"nimfa", "trajectories", "trajectory_logs", "reduction", "errors",
                "neighborhood_errors", "bounds", "master", "scaling"},
               "outputs");
    if (out["nimfa"]) c.out_nimfa = read<bool>(out["nimfa"], "outputs.nimfa");
    if (out["trajectories"]) c.out_trajectories = read<bool>(out["trajectories"], "outputs.trajectories");
    if (out["trajectory_logs"])
      c.trajectory_logs = read<std::size_t>(out["trajectory_logs"], "outputs.trajectory_logs");
    if (out["errors"]) c.out_errors = read<bool>(out["errors"], "outputs.errors");
    if (out["neighborhood_errors"])
      c.out_neighborhood_errors = read<bool>(out["neighborhood_errors"], "outputs.neighborhood_errors");
    if (out["bounds"]) c.out_bounds = read<bool>(out["bounds"], "outputs.bounds");
    if (out["master"]) c.out_master = read<bool>(out["master"], "outputs.master");
    if (const YAML::Node red = out["reduction"]) {
      if (red.IsScalar()) {
        c.reduction = red.as<std::string>();
      } else {
        check_keys(red, {"name", "params"}, "outputs.reduction");
        if (!red["name"]) throw InputError("outputs.reduction.name: missing");
        c.reduction = read<std::string>(red["name"], "outputs.reduction.name");
        c.reduction_params = param_map(red["params"], "outputs.reduction.params");
      }
    }
    if (const YAML::Node sc = out["scaling"]) {
      check_keys(sc, {"sizes"}, "outputs.scaling");
      if (!sc["sizes"]) throw InputError("outputs.scaling.sizes: missing");
      for (double v : parse_number_list(scalar_text(sc["sizes"], "outputs.scaling.sizes")))
        c.scaling_sizes.push_back(static_cast<int>(v));
    }
  }
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open config file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

WeightedHypergraph build_network(const ExperimentConfig& c, int n) {
  if (!c.network_file.empty()) return read_hypergraph(c.network_file);
  GeneratorParams p = c.network_params;
  if (n > 0) p["n"] = std::to_string(n);
  return generate(c.family, p, c.seed.value_or(0));
}

ModelPtr build_model(const ExperimentConfig& c) { return make_model(c.model, c.model_params); }

std::vector<double> build_initial(const ExperimentConfig& c, int n_vertices, int n_states) {
  const auto N = static_cast<std::size_t>(n_vertices);
  const auto S = static_cast<std::size_t>(n_states);
  std::vector<double> z(N * S, 0.0);
  if (!c.initial_file.empty()) {
    std::ifstream in(c.initial_file);
    if (!in) throw InputError("initial.file: cannot open " + c.initial_file);
    std::vector<double> values;
    std::string line;
    while (std::getline(in, line)) {
      if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
      std::istringstream ls(line);
      double v;
      while (ls >> v) values.push_back(v);
    }
    if (values.size() != N * S)
      throw InputError("initial.file: expected " + std::to_string(N * S) + " values");
    z = values;
  } else if (c.initial_state) {
    const int s = *c.initial_state;
    if (s < 0 || s >= n_states) throw ParameterError("initial.state: state out of range");
    for (std::size_t i = 0; i < N; ++i) z[i * S + static_cast<std::size_t>(s)] = 1.0;
  } else {
    if (c.initial_uniform.size() != S)
      throw ParameterError("initial.uniform: needs one probability per state");
    for (std::size_t i = 0; i < N; ++i)
      for (std::size_t s = 0; s < S; ++s) z[i * S + s] = c.initial_uniform[s];
  }
  check_simplex(z, n_states, 1e-9);
  return z;
}

std::vector<Diagnostic> validate(const ExperimentConfig& c) {
  std::vector<Diagnostic> d;
  auto add = [&](std::string field, std::string msg,
                 Diagnostic::Kind kind = Diagnostic::Kind::Validation) {
    d.push_back({kind, std::move(field), std::move(msg)});
  };

  ModelPtr model;
  try {
    model = build_model(c);
  } catch (const Error& e) {
    add("model.params", e.what());
  }

  const int sources = (c.initial_uniform.empty() ? 0 : 1) + (c.initial_state ? 1 : 0) +
                      (c.initial_file.empty() ? 0 : 1);
  if (sources != 1) add("initial", "give exactly one of uniform, state or file");
  if (!c.initial_uniform.empty()) {
    double sum = 0.0;
    bool negative = false;
    for (double v : c.initial_uniform) {
      sum += v;
      negative = negative || !(v >= 0.0);
    }
    if (negative || std::abs(sum - 1.0) > 1e-9)
      add("initial.uniform", "vector is not on the probability simplex (sum " + format_double(sum) + ")");
    else if (model && c.initial_uniform.size() != static_cast<std::size_t>(model->n_states()))
      add("initial.uniform", "needs one probability per model state");
  }
  if (c.initial_state && model && (*c.initial_state < 0 || *c.initial_state >= model->n_states()))
    add("initial.state", "state out of range");

  if (!(c.t_end > 0.0) || !std::isfinite(c.t_end)) add("t_end", "horizon must be positive");
  if (c.grid_points < 2) add("grid", "at least two grid points are required");
  if (c.stochastic() && !c.seed) add("seed", "a seed is required for stochastic outputs");
  if ((c.out_trajectories || c.out_errors || !c.scaling_sizes.empty()) && c.replicas == 0)
    add("replicas", "stochastic outputs need at least one replica");
  if (c.out_errors && c.replicas < 2) add("replicas", "error estimation needs at least two replicas");
  if (!c.scaling_sizes.empty()) {
    if (c.scaling_sizes.size() < 3) add("outputs.scaling.sizes", "at least three sizes are needed");
    for (int n : c.scaling_sizes)
      if (n < 2) add("outputs.scaling.sizes", "sizes must be at least 2");
    if (!c.network_file.empty()) add("outputs.scaling", "scaling studies need a generator family");
  }
  static const std::set<std::string> reductions{"", "hmfa", "metapop", "imfa", "activity", "partition"};
  if (!reductions.count(c.reduction)) add("outputs.reduction", "unknown reduction '" + c.reduction + "'");
  if (c.reduction == "imfa" && c.family != "annealed")
    add("outputs.reduction", "imfa needs the annealed network family");
  if (c.reduction == "activity" && c.family != "activity")
    add("outputs.reduction", "activity reduction needs the activity network family");
  if (c.reduction == "metapop" && !c.reduction_params.count("groups"))
    add("outputs.reduction.params.groups", "metapopulation reduction needs a group per vertex");
  if (c.reduction == "partition" && !c.reduction_params.count("blocks"))
    add("outputs.reduction.params.blocks", "partition reduction needs a block per vertex");

  if (c.family.empty() == c.network_file.empty()) {
    add("network", "give exactly one of family or file");
    return d;
  }
  WeightedHypergraph h;
  try {
    h = build_network(c);
  } catch (const CapacityError& e) {
    add("network", e.what(), Diagnostic::Kind::Capacity);
    return d;
  } catch (const Error& e) {
    add(c.network_file.empty() ? "network.params" : "network.file", e.what());
    return d;
  }
  if (model && h.max_order() > model->max_order())
    add("model", "network order " + std::to_string(h.max_order()) + " exceeds the model order");
  if (c.out_master && model) {
    const double states = std::pow(static_cast<double>(model->n_states()), h.n_vertices());
    if (states > static_cast<double>(kMasterCapacity))
      add("outputs.master",
          "state space |S|^N = " + format_double(states) + " exceeds the master capacity guard " +
              std::to_string(kMasterCapacity) + " (kMasterCapacity = 2^20)",
          Diagnostic::Kind::Capacity);
  }
  if (model && !c.initial_file.empty()) {
    try {
      build_initial(c, h.n_vertices(), model->n_states());
    } catch (const Error& e) {
      add("initial.file", e.what());
    }
  }
  return d;
}

std::string RunManifest::to_json() const {
  nlohmann::ordered_json j;
  j["config_hash"] = hex64(config_hash);
  j["version"] = version;
  j["files"] = files;
  j["timings_seconds"] = timings;
  j["instance"] = {{"n_vertices", n_vertices},
                   {"max_order", max_order},
                   {"edge_counts", edge_counts},
                   {"w_max", regularity.w_max},
                   {"delta_max", regularity.delta_max},
                   {"delta_max_out", regularity.delta_max_out},
                   {"sloop_ratio", regularity.sloop_ratio},
                   {"frobenius_sq", regularity.frobenius_sq}};
  j["summary"] = summary;
  return j.dump(2) + "\n";
}

namespace {

struct Context {
  const ExperimentConfig& c;
  std::filesystem::path dir;
  RunManifest& manifest;
  std::uint64_t hash;
  unsigned threads;

  std::string file(const std::string& name, const std::string& fname) {
    const auto path = dir / fname;
    manifest.files[name] = path.string();
    return path.string();
  }
};

ErrorAccumulator coupled_errors(const WeightedHypergraph& h, const ModelPtr& model,
                                const NimfaSolution& nimfa, const std::vector<double>& z0,
                                const std::vector<double>& grid, double t, std::size_t replicas,
                                std::uint64_t seed, bool neighborhood, unsigned threads) {
  const Simulator sim(h, model);
  const InitialCondition init{{}, z0};
  const std::uint64_t stream = splitmix64(seed ^ 0x636f75706c656400ULL);
  auto make = [&] { return ErrorAccumulator(nimfa, grid, t, neighborhood ? &h : nullptr); };
  auto body = [&](ErrorAccumulator& acc, std::size_t idx) {
    Rng rng(replica_seed(stream, idx));
    const PopulationState start = init.draw(model->n_states(), rng);
    acc.add(sim.simulate_coupled(start, nimfa, t, rng));
  };
  return parallel_accumulate<ErrorAccumulator>(replicas, threads, make, body);
}

void run_reduction(Context& ctx, const WeightedHypergraph& h, const RateModel& model,
                   const std::vector<double>& z0, const std::vector<double>& grid) {
  const ExperimentConfig& c = ctx.c;
  const auto S = static_cast<std::size_t>(model.n_states());
  const auto N = static_cast<std::size_t>(h.n_vertices());
  std::set<std::string> used;
  auto param = [&](const std::string& key) -> std::string {
    used.insert(key);
    auto it = c.reduction_params.find(key);
    if (it == c.reduction_params.end())
      throw ParameterError("outputs.reduction.params." + key + ": missing");
    return it->second;
  };
  // class means of z0 for a vertex -> class map
  auto class_means = [&](const std::vector<int>& class_of, std::size_t C) {
    std::vector<double> out(C * S, 0.0), count(C, 0.0);
    for (std::size_t i = 0; i < N; ++i) {
      const auto k = static_cast<std::size_t>(class_of[i]);
      count[k] += 1.0;
      for (std::size_t s = 0; s < S; ++s) out[k * S + s] += z0[i * S + s];
    }
    for (std::size_t k = 0; k < C; ++k)
      for (std::size_t s = 0; s < S; ++s) out[k * S + s] /= count[k];
    return out;
  };

  ReducedSolution sol;
  const std::string& name = c.reduction;
  if (name == "hmfa") {
    std::vector<double> u0(S, 0.0);
    for (std::size_t i = 0; i < N; ++i)
      for (std::size_t s = 0; s < S; ++s) u0[s] += z0[i * S + s] / static_cast<double>(N);
    sol = hmfa_solve(model, u0, c.t_end);
  } else if (name == "metapop") {
    const auto groups = int_list(param("groups"));
    auto red = metapop_reduce(h, groups, z0, model.n_states());
    std::ofstream g(ctx.file("reduced_graph", "reduced_metapop_graph.txt"), std::ios::binary);
    g << hash_header(ctx.hash) << '\n';
    write_hypergraph(g, red.reduced);
    sol = metapop_solve(red, model, c.t_end);
  } else if (name == "imfa") {
    std::vector<std::vector<double>> degrees{parse_number_list(c.network_params.at("degrees"))};
    for (int m = 2; c.network_params.count("degrees" + std::to_string(m)); ++m)
      degrees.push_back(parse_number_list(c.network_params.at("degrees" + std::to_string(m))));
    const auto it = c.network_params.find("convention");
    const Convention conv = it != c.network_params.end() && it->second == "2" ? Convention::Two
                                                                                : Convention::One;
    const DegreeClasses dc = degree_classes(degrees);
    sol = imfa_solve(degrees, model, conv, class_means(dc.class_of, dc.sizes.size()), c.t_end);
  } else if (name == "activity") {
    std::vector<std::vector<double>> act{parse_number_list(c.network_params.at("activity"))};
    for (int m = 2; c.network_params.count("activity" + std::to_string(m)); ++m)
      act.push_back(parse_number_list(c.network_params.at("activity" + std::to_string(m))));
    const DegreeClasses dc = degree_classes(act);
    std::vector<std::vector<double>> per_class(act.size());
    for (std::size_t m = 0; m < act.size(); ++m)
      for (const auto& d : dc.degrees) per_class[m].push_back(d[m]);
    sol = activity_solve(per_class, dc.sizes, model, class_means(dc.class_of, dc.sizes.size()),
                         c.t_end);
  } else if (name == "partition") {
    const auto spec = PartitionSpec::from_blocks(int_list(param("blocks")));
    auto red = partition_reduce(h, spec, model, z0, c.t_end);
    std::ofstream g(ctx.file("reduced_graph", "reduced_partition_graph.txt"), std::ios::binary);
    g << hash_header(ctx.hash) << '\n';
    write_hypergraph(g, red.reduced);
    sol = std::move(red.solution);
  }
  for (const auto& [k, v] : c.reduction_params)
    if (!used.count(k)) throw ParameterError("outputs.reduction.params." + k + ": unknown parameter");
  write_csv(ctx.file("reduction", "reduced_" + name + ".csv"), reduced_table(sol, grid), ctx.hash);
}

}  // namespace

RunManifest run(const ExperimentConfig& c, const std::filesystem::path& out_dir) {
  const auto diags = validate(c);
  if (!diags.empty()) {
    std::string msg;
    bool capacity_only = true;
    for (const auto& d : diags) {
      msg += d.field + ": " + d.message + "\n";
      capacity_only = capacity_only && d.kind == Diagnostic::Kind::Capacity;
    }
    if (capacity_only) throw CapacityError(msg);
    throw ParameterError(msg);
  }
  std::filesystem::create_directories(out_dir);
  RunManifest manifest;
  manifest.config_hash = c.hash();
  Context ctx{c, out_dir, manifest, manifest.config_hash, c.threads ? c.threads : default_threads()};
  const std::uint64_t seed = c.seed.value_or(0);

  auto clock = std::chrono::steady_clock::now();
  const WeightedHypergraph h = build_network(c);
  const ModelPtr model = build_model(c);
  const std::vector<double> z0 = build_initial(c, h.n_vertices(), model->n_states());
  const std::vector<double> grid = linspace(0.0, c.t_end, c.grid_points);
  manifest.timings["network"] = seconds_since(clock);
  manifest.n_vertices = h.n_vertices();
  manifest.max_order = h.max_order();
  for (int m = 1; m <= h.max_order(); ++m) manifest.edge_counts.push_back(h.edge_count(m));
  manifest.regularity = regularity_report(h);

  std::optional<NimfaSolution> nimfa;
  auto need_nimfa = [&] {
    if (!nimfa) {
      auto t0 = std::chrono::steady_clock::now();
      ode::Options opt = meanfield_options();
      opt.stop_times = grid;
      nimfa = nimfa_solve(h, *model, z0, c.t_end, opt, true);
      manifest.timings["nimfa"] = seconds_since(t0);
    }
    return std::cref(*nimfa);
  };

  if (c.out_nimfa) {
    const NimfaSolution& sol = need_nimfa();
    write_csv(ctx.file("nimfa", "nimfa.csv"), nimfa_table(sol, grid), ctx.hash);
    write_csv(ctx.file("nimfa_mean", "nimfa_mean.csv"), nimfa_mean_table(sol, grid), ctx.hash);
  }

  if (c.out_trajectories) {
    auto t0 = std::chrono::steady_clock::now();
    const Simulator sim(h, model);
    InitialCondition init;
    if (c.initial_state)
      init.fixed.assign(static_cast<std::size_t>(h.n_vertices()), *c.initial_state);
    else
      init.z0 = z0;
    const MarginalEstimate est = estimate_marginals(sim, init, grid, c.replicas, seed, ctx.threads);
    write_csv(ctx.file("prevalence_mean", "prevalence_mean.csv"), marginal_table(est), ctx.hash);
    write_text(ctx.file("prevalence_mean_json", "prevalence_mean.json"), to_json(est, ctx.hash));
    for (std::size_t r = 0; r < std::min(c.trajectory_logs, c.replicas); ++r) {
      Rng rng(replica_seed(seed, r));
      const PopulationState start = init.draw(model->n_states(), rng);
      const Trajectory traj = sim.simulate(start, c.t_end, rng);
      const std::string tag = std::to_string(r);
      write_csv(ctx.file("events_" + tag, "events_" + tag + ".csv"), event_table(traj), ctx.hash);
      write_csv(ctx.file("prevalence_" + tag, "prevalence_" + tag + ".csv"), prevalence_table(traj),
                ctx.hash);
    }
    manifest.timings["trajectories"] = seconds_since(t0);
  }

  if (!c.reduction.empty()) {
    auto t0 = std::chrono::steady_clock::now();
    run_reduction(ctx, h, *model, z0, grid);
    manifest.timings["reduction"] = seconds_since(t0);
  }

  if (c.out_errors) {
    const NimfaSolution& sol = need_nimfa();
    auto t0 = std::chrono::steady_clock::now();
    const ErrorReport rep = coupled_errors(h, model, sol, z0, grid, c.t_end, c.replicas, seed,
                                           c.out_neighborhood_errors, ctx.threads)
                                .report();
    write_text(ctx.file("errors", "errors.json"), to_json(rep, ctx.hash));
    manifest.summary["p_max"] = rep.p_max;
    manifest.summary["density_error"] = rep.density_error;
    manifest.timings["errors"] = seconds_since(t0);
  }

  if (c.out_bounds) {
    write_text(ctx.file("bounds", "bounds.json"),
               to_json(evaluate_bounds(h, c.t_end, model->n_states()), ctx.hash));
  }

  if (c.out_master) {
    auto t0 = std::chrono::steady_clock::now();
    const auto N = static_cast<std::size_t>(h.n_vertices());
    const auto S = static_cast<std::size_t>(model->n_states());
    std::vector<double> dist{1.0};
    for (std::size_t i = 0; i < N; ++i) {
      std::vector<double> next;
      next.reserve(dist.size() * S);
      for (double p : dist)
        for (std::size_t s = 0; s < S; ++s) next.push_back(p * z0[i * S + s]);
      dist.swap(next);
    }
    const MasterSolution ms = master_solve(h, *model, dist, grid);
    CsvTable t{{"time", "vertex", "state", "probability"}, {}};
    for (std::size_t g = 0; g < grid.size(); ++g)
      for (int i = 0; i < h.n_vertices(); ++i)
        for (int s = 0; s < model->n_states(); ++s)
          t.rows.push_back({grid[g], static_cast<double>(i + 1), static_cast<double>(s),
                            ms.marginal(g, i, s)});
    write_csv(ctx.file("master", "master.csv"), t, ctx.hash);
    manifest.timings["master"] = seconds_since(t0);
  }

  if (!c.scaling_sizes.empty()) {
    auto t0 = std::chrono::steady_clock::now();
    std::vector<ScalingPoint> points;
    CsvTable table{{"size", "mean_error", "stderr", "bound_value"}, {}};
    for (int n : c.scaling_sizes) {
      const WeightedHypergraph hn = build_network(c, n);
      const std::vector<double> zn = build_initial(c, hn.n_vertices(), model->n_states());
      ode::Options opt = meanfield_options();
      opt.stop_times = grid;
      const NimfaSolution sol = nimfa_solve(hn, *model, zn, c.t_end, opt, true);
      const ErrorReport rep = coupled_errors(hn, model, sol, zn, grid, c.t_end, c.replicas,
                                             splitmix64(seed + static_cast<std::uint64_t>(n)),
                                             false, ctx.threads)
                                  .report();
      const std::string tag = std::to_string(n);
      write_text(ctx.file("scaling_" + tag, "scaling_n" + tag + ".json"), to_json(rep, ctx.hash));
      const BoundReport b = evaluate_bounds(hn, c.t_end, model->n_states());
      points.push_back({static_cast<double>(n), rep.p_max, rep.p_max_stderr});
      table.rows.push_back({static_cast<double>(n), rep.p_max, rep.p_max_stderr, b.sqrt_wmax});
    }
    write_csv(ctx.file("scaling", "scaling.csv"), table, ctx.hash);
    const ScalingFit fit = fit_scaling(points, seed);
    nlohmann::ordered_json j;
    j["config_hash"] = hex64(ctx.hash);
    j["exponent"] = fit.exponent;
    j["intercept"] = fit.intercept;
    j["ci_low"] = fit.ci_low;
    j["ci_high"] = fit.ci_high;
    j["points_used"] = fit.used;
    j["warnings"] = fit.warnings;
    write_text(ctx.file("scaling_fit", "scaling_fit.json"), j.dump(2) + "\n");
    manifest.summary["scaling_exponent"] = fit.exponent;
    manifest.timings["scaling"] = seconds_since(t0);
  }

  write_text(out_dir / "manifest.json", manifest.to_json());
  return manifest;
}

}  // namespace nimfa
