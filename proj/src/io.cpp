#include "nimfa/io.hpp"

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "nimfa/errors.hpp"
#include "nimfa/util.hpp"

namespace nimfa {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string hex64(std::uint64_t v) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, v);
  return buf;
}

WeightedHypergraph read_hypergraph(std::istream& in) {
  std::string line;
  int n = -1, M = -1;
  std::string tag;
  std::size_t line_no = 0;
  RawHypergraph raw;
  std::unique_ptr<HypergraphBuilder> builder;
  bool normalize_raw = false;
  Convention conv = Convention::Explicit;

  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    if (!(ls >> std::ws) || ls.eof()) continue;
    auto fail = [&](const std::string& why) {
      throw InputError("hypergraph file line " + std::to_string(line_no) + ": " + why);
    };
    if (n < 0) {
      if (!(ls >> n >> M >> tag) || n < 1 || M < 1) fail("expected header 'N M convention'");
      if (tag == "1" || tag == "2") {
        normalize_raw = true;
        conv = tag == "1" ? Convention::One : Convention::Two;
        raw = RawHypergraph(n, M);
      } else if (tag == "w1" || tag == "w2" || tag == "explicit") {
        conv = tag == "w1" ? Convention::One : tag == "w2" ? Convention::Two : Convention::Explicit;
        builder = std::make_unique<HypergraphBuilder>(n, M);
      } else {
        fail("unknown convention '" + tag + "'");
      }
      continue;
    }
    int m = 0, head = 0;
    if (!(ls >> m >> head)) fail("expected 'm i j1 ... jm value'");
    if (m < 1 || m > M) fail("order out of range");
    std::vector<int> tail(static_cast<std::size_t>(m));
    for (int& j : tail) {
      if (!(ls >> j)) fail("missing tail vertex");
      if (j < 1 || j > n) fail("vertex label out of range");
      --j;
    }
    double value = 0.0;
    if (!(ls >> value)) fail("missing weight");
    std::string extra;
    if (ls >> extra) fail("trailing tokens");
    if (head < 1 || head > n) fail("vertex label out of range");
    if (!(value >= 0.0) || !std::isfinite(value)) fail("weights must be finite and nonnegative");
    if (normalize_raw)
      raw.add_edge(head - 1, std::move(tail), value);
    else
      builder->add(head - 1, tail, value);
  }
  if (n < 0) throw InputError("hypergraph file has no header");
  if (normalize_raw) return normalize(raw, conv);
  return std::move(*builder).build(conv, conv == Convention::Explicit);
}

WeightedHypergraph read_hypergraph(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open hypergraph file " + path.string());
  return read_hypergraph(in);
}

void write_hypergraph(std::ostream& out, const WeightedHypergraph& h) {
  const char* tag = h.convention() == Convention::One   ? "w1"
                    : h.convention() == Convention::Two ? "w2"
                                                        : "explicit";
  out << h.n_vertices() << ' ' << h.max_order() << ' ' << tag << '\n';
  for (int m = 1; m <= h.max_order(); ++m) {
    const auto& o = h.order(m);
    for (int i = 0; i < h.n_vertices(); ++i)
      for (std::size_t e = o.begin(i); e < o.end(i); ++e) {
        out << m << ' ' << i + 1;
        for (int j : o.tail(e)) out << ' ' << j + 1;
        out << ' ' << format_double(o.weights[e]) << '\n';
      }
  }
}

std::string hash_header(std::uint64_t config_hash) { return "# config_hash=" + hex64(config_hash); }

void write_csv(std::ostream& out, const CsvTable& table, std::uint64_t config_hash) {
  out << hash_header(config_hash) << '\n';
  for (std::size_t c = 0; c < table.columns.size(); ++c)
    out << (c ? "," : "") << table.columns[c];
  out << '\n';
  for (const auto& row : table.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) out << (c ? "," : "") << format_double(row[c]);
    out << '\n';
  }
}

void write_csv(const std::filesystem::path& path, const CsvTable& table, std::uint64_t config_hash) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path.string());
  write_csv(out, table, config_hash);
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path.string());
  out << text;
}

CsvTable event_table(const Trajectory& traj) {
  CsvTable t{{"time", "vertex", "from", "to"}, {}};
  for (const Event& e : traj.events)
    t.rows.push_back({e.time, static_cast<double>(e.vertex + 1), static_cast<double>(e.from),
                      static_cast<double>(e.to)});
  return t;
}

CsvTable prevalence_table(const Trajectory& traj) {
  CsvTable t;
  t.columns.push_back("time");
  const auto S = static_cast<std::size_t>(traj.n_states);
  for (std::size_t s = 0; s < S; ++s) t.columns.push_back("state_" + std::to_string(s) + "_fraction");
  const double n = static_cast<double>(traj.initial.state.size());
  std::vector<double> count(S, 0.0);
  for (int s : traj.initial.state) count[static_cast<std::size_t>(s)] += 1.0;
  auto emit = [&](double time) {
    std::vector<double> row{time};
    for (double c : count) row.push_back(c / n);
    t.rows.push_back(std::move(row));
  };
  emit(traj.initial.time);
  for (const Event& e : traj.events) {
    count[static_cast<std::size_t>(e.from)] -= 1.0;
    count[static_cast<std::size_t>(e.to)] += 1.0;
    emit(e.time);
  }
  return t;
}

CsvTable nimfa_table(const NimfaSolution& sol, std::span<const double> grid) {
  CsvTable t{{"time", "vertex", "state", "probability"}, {}};
  const auto S = static_cast<std::size_t>(sol.n_states());
  for (double time : grid) {
    const auto z = sol.state(time);
    for (std::size_t i = 0; i < static_cast<std::size_t>(sol.n_vertices()); ++i)
      for (std::size_t s = 0; s < S; ++s)
        t.rows.push_back({time, static_cast<double>(i + 1), static_cast<double>(s), z[i * S + s]});
  }
  return t;
}

CsvTable nimfa_mean_table(const NimfaSolution& sol, std::span<const double> grid) {
  CsvTable t;
  t.columns.push_back("time");
  for (int s = 0; s < sol.n_states(); ++s) t.columns.push_back("state_" + std::to_string(s));
  for (double time : grid) {
    std::vector<double> row{time};
    for (double v : sol.mean(time)) row.push_back(v);
    t.rows.push_back(std::move(row));
  }
  return t;
}

CsvTable reduced_table(const ReducedSolution& sol, std::span<const double> grid) {
  CsvTable t{{"time", "group", "state", "probability"}, {}};
  const auto S = static_cast<std::size_t>(sol.n_states);
  for (double time : grid) {
    const auto z = sol.dense.eval(time);
    for (std::size_t k = 0; k < sol.n_groups(); ++k)
      for (std::size_t s = 0; s < S; ++s)
        t.rows.push_back({time, static_cast<double>(k + 1), static_cast<double>(s), z[k * S + s]});
  }
  return t;
}

CsvTable marginal_table(const MarginalEstimate& est) {
  CsvTable t;
  t.columns.push_back("time");
  for (int s = 0; s < est.n_states; ++s) {
    t.columns.push_back("mean_state_" + std::to_string(s));
    t.columns.push_back("stderr_state_" + std::to_string(s));
  }
  for (std::size_t g = 0; g < est.grid.size(); ++g) {
    std::vector<double> row{est.grid[g]};
    for (int s = 0; s < est.n_states; ++s) {
      row.push_back(est.prevalence(g, s));
      row.push_back(est.prevalence_stderr(g, s));
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

std::string to_json(const ErrorReport& r, std::uint64_t config_hash) {
  nlohmann::ordered_json j;
  j["config_hash"] = hex64(config_hash);
  j["t"] = r.t;
  j["replicas"] = r.replicas;
  j["n_vertices"] = r.n_vertices;
  j["p_max"] = r.p_max;
  j["p_max_stderr"] = r.p_max_stderr;
  j["p_mean"] = r.p_mean;
  j["p_mean_stderr"] = r.p_mean_stderr;
  j["p_any"] = r.p_any;
  j["density_error"] = r.density_error;
  j["density_error_stderr"] = r.density_error_stderr;
  j["density_error_hat"] = r.density_error_hat;
  j["density_error_hat_stderr"] = r.density_error_hat_stderr;
  j["grid"] = r.grid;
  j["density_gap"] = r.density_gap;
  j["mismatch_max"] = r.mismatch_max;
  j["p_hat"] = r.p_hat;
  j["p_stderr"] = r.p_stderr;
  if (!r.neighborhood_error_mean.empty()) {
    j["neighborhood_error_mean"] = r.neighborhood_error_mean;
    j["neighborhood_error_max"] = r.neighborhood_error_max;
  }
  return j.dump(2) + "\n";
}

std::string to_json(const BoundReport& b, std::uint64_t config_hash) {
  nlohmann::ordered_json j;
  j["config_hash"] = hex64(config_hash);
  j["t"] = b.t;
  j["w_max"] = b.w_max;
  j["sqrt_wmax"] = b.sqrt_wmax;
  j["frobenius_bound"] = b.frobenius_bound;
  j["mu_inf"] = b.mu_inf;
  j["mu_2"] = b.mu_2;
  j["concentration_bound"] = b.concentration_bound;
  j["delta_max"] = b.delta_max;
  j["delta_max_out"] = b.delta_max_out;
  j["sloop_ratio"] = b.sloop_ratio;
  j["w_inf_norm"] = b.w_inf_norm;
  j["w_2_norm"] = b.w_2_norm;
  j["w_2_bound"] = b.w_2_bound;
  j["inf_norm_ok"] = b.inf_norm_ok;
  j["two_norm_ok"] = b.two_norm_ok;
  return j.dump(2) + "\n";
}

std::string to_json(const MarginalEstimate& est, std::uint64_t config_hash) {
  nlohmann::ordered_json j;
  j["config_hash"] = hex64(config_hash);
  j["replicas"] = est.replicas;
  j["grid"] = est.grid;
  nlohmann::ordered_json states = nlohmann::ordered_json::array();
  for (int s = 0; s < est.n_states; ++s) {
    std::vector<double> mean, err;
    for (std::size_t g = 0; g < est.grid.size(); ++g) {
      mean.push_back(est.prevalence(g, s));
      err.push_back(est.prevalence_stderr(g, s));
    }
    states.push_back({{"state", s}, {"mean", mean}, {"stderr", err}});
  }
  j["states"] = states;
  return j.dump(2) + "\n";
}

}  // namespace nimfa
