#include "nimfa/generators.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <sstream>

#include "nimfa/errors.hpp"

namespace nimfa {

namespace {

/// Symmetric simple graph from adjacency lists, normalized in place without
/// materializing a RawHypergraph (the complete graph on 1600 vertices has 2.5M entries).
WeightedHypergraph normalize_simple(int n, const std::vector<std::vector<int>>& adj,
                                    Convention convention) {
  if (convention == Convention::Explicit)
    throw ParameterError("simple graph families need convention 1 or 2");
  double total = 0.0;
  for (const auto& row : adj) total += static_cast<double>(row.size());
  const double mean_degree = total / n;
  HypergraphBuilder b(n, 1);
  for (int i = 0; i < n; ++i) {
    const auto& row = adj[static_cast<std::size_t>(i)];
    const double denom =
        convention == Convention::One ? mean_degree : static_cast<double>(row.size());
    if (denom <= 0.0) continue;
    for (int j : row) b.add(i, {j}, 1.0 / denom);
  }
  return std::move(b).build(convention);
}

Convention parse_convention(const std::string& s) {
  if (s == "1" || s == "one") return Convention::One;
  if (s == "2" || s == "two") return Convention::Two;
  if (s == "explicit") return Convention::Explicit;
  throw ParameterError("unknown convention '" + s + "'");
}

/// Iterates all tuples of [n]^m in lexicographic order.
template <typename F>
void for_each_tuple(int n, int m, F&& f) {
  std::vector<int> t(static_cast<std::size_t>(m), 0);
  while (true) {
    f(std::span<const int>(t));
    int pos = m - 1;
    while (pos >= 0 && ++t[static_cast<std::size_t>(pos)] == n) t[static_cast<std::size_t>(pos--)] = 0;
    if (pos < 0) return;
  }
}

double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

}  // namespace

WeightedHypergraph complete_graph(int n, Convention convention) {
  if (n < 2) throw ParameterError("complete graph needs n >= 2");
  std::vector<std::vector<int>> adj(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j) adj[static_cast<std::size_t>(i)].push_back(j);
  return normalize_simple(n, adj, convention);
}

WeightedHypergraph ring_graph(int n, int k, Convention convention) {
  if (k < 1 || 2 * k >= n) throw ParameterError("ring needs 1 <= k and 2k < n");
  std::vector<std::vector<int>> adj(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    auto& row = adj[static_cast<std::size_t>(i)];
    for (int d = 1; d <= k; ++d) {
      row.push_back((i + d) % n);
      row.push_back((i - d + n) % n);
    }
    std::sort(row.begin(), row.end());
  }
  return normalize_simple(n, adj, convention);
}

WeightedHypergraph star_graph(int n_leaves, Convention convention) {
  if (n_leaves < 1) throw ParameterError("star needs at least one leaf");
  const int n = n_leaves + 1;
  std::vector<std::vector<int>> adj(static_cast<std::size_t>(n));
  for (int j = 1; j < n; ++j) {
    adj[0].push_back(j);
    adj[static_cast<std::size_t>(j)].push_back(0);
  }
  return normalize_simple(n, adj, convention);
}

WeightedHypergraph path_graph(int n, Convention convention) {
  if (n < 2) throw ParameterError("path needs n >= 2");
  std::vector<std::vector<int>> adj(static_cast<std::size_t>(n));
  for (int i = 0; i + 1 < n; ++i) {
    adj[static_cast<std::size_t>(i)].push_back(i + 1);
    adj[static_cast<std::size_t>(i + 1)].push_back(i);
  }
  for (auto& row : adj) std::sort(row.begin(), row.end());
  return normalize_simple(n, adj, convention);
}

WeightedHypergraph hmfa_hypergraph(int n, int max_order) {
  if (n < 1 || max_order < 1) throw ParameterError("hmfa hypergraph needs n >= 1, M >= 1");
  if (std::pow(static_cast<double>(n), max_order + 1) > 5e7)
    throw CapacityError("hmfa hypergraph with N^(M+1) > 5e7 entries");
  HypergraphBuilder b(n, max_order);
  for (int m = 1; m <= max_order; ++m) {
    const double w = 1.0 / std::pow(static_cast<double>(n), m);
    for (int i = 0; i < n; ++i) for_each_tuple(n, m, [&](std::span<const int> t) { b.add(i, t, w); });
  }
  return std::move(b).build(Convention::Explicit, true);
}

WeightedHypergraph annealed_configuration(const std::vector<std::vector<double>>& degrees,
                                          Convention convention, bool keep_self_pairs) {
  if (degrees.empty() || degrees[0].empty()) throw ParameterError("empty degree sequence");
  if (convention == Convention::Explicit)
    throw ParameterError("annealed configuration model needs convention 1 or 2");
  const int n = static_cast<int>(degrees[0].size());
  const int max_order = static_cast<int>(degrees.size());
  for (const auto& d : degrees) {
    if (static_cast<int>(d.size()) != n)
      throw ParameterError("every order needs one degree per vertex");
    for (double x : d)
      if (!std::isfinite(x) || x < 0.0) throw ParameterError("degrees must be nonnegative");
  }
  if (std::pow(static_cast<double>(n), max_order + 1) > 5e7)
    throw CapacityError("annealed hypergraph with N^(M+1) > 5e7 entries");

  HypergraphBuilder b(n, max_order);
  for (int m = 1; m <= max_order; ++m) {
    const auto& d = degrees[static_cast<std::size_t>(m - 1)];
    double mean = 0.0;
    for (double x : d) mean += x;
    mean /= n;
    if (mean <= 0.0) continue;
    const double scale = std::pow(mean * n, m);
    for (int i = 0; i < n; ++i) {
      const double di = d[static_cast<std::size_t>(i)];
      if (di <= 0.0) continue;
      const double head = convention == Convention::One ? di / mean : 1.0;
      for_each_tuple(n, m, [&](std::span<const int> t) {
        if (m == 1 && t[0] == i && !keep_self_pairs) return;
        double w = head / scale;
        for (int j : t) w *= d[static_cast<std::size_t>(j)];
        b.add(i, t, w);
      });
    }
  }
  return std::move(b).build(convention, keep_self_pairs);
}

WeightedHypergraph activity_driven(const std::vector<std::vector<double>>& activities) {
  if (activities.empty() || activities[0].empty()) throw ParameterError("empty activity list");
  const int n = static_cast<int>(activities[0].size());
  const int max_order = static_cast<int>(activities.size());
  for (const auto& a : activities) {
    if (static_cast<int>(a.size()) != n)
      throw ParameterError("every order needs one activity per vertex");
    for (double x : a)
      if (!std::isfinite(x) || x < 0.0) throw ParameterError("activities must be nonnegative");
  }
  if (std::pow(static_cast<double>(n), max_order + 1) > 5e7)
    throw CapacityError("activity hypergraph with N^(M+1) > 5e7 entries");
  HypergraphBuilder b(n, max_order);
  for (int m = 1; m <= max_order; ++m) {
    const auto& a = activities[static_cast<std::size_t>(m - 1)];
    const double scale = std::pow(static_cast<double>(n), m);
    for (int i = 0; i < n; ++i)
      for_each_tuple(n, m, [&](std::span<const int> t) {
        double s = a[static_cast<std::size_t>(i)];
        for (int j : t) s += a[static_cast<std::size_t>(j)];
        b.add(i, t, s / scale);
      });
  }
  return std::move(b).build(Convention::Explicit, true);
}

WeightedHypergraph block_graph(int n, const std::vector<int>& sizes,
                               const std::vector<std::vector<double>>& block_weights) {
  const std::size_t k = sizes.size();
  if (k == 0) throw ParameterError("block graph needs at least one block");
  long total = 0;
  for (int s : sizes) {
    if (s <= 0) throw ParameterError("block sizes must be positive");
    total += s;
  }
  if (total != n)
    throw ParameterError("block sizes sum to " + std::to_string(total) + ", expected N = " +
                         std::to_string(n));
  if (block_weights.size() != k)
    throw ParameterError("block weight matrix must be K x K");
  for (const auto& row : block_weights)
    if (row.size() != k) throw ParameterError("block weight matrix must be K x K");
  std::vector<int> block(static_cast<std::size_t>(n));
  for (std::size_t b = 0, v = 0; b < k; ++b)
    for (int c = 0; c < sizes[b]; ++c) block[v++] = static_cast<int>(b);
  HypergraphBuilder b(n, 1);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j)
        b.add(i, {j},
              block_weights[static_cast<std::size_t>(block[static_cast<std::size_t>(i)])]
                           [static_cast<std::size_t>(block[static_cast<std::size_t>(j)])]);
  return std::move(b).build(Convention::Explicit);
}

WeightedHypergraph erdos_renyi(int n, double p, Convention convention, std::uint64_t seed) {
  if (n < 2 || !(p >= 0.0 && p <= 1.0)) throw ParameterError("er needs n >= 2 and p in [0, 1]");
  std::mt19937_64 rng(seed);
  std::vector<std::vector<int>> adj(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (uniform01(rng) < p) {
        adj[static_cast<std::size_t>(i)].push_back(j);
        adj[static_cast<std::size_t>(j)].push_back(i);
      }
  for (auto& row : adj) std::sort(row.begin(), row.end());
  return normalize_simple(n, adj, convention);
}

WeightedHypergraph stochastic_block(const std::vector<int>& sizes,
                                    const std::vector<std::vector<double>>& probs,
                                    Convention convention, std::uint64_t seed) {
  const std::size_t k = sizes.size();
  if (k == 0 || probs.size() != k) throw ParameterError("sbm needs K sizes and a K x K matrix");
  std::vector<int> block;
  for (std::size_t b = 0; b < k; ++b) {
    if (sizes[b] <= 0) throw ParameterError("block sizes must be positive");
    if (probs[b].size() != k) throw ParameterError("sbm probability matrix must be K x K");
    for (double p : probs[b])
      if (!(p >= 0.0 && p <= 1.0)) throw ParameterError("sbm probabilities must lie in [0, 1]");
    block.insert(block.end(), static_cast<std::size_t>(sizes[b]), static_cast<int>(b));
  }
  const int n = static_cast<int>(block.size());
  std::mt19937_64 rng(seed);
  std::vector<std::vector<int>> adj(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const double p = probs[static_cast<std::size_t>(block[static_cast<std::size_t>(i)])]
                            [static_cast<std::size_t>(block[static_cast<std::size_t>(j)])];
      if (uniform01(rng) < p) {
        adj[static_cast<std::size_t>(i)].push_back(j);
        adj[static_cast<std::size_t>(j)].push_back(i);
      }
    }
  for (auto& row : adj) std::sort(row.begin(), row.end());
  return normalize_simple(n, adj, convention);
}

WeightedHypergraph random_uniform_hypergraph(int n, int m, int n_edges, Convention convention,
                                             std::uint64_t seed) {
  if (m < 1 || n < m + 1 || n_edges < 0)
    throw ParameterError("uniform hypergraph needs n >= m + 1 and n_edges >= 0");
  double possible = 1.0;
  for (int r = 0; r <= m; ++r) possible = possible * (n - r) / (r + 1);
  if (n_edges > possible) throw ParameterError("more hyperedges requested than exist");
  std::mt19937_64 rng(seed);
  std::set<std::vector<int>> chosen;
  RawHypergraph raw(n, m);
  while (static_cast<int>(chosen.size()) < n_edges) {
    std::vector<int> members;
    while (static_cast<int>(members.size()) < m + 1) {
      const int v = static_cast<int>(rng() % static_cast<std::uint64_t>(n));
      if (std::find(members.begin(), members.end(), v) == members.end()) members.push_back(v);
    }
    std::sort(members.begin(), members.end());
    if (chosen.insert(members).second) raw.add_undirected(members);
  }
  return normalize(raw, convention);
}

// ---------------------------------------------------------------------------

std::vector<double> parse_number_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item.erase(0, item.find_first_not_of(" \t"));
    item.erase(item.find_last_not_of(" \t") + 1);
    if (item.empty()) continue;
    std::size_t repeat = 1;
    const auto x = item.find('x');
    std::string value = item;
    try {
      if (x != std::string::npos) {
        value = item.substr(0, x);
        repeat = std::stoul(item.substr(x + 1));
      }
      std::size_t used = 0;
      const double v = std::stod(value, &used);
      if (used != value.size()) throw std::invalid_argument(value);
      out.insert(out.end(), repeat, v);
    } catch (const std::exception&) {
      throw ParameterError("cannot parse list item '" + item + "'");
    }
  }
  return out;
}

namespace {

class ParamReader {
 public:
  ParamReader(const std::string& family, const GeneratorParams& p) : family_(family), p_(p) {}

  const std::string* find(const std::string& key) {
    used_.insert(key);
    auto it = p_.find(key);
    return it == p_.end() ? nullptr : &it->second;
  }
  std::string text(const std::string& key, const std::string& fallback) {
    const auto* v = find(key);
    return v ? *v : fallback;
  }
  double number(const std::string& key) {
    const auto* v = find(key);
    if (!v) throw ParameterError(family_ + ": missing parameter '" + key + "'");
    const auto list = parse_number_list(*v);
    if (list.size() != 1) throw ParameterError(family_ + ": '" + key + "' must be a single number");
    return list[0];
  }
  double number(const std::string& key, double fallback) {
    return find(key) ? number(key) : fallback;
  }
  int integer(const std::string& key) {
    const double v = number(key);
    if (v != std::floor(v)) throw ParameterError(family_ + ": '" + key + "' must be an integer");
    return static_cast<int>(v);
  }
  std::vector<double> list(const std::string& key) {
    const auto* v = find(key);
    if (!v) throw ParameterError(family_ + ": missing parameter '" + key + "'");
    return parse_number_list(*v);
  }
  std::vector<int> int_list(const std::string& key) {
    std::vector<int> out;
    for (double v : list(key)) out.push_back(static_cast<int>(v));
    return out;
  }
  std::vector<std::vector<double>> matrix(const std::string& key, std::size_t k) {
    const auto flat = list(key);
    if (flat.size() != k * k)
      throw ParameterError(family_ + ": '" + key + "' needs " + std::to_string(k * k) + " entries");
    std::vector<std::vector<double>> out(k, std::vector<double>(k));
    for (std::size_t a = 0; a < k; ++a)
      for (std::size_t c = 0; c < k; ++c) out[a][c] = flat[a * k + c];
    return out;
  }
  /// degrees / activities: key "<base>" for order 1, "<base>2", "<base>3", ... for higher orders
  std::vector<std::vector<double>> per_order(const std::string& base) {
    std::vector<std::vector<double>> out{list(base)};
    for (int m = 2;; ++m) {
      const std::string key = base + std::to_string(m);
      if (!find(key)) break;
      out.push_back(list(key));
    }
    return out;
  }
  Convention convention() { return parse_convention(text("convention", "1")); }
  void finish() {
    for (const auto& [k, v] : p_)
      if (!used_.count(k)) throw ParameterError(family_ + ": unknown parameter '" + k + "'");
  }

 private:
  std::string family_;
  const GeneratorParams& p_;
  std::set<std::string> used_;
};

}  // namespace

WeightedHypergraph generate(const std::string& family, const GeneratorParams& params,
                            std::uint64_t seed) {
  ParamReader r(family, params);
  WeightedHypergraph h;
  if (family == "complete") {
    h = complete_graph(r.integer("n"), r.convention());
  } else if (family == "ring") {
    h = ring_graph(r.integer("n"), r.integer("k"), r.convention());
  } else if (family == "star") {
    h = star_graph(r.integer("leaves"), r.convention());
  } else if (family == "path") {
    h = path_graph(r.integer("n"), r.convention());
  } else if (family == "hmfa") {
    h = hmfa_hypergraph(r.integer("n"), static_cast<int>(r.number("order", 1)));
  } else if (family == "annealed") {
    const auto degrees = r.per_order("degrees");
    const bool self_pairs = r.text("self_pairs", "false") == "true";
    h = annealed_configuration(degrees, r.convention(), self_pairs);
  } else if (family == "activity") {
    h = activity_driven(r.per_order("activity"));
  } else if (family == "block") {
    const auto sizes = r.int_list("sizes");
    h = block_graph(r.integer("n"), sizes, r.matrix("weights", sizes.size()));
  } else if (family == "er") {
    h = erdos_renyi(r.integer("n"), r.number("p"), r.convention(), seed);
  } else if (family == "sbm") {
    const auto sizes = r.int_list("sizes");
    h = stochastic_block(sizes, r.matrix("probs", sizes.size()), r.convention(), seed);
  } else if (family == "uniform_hypergraph") {
    h = random_uniform_hypergraph(r.integer("n"), r.integer("order"), r.integer("edges"),
                                  r.convention(), seed);
  } else {
    throw ParameterError("unknown network family '" + family + "'");
  }
  r.finish();
  return h;
}

}  // namespace nimfa
