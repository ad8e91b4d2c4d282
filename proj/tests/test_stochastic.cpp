#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "nimfa/errors.hpp"
#include "nimfa/generators.hpp"
#include "nimfa/meanfield.hpp"
#include "nimfa/stochastic.hpp"
#include "nimfa/util.hpp"

using namespace nimfa;

namespace {

WeightedHypergraph isolated(int n) { return HypergraphBuilder(n, 1).build(Convention::Explicit); }

std::vector<double> product_distribution(std::span<const double> z, int n, int S) {
  std::vector<double> p(static_cast<std::size_t>(std::pow(S, n)), 1.0);
  for (std::size_t x = 0; x < p.size(); ++x) {
    std::size_t rest = x;
    for (int i = n - 1; i >= 0; --i) {
      p[x] *= z[static_cast<std::size_t>(i * S) + rest % static_cast<std::size_t>(S)];
      rest /= static_cast<std::size_t>(S);
    }
  }
  return p;
}

// exp(A) by scaling and squaring with a Taylor core
std::vector<double> expm(std::vector<double> a, int n) {
  double norm = 0.0;
  for (double v : a) norm = std::max(norm, std::abs(v));
  int squarings = 0;
  while (norm * n > 0.5) {
    norm /= 2;
    ++squarings;
  }
  for (double& v : a) v /= std::pow(2.0, squarings);
  auto mul = [n](const std::vector<double>& x, const std::vector<double>& y) {
    std::vector<double> r(x.size(), 0.0);
    for (int i = 0; i < n; ++i)
      for (int k = 0; k < n; ++k)
        for (int j = 0; j < n; ++j) r[i * n + j] += x[i * n + k] * y[k * n + j];
    return r;
  };
  std::vector<double> result(a.size(), 0.0), term(a.size(), 0.0);
  for (int i = 0; i < n; ++i) result[i * n + i] = term[i * n + i] = 1.0;
  for (int k = 1; k < 30; ++k) {
    term = mul(term, a);
    for (double& v : term) v /= k;
    for (std::size_t q = 0; q < result.size(); ++q) result[q] += term[q];
  }
  for (int s = 0; s < squarings; ++s) result = mul(result, result);
  return result;
}

}  // namespace

TEST_CASE("pure curing decays like independent exponentials") {
  const auto h = ring_graph(10, 1, Convention::One);
  Simulator sim(h, sis_model({0.0}, 1.0));
  InitialCondition init{std::vector<int>(10, 1), {}};
  const std::vector<double> grid{0.0, 1.0};
  const auto est = estimate_marginals(sim, init, grid, 10000, 42, 2);
  CHECK(est.prevalence(0, 1) == doctest::Approx(1.0).epsilon(1e-12));
  const double p = std::exp(-1.0);
  CHECK(std::abs(est.prevalence(1, 1) - p) <= 3 * est.prevalence_stderr(1, 1));
  CHECK(est.prevalence_stderr(1, 1) == doctest::Approx(std::sqrt(p * (1 - p) / 1e5)).epsilon(0.1));
}

TEST_CASE("voter consensus is absorbing") {
  const auto h = erdos_renyi(30, 0.2, Convention::Two, 8);
  const auto traj = simulate(h, voter_model(1.0), {std::vector<int>(30, 0), 0.0}, 50.0, 3);
  CHECK(traj.events.empty());
}

TEST_CASE("event logs are valid and seed-deterministic") {
  const auto h = ring_graph(50, 2, Convention::One);
  const auto model = sis_model({2.0}, 1.0);
  PopulationState init{std::vector<int>(50, 1), 0.0};
  const auto a = simulate(h, model, init, 5.0, 11);
  const auto b = simulate(h, model, init, 5.0, 11);
  const auto c = simulate(h, model, init, 5.0, 12);
  CHECK(a.events == b.events);
  CHECK(a.events != c.events);
  REQUIRE(!a.events.empty());
  std::vector<int> state = init.state;
  double last = 0.0;
  for (const Event& e : a.events) {
    CHECK(e.time > last);
    CHECK(e.time <= 5.0);
    CHECK(state[static_cast<std::size_t>(e.vertex)] == e.from);
    CHECK(e.from != e.to);
    state[static_cast<std::size_t>(e.vertex)] = e.to;
    last = e.time;
  }
  CHECK(a.states_at(5.0) == state);
  CHECK(a.states_at(0.0) == init.state);
}

TEST_CASE("coupling with interaction-free rates never disagrees") {
  const auto h = ring_graph(40, 3, Convention::One);
  const auto model = sis_model({0.0}, 1.0);
  const std::vector<double> z0 = [] {
    std::vector<double> z;
    for (int i = 0; i < 40; ++i) z.insert(z.end(), {0.3, 0.7});
    return z;
  }();
  const auto sol = nimfa_solve(h, *model, z0, 3.0);
  Simulator sim(h, model);
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    Rng rng(seed);
    PopulationState init{sample_initial(z0, 2, rng), 0.0};
    const auto run = sim.simulate_coupled(init, sol, 3.0, rng);
    for (double d : run.disagreement) CHECK(d == kNever);
    CHECK(run.xi.events == run.xihat.events);
  }
}

TEST_CASE("coupled logs agree before the first disagreement") {
  const auto h = ring_graph(30, 2, Convention::One);
  const auto model = sis_model({2.0}, 1.0);
  std::vector<double> z0;
  for (int i = 0; i < 30; ++i) z0.insert(z0.end(), {0.5, 0.5});
  const auto sol = nimfa_solve(h, *model, z0, 2.0);
  Simulator sim(h, model);
  int disagreeing_runs = 0;
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const auto run = sim.simulate_coupled({std::vector<int>(30, 1), 0.0}, sol, 2.0, seed);
    double first = kNever;
    for (double d : run.disagreement) first = std::min(first, d);
    std::size_t before = 0, before_hat = 0;
    for (const Event& e : run.xi.events) before += e.time < first;
    for (const Event& e : run.xihat.events) before_hat += e.time < first;
    CHECK(before == before_hat);
    CHECK(run.common_prefix() >= before);
    for (std::size_t k = 0; k < before; ++k) CHECK(run.xi.events[k] == run.xihat.events[k]);
    // disagreement[i] is when the two state sequences of i first differ
    for (int i = 0; i < 30; ++i) {
      const double d = run.disagreement[static_cast<std::size_t>(i)];
      if (d == kNever) {
        CHECK(run.xi.states_at(2.0)[static_cast<std::size_t>(i)] ==
              run.xihat.states_at(2.0)[static_cast<std::size_t>(i)]);
        continue;
      }
      CHECK(run.xi.states_at(d)[static_cast<std::size_t>(i)] !=
            run.xihat.states_at(d)[static_cast<std::size_t>(i)]);
    }
    disagreeing_runs += first < kNever;
  }
  CHECK(disagreeing_runs > 0);
}

TEST_CASE("coupled run input checks") {
  const auto h = ring_graph(6, 1, Convention::One);
  const auto model = sis_model({2.0}, 1.0);
  std::vector<double> z0(12, 0.5);
  const auto sol = nimfa_solve(h, *model, z0, 1.0);
  Simulator sim(h, model);
  CHECK_THROWS_AS(sim.simulate_coupled({std::vector<int>(6, 1), 0.0}, sol, 2.0, 1), InputError);
  const auto other = ring_graph(6, 2, Convention::One);
  Simulator sim2(other, model);
  CHECK_THROWS_AS(sim2.simulate_coupled({std::vector<int>(6, 1), 0.0}, sol, 1.0, 1), InputError);
}

TEST_CASE("master equation with one vertex is the matrix exponential") {
  AffineForm form(3);
  form.q0(0, 1) = 0.7;
  form.q0(1, 2) = 0.4;
  form.q0(2, 0) = 0.9;
  form.q0(1, 0) = 0.2;
  const auto model = affine_model(form, 1);
  const auto h = isolated(1);
  const std::vector<double> p0{0.2, 0.5, 0.3}, grid{0.0, 0.5, 1.0, 2.0};
  const auto sol = master_solve(h, *model, p0, grid);
  // forward equation p' = p A with A[f][t] = rate(f -> t)
  std::vector<double> a(9, 0.0);
  for (int f = 0; f < 3; ++f)
    for (int t = 0; t < 3; ++t)
      if (f != t) {
        a[f * 3 + t] = form.constant[form.channel(f, t)];
        a[f * 3 + f] -= a[f * 3 + t];
      }
  for (std::size_t g = 0; g < grid.size(); ++g) {
    std::vector<double> at = a;
    for (double& v : at) v *= grid[g];
    const auto e = expm(at, 3);
    for (int s = 0; s < 3; ++s) {
      double expect = 0.0;
      for (int f = 0; f < 3; ++f) expect += p0[static_cast<std::size_t>(f)] * e[f * 3 + s];
      CHECK(std::abs(sol.marginal(g, 0, s) - expect) < 1e-8);
    }
    CHECK(std::abs(sol.total(g) - 1.0) < 1e-9);
  }
}

TEST_CASE("master equation agrees with Monte Carlo on two vertices") {
  const auto h = complete_graph(2, Convention::One);
  const auto model = sis_model({2.0}, 1.0);
  const std::vector<double> grid{0.25, 0.5, 1.0, 2.0};
  const std::vector<int> all_infected{1, 1};
  std::vector<double> p0(4, 0.0);
  p0[product_index(all_infected, 2)] = 1.0;
  const auto exact = master_solve(h, *model, p0, grid);
  Simulator sim(h, model);
  const auto est = estimate_marginals(sim, {all_infected, {}}, grid, 100000, 5, 0);
  for (std::size_t g = 0; g < grid.size(); ++g)
    for (int i = 0; i < 2; ++i)
      CHECK(std::abs(est.mean(g, i, 1) - exact.marginal(g, i, 1)) <= 3 * est.stderr_of(g, i, 1));
}

TEST_CASE("voter on a path absorbs according to the degree-weighted magnetization") {
  // stationary left vector of the convention-2 path weights is proportional to degree
  const auto h = path_graph(3, Convention::Two);
  const auto model = voter_model(1.0);
  const std::vector<double> grid{60.0};
  const std::vector<std::vector<int>> starts{{1, 0, 0}, {0, 1, 0}, {1, 1, 0}, {0, 1, 1}};
  const double pi[] = {0.25, 0.5, 0.25};
  for (const auto& start : starts) {
    std::vector<double> p0(8, 0.0);
    p0[product_index(start, 2)] = 1.0;
    const auto sol = master_solve(h, *model, p0, grid);
    double magnet = 0.0;
    for (int i = 0; i < 3; ++i) magnet += pi[i] * start[static_cast<std::size_t>(i)];
    const std::vector<int> ones{1, 1, 1}, zeros{0, 0, 0};
    CHECK(std::abs(sol.distribution[0][product_index(ones, 2)] - magnet) < 1e-8);
    CHECK(std::abs(sol.distribution[0][product_index(zeros, 2)] - (1 - magnet)) < 1e-8);
  }
}

TEST_CASE("master equation capacity guard") {
  const int n = 21;
  const auto h = ring_graph(n, 1, Convention::One);
  std::vector<double> p0(1, 1.0);
  const std::vector<double> grid{1.0};
  CHECK_THROWS_AS(master_solve(h, *sis_model({1.0}, 1.0), p0, grid), CapacityError);
}

TEST_CASE("coupled disagreement probability matches the product chain") {
  // Exact chain on (xi, xihat, ever-disagreed flags) of a four-vertex ring.
  const int n = 4;
  const auto h = ring_graph(n, 1, Convention::One);
  const auto model = sis_model({3.0}, 1.0);
  std::vector<double> z0;
  for (int i = 0; i < n; ++i) z0.insert(z0.end(), {0.6 - 0.1 * i, 0.4 + 0.1 * i});
  const double T = 1.5;
  const auto nimfa = nimfa_solve(h, *model, z0, T);
  const auto& layout = model->layout();
  const std::size_t L = layout.size();

  auto bit = [n](int x, int i) { return (x >> (n - 1 - i)) & 1; };
  auto config = [&](int x) {
    std::vector<int> s(n);
    for (int i = 0; i < n; ++i) s[static_cast<std::size_t>(i)] = bit(x, i);
    return s;
  };
  // phi for every configuration and vertex
  std::vector<double> phi(16 * n * L);
  for (int x = 0; x < 16; ++x) {
    const auto s = config(x);
    for (int i = 0; i < n; ++i)
      empirical_neighborhood(h, layout, s, i, {&phi[(x * n + i) * L], L});
  }
  auto index = [](int x, int y, int f) { return static_cast<std::size_t>((x * 16 + y) * 16 + f); };
  const std::size_t dim = 16 * 16 * 16;

  auto rhs = [&](double t, std::span<const double> p, std::span<double> dp) {
    std::fill(dp.begin(), dp.end(), 0.0);
    std::vector<double> zeta(n * L);
    for (int i = 0; i < n; ++i) nimfa.zeta(i, t, {&zeta[i * L], L});
    for (int x = 0; x < 16; ++x)
      for (int y = 0; y < 16; ++y)
        for (int f = 0; f < 16; ++f) {
          const double mass = p[index(x, y, f)];
          if (mass == 0.0) continue;
          for (int i = 0; i < n; ++i) {
            const int a = bit(x, i), b = bit(y, i);
            const int flip = 1 << (n - 1 - i);
            const NeighborhoodView ph(layout, {&phi[(x * n + i) * L], L});
            const NeighborhoodView ze(layout, {&zeta[i * L], L});
            const double q = model->rate(a, 1 - a, ph), qh = model->rate(b, 1 - b, ze);
            auto move = [&](int nx, int ny, double rate) {
              if (rate <= 0.0) return;
              const int nf = f | (bit(nx, i) != bit(ny, i) ? flip : 0);
              dp[index(x, y, f)] -= rate * mass;
              dp[index(nx, ny, nf)] += rate * mass;
            };
            if (a == b) {
              move(x ^ flip, y ^ flip, std::min(q, qh));
              move(x ^ flip, y, std::max(0.0, q - qh));
              move(x, y ^ flip, std::max(0.0, qh - q));
            } else {
              move(x ^ flip, y, q);
              move(x, y ^ flip, qh);
            }
          }
        }
  };
  std::vector<double> p0(dim, 0.0);
  const auto init = product_distribution(z0, n, 2);
  for (int x = 0; x < 16; ++x) p0[index(x, x, 0)] = init[static_cast<std::size_t>(x)];
  const std::vector<double> checks{0.5, 1.0, 1.5};
  ode::Options opt;
  opt.stop_times = checks;
  const auto exact = ode::integrate(rhs, p0, 0.0, T, opt);

  const std::size_t replicas = 40000;
  Simulator sim(h, model);
  std::vector<std::vector<double>> hits(checks.size(), std::vector<double>(n, 0.0));
  for (std::size_t r = 0; r < replicas; ++r) {
    Rng rng(replica_seed(77, r));
    PopulationState st{sample_initial(z0, 2, rng), 0.0};
    const auto run = sim.simulate_coupled(st, nimfa, T, rng);
    for (std::size_t c = 0; c < checks.size(); ++c)
      for (int i = 0; i < n; ++i) hits[c][static_cast<std::size_t>(i)] += run.disagreement[static_cast<std::size_t>(i)] <= checks[c];
  }
  for (std::size_t c = 0; c < checks.size(); ++c) {
    const auto p = exact.eval(checks[c]);
    for (int i = 0; i < n; ++i) {
      double prob = 0.0;
      for (int x = 0; x < 16; ++x)
        for (int y = 0; y < 16; ++y)
          for (int f = 0; f < 16; ++f)
            if ((f >> (n - 1 - i)) & 1) prob += p[index(x, y, f)];
      const double mc = hits[c][static_cast<std::size_t>(i)] / replicas;
      const double se = std::sqrt(std::max(prob * (1 - prob), 1e-12) / replicas);
      CHECK(prob > 0.01);
      CHECK(std::abs(mc - prob) <= 3 * se);
    }
  }
}

TEST_CASE("marginal estimates do not depend on the thread count") {
  const auto h = ring_graph(12, 2, Convention::One);
  Simulator sim(h, sis_model({2.0}, 1.0));
  std::vector<double> z0;
  for (int i = 0; i < 12; ++i) z0.insert(z0.end(), {0.5, 0.5});
  InitialCondition init{{}, z0};
  const std::vector<double> grid{0.0, 0.5, 1.0};
  const auto a = estimate_marginals(sim, init, grid, 300, 9, 1);
  const auto b = estimate_marginals(sim, init, grid, 300, 9, 4);
  CHECK(a.sum == b.sum);
  CHECK(a.prevalence_sq == b.prevalence_sq);
}
