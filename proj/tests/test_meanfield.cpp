#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "nimfa/errors.hpp"
#include "nimfa/generators.hpp"
#include "nimfa/meanfield.hpp"

using namespace nimfa;

namespace {

ode::Options tight() {
  ode::Options o = meanfield_options();
  o.rtol = 1e-11;
  o.atol = 1e-13;
  return o;
}

std::vector<double> repeat_row(std::vector<double> row, int n) {
  std::vector<double> z;
  for (int i = 0; i < n; ++i) z.insert(z.end(), row.begin(), row.end());
  return z;
}

std::vector<double> random_rows(int n, int S, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.05, 1.0);
  std::vector<double> z;
  for (int i = 0; i < n; ++i) {
    std::vector<double> row(static_cast<std::size_t>(S));
    double sum = 0.0;
    for (double& x : row) sum += (x = u(rng));
    for (double& x : row) z.push_back(x / sum);
  }
  return z;
}

double l1(std::span<const double> a, std::span<const double> b) {
  double d = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) d += std::abs(a[k] - b[k]);
  return d;
}

// Scalar SIS oracle: dx/dt = -gamma x + (1 - x) * force(x)
template <typename Force>
ode::DenseSolution scalar_sis(double gamma, Force force, double x0, double t_end) {
  auto rhs = [&](double, std::span<const double> y, std::span<double> d) {
    d[0] = -gamma * y[0] + (1 - y[0]) * force(y[0]);
  };
  const std::vector<double> y0{x0};
  return ode::integrate(rhs, y0, 0.0, t_end, tight());
}

const std::vector<double> kGrid{0.0, 0.3, 1.0, 2.5, 4.0};

}  // namespace

TEST_CASE("single isolated vertex decays exponentially") {
  const auto h = HypergraphBuilder(1, 1).build(Convention::Explicit);
  const auto model = sis_model({2.0}, 1.0);
  const std::vector<double> z0{0.0, 1.0};
  // default tolerances hold at step nodes; between nodes the cubic interpolant is coarser
  ode::Options opt = meanfield_options();
  opt.stop_times = {0.5, 1.7};
  const auto sol = nimfa_solve(h, *model, z0, 5.0, opt);
  for (double t : {0.0, 0.5, 1.7, 5.0}) CHECK(std::abs(sol.z(0, 1, t) - std::exp(-t)) < 1e-8);
  const auto free = nimfa_solve(h, *model, z0, 5.0);
  for (double t : {0.5, 1.7, 3.3}) CHECK(std::abs(free.z(0, 1, t) - std::exp(-t)) < 1e-6);
}

TEST_CASE("complete graph collapses to HMFA") {
  const auto h = complete_graph(40, Convention::One);
  const auto model = sis_model({2.0}, 1.0);
  const std::vector<double> u0{0.8, 0.2};
  const auto full = nimfa_solve(h, *model, repeat_row(u0, 40), 6.0);
  const auto hm = hmfa_solve(*model, u0, 6.0);
  double worst = 0.0;
  for (double t : full.times())
    for (int i = 0; i < 40; ++i) {
      const double zi[] = {full.z(i, 0, t), full.z(i, 1, t)};
      worst = std::max(worst, l1(zi, hm.group(0, t)));
    }
  CHECK(worst <= 1e-8);
}

TEST_CASE("SIS approaches the endemic fixed point") {
  const auto h = ring_graph(20, 2, Convention::One);
  const auto sol = nimfa_solve(h, *sis_model({2.0}, 1.0), repeat_row({0.1, 0.9}, 20), 20.0);
  for (int i = 0; i < 20; ++i) CHECK(std::abs(sol.z(i, 1, 20.0) - 0.5) < 1e-4);
}

TEST_CASE("HMFA matches the simplicial SIS equation") {
  const double b1 = 1.0, b2 = 3.0, g = 1.2;
  const auto hm = hmfa_solve(*sis_model({b1, b2}, g), std::vector<double>{0.7, 0.3}, 5.0, tight());
  const auto oracle = scalar_sis(g, [&](double x) { return b1 * x + b2 * x * x; }, 0.3, 5.0);
  for (double t : kGrid) CHECK(std::abs(hm.group(0, t)[1] - oracle.eval(t, 0)) < 1e-9);

  const auto sis = sis_model({2.0}, 1.0);
  const auto dfe = hmfa_solve(*sis, std::vector<double>{1.0, 0.0}, 5.0);
  const auto eq = hmfa_solve(*sis, std::vector<double>{0.5, 0.5}, 5.0);
  for (double t : kGrid) {
    CHECK(dfe.group(0, t)[1] == 0.0);
    CHECK(std::abs(eq.group(0, t)[1] - 0.5) < 1e-14);
  }
}

TEST_CASE("metapopulation on block-constant weights") {
  const std::vector<int> sizes{10, 15, 5};
  const std::vector<std::vector<double>> W{{0.05, 0.01, 0.02}, {0.01, 0.04, 0.0}, {0.03, 0.02, 0.1}};
  const auto h = block_graph(30, sizes, W);
  std::vector<int> group_of;
  for (int k = 0; k < 3; ++k) group_of.insert(group_of.end(), sizes[k], k);
  std::vector<double> z0;
  const double rows[3][2] = {{0.9, 0.1}, {0.6, 0.4}, {0.2, 0.8}};
  for (int i = 0; i < 30; ++i) z0.insert(z0.end(), {rows[group_of[i]][0], rows[group_of[i]][1]});
  const auto model = sis_model({4.0}, 1.0);
  const auto red = metapop_reduce(h, group_of, z0, 2);
  const auto reduced = metapop_solve(red, *model, 4.0, tight());
  const auto full = nimfa_solve(h, *model, z0, 4.0, tight());
  for (double t : kGrid) {
    const auto avg = group_averages(full, group_of, 3, t);
    for (std::size_t k = 0; k < 3; ++k)
      CHECK(l1(std::span(avg).subspan(k * 2, 2), reduced.group(k, t)) <= 1e-10);
  }
}

TEST_CASE("metapopulation weights by brute force") {
  const double a = 0.3, b = 0.07;
  const int n = 8;
  const auto h = block_graph(n, {4, 4}, {{a, b}, {b, a}});
  const std::vector<int> group_of{0, 0, 0, 0, 1, 1, 1, 1};
  const auto red = metapop_reduce(h, group_of, repeat_row({0.5, 0.5}, n), 2);
  for (int k = 0; k < 2; ++k)
    for (int l = 0; l < 2; ++l) {
      double total = 0.0;
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          const int tail[] = {j};
          if (group_of[i] == k && group_of[j] == l) total += h.weight(i, tail);
        }
      const int tail[] = {l};
      CHECK(red.reduced.weight(k, tail) == doctest::Approx(total / 4).epsilon(1e-14));
    }
  const int same[] = {0}, other[] = {1};
  CHECK(red.reduced.weight(0, same) == doctest::Approx(3 * a));
  CHECK(red.reduced.weight(0, other) == doctest::Approx(4 * b));
  CHECK(red.group_sizes == std::vector<double>{4.0, 4.0});
}

TEST_CASE("single group on a regular convention 2 graph is HMFA") {
  const auto h = ring_graph(25, 3, Convention::Two);
  const std::vector<int> group_of(25, 0);
  const auto model = sis_model({1.5}, 1.0);
  const auto z0 = random_rows(25, 2, 4);
  const auto red = metapop_reduce(h, group_of, z0, 2);
  const int loop[] = {0};
  CHECK(red.reduced.weight(0, loop) == doctest::Approx(1.0));
  const auto reduced = metapop_solve(red, *model, 4.0, tight());
  const auto hm = hmfa_solve(*model, red.z0, 4.0, tight());
  for (double t : kGrid) CHECK(l1(reduced.group(0, t), hm.group(0, t)) <= 1e-10);
}

TEST_CASE("trivial partition reproduces NIMFA") {
  const auto h = erdos_renyi(30, 0.2, Convention::Two, 21);
  std::vector<int> group_of(30);
  for (int i = 0; i < 30; ++i) group_of[static_cast<std::size_t>(i)] = i;
  const auto model = sis_model({2.0}, 1.0);
  const auto z0 = random_rows(30, 2, 5);
  const auto reduced = metapop_solve(metapop_reduce(h, group_of, z0, 2), *model, 4.0, tight());
  const auto full = nimfa_solve(h, *model, z0, 4.0, tight());
  for (double t : kGrid)
    for (int i = 0; i < 30; ++i) {
      const double zi[] = {full.z(i, 0, t), full.z(i, 1, t)};
      CHECK(l1(zi, reduced.group(static_cast<std::size_t>(i), t)) <= 1e-10);
    }
  CHECK_THROWS_AS(metapop_reduce(h, std::vector<int>(30, 1), z0, 2), ParameterError);
}

TEST_CASE("IMFA with constant degree is HMFA") {
  const auto model = sis_model({2.0}, 1.0);
  const std::vector<double> u0{0.6, 0.4};
  for (Convention c : {Convention::One, Convention::Two}) {
    const auto imfa = imfa_solve({std::vector<double>(50, 6.0)}, *model, c, u0, 5.0, tight());
    const auto hm = hmfa_solve(*model, u0, 5.0, tight());
    REQUIRE(imfa.n_groups() == 1);
    for (double t : kGrid) CHECK(l1(imfa.group(0, t), hm.group(0, t)) <= 1e-10);
  }
}

TEST_CASE("IMFA two-class example") {
  // degrees {2, 4} in equal proportion: dbar = 3, size-biased weights 1/3 and 2/3
  std::vector<double> deg;
  for (int i = 0; i < 20; ++i) deg.push_back(i % 2 ? 4.0 : 2.0);
  const auto dc = degree_classes({deg});
  REQUIRE(dc.sizes.size() == 2);
  CHECK(dc.degrees[0][0] == 2.0);
  const double beta = 2.0, gamma = 1.0;
  const std::vector<double> z0{0.9, 0.1, 0.7, 0.3};
  const auto imfa = imfa_solve({deg}, *sis_model({beta}, gamma), Convention::One, z0, 4.0, tight());
  auto rhs = [&](double, std::span<const double> y, std::span<double> d) {
    const double theta = y[0] / 3 + 2 * y[1] / 3;
    d[0] = -gamma * y[0] + beta * (1 - y[0]) * (2.0 / 3) * theta;
    d[1] = -gamma * y[1] + beta * (1 - y[1]) * (4.0 / 3) * theta;
  };
  const std::vector<double> y0{0.1, 0.3};
  const auto oracle = ode::integrate(rhs, y0, 0.0, 4.0, tight());
  for (double t : kGrid) {
    CHECK(std::abs(imfa.group(0, t)[1] - oracle.eval(t, 0)) < 1e-9);
    CHECK(std::abs(imfa.group(1, t)[1] - oracle.eval(t, 1)) < 1e-9);
  }
}

TEST_CASE("IMFA equals metapopulation NIMFA on the annealed graph") {
  std::mt19937_64 rng(31);
  const int n = 40;
  std::vector<std::vector<double>> degrees(2, std::vector<double>(n));
  for (int i = 0; i < n; ++i) {
    degrees[0][static_cast<std::size_t>(i)] = 1.0 + static_cast<double>(rng() % 4);
    degrees[1][static_cast<std::size_t>(i)] = static_cast<double>(rng() % 3);
  }
  const auto model = sis_model({1.0, 2.5}, 1.0);
  for (Convention c : {Convention::One, Convention::Two}) {
    const auto dc = degree_classes(degrees);
    const auto z0c = random_rows(static_cast<int>(dc.sizes.size()), 2, 8);
    std::vector<double> z0;
    for (int cl : dc.class_of) z0.insert(z0.end(), z0c.begin() + 2 * cl, z0c.begin() + 2 * cl + 2);
    const auto h = annealed_configuration(degrees, c, true);
    const auto red = metapop_reduce(h, dc.class_of, z0, 2);
    const auto meta = metapop_solve(red, *model, 4.0, tight());
    const auto imfa = imfa_solve(degrees, *model, c, z0c, 4.0, tight());
    for (double t : kGrid)
      for (std::size_t k = 0; k < dc.sizes.size(); ++k)
        CHECK(l1(meta.group(k, t), imfa.group(k, t)) <= 1e-9);
  }
}

TEST_CASE("activity-driven with equal activities") {
  const double a = 0.4, beta = 3.0, gamma = 1.0;
  const std::vector<double> sizes{100.0};
  const auto act = activity_solve({{a}}, sizes, *sis_model({beta}, gamma),
                                  std::vector<double>{0.8, 0.2}, 5.0, tight());
  const auto oracle = scalar_sis(gamma, [&](double x) { return beta * 2 * a * x; }, 0.2, 5.0);
  for (double t : kGrid) CHECK(std::abs(act.group(0, t)[1] - oracle.eval(t, 0)) < 1e-9);
}

TEST_CASE("activity-driven classes equal NIMFA on explicit weights") {
  const int n = 200;
  const std::vector<double> class_a{0.2, 0.9}, class_b{0.1, 0.05};
  std::vector<std::vector<double>> per_vertex(2, std::vector<double>(n));
  std::vector<int> class_of(n);
  for (int i = 0; i < n; ++i) {
    const int c = i < 120 ? 0 : 1;
    class_of[static_cast<std::size_t>(i)] = c;
    per_vertex[0][static_cast<std::size_t>(i)] = class_a[static_cast<std::size_t>(c)];
    per_vertex[1][static_cast<std::size_t>(i)] = class_b[static_cast<std::size_t>(c)];
  }
  SUBCASE("pairwise") {
    const auto h = activity_driven({per_vertex[0]});
    const auto model = sis_model({2.0}, 1.0);
    const std::vector<double> z0c{0.7, 0.3, 0.95, 0.05};
    std::vector<double> z0;
    for (int c : class_of) z0.insert(z0.end(), z0c.begin() + 2 * c, z0c.begin() + 2 * c + 2);
    const auto full = nimfa_solve(h, *model, z0, 4.0, tight());
    const std::vector<double> sizes{120.0, 80.0};
    const auto act = activity_solve({class_a}, sizes, *model, z0c, 4.0, tight());
    for (double t : kGrid) {
      const auto avg = group_averages(full, class_of, 2, t);
      for (std::size_t k = 0; k < 2; ++k)
        CHECK(l1(std::span(avg).subspan(k * 2, 2), act.group(k, t)) <= 1e-9);
    }
  }
  SUBCASE("with triangles") {
    const int m = 60;
    std::vector<std::vector<double>> small(2, std::vector<double>(m));
    std::vector<int> cls(m);
    for (int i = 0; i < m; ++i) {
      cls[static_cast<std::size_t>(i)] = i < 36 ? 0 : 1;
      for (int o = 0; o < 2; ++o)
        small[static_cast<std::size_t>(o)][static_cast<std::size_t>(i)] =
            (o ? class_b : class_a)[static_cast<std::size_t>(cls[static_cast<std::size_t>(i)])];
    }
    const auto h = activity_driven(small);
    const auto model = sis_model({1.0, 4.0}, 1.0);
    const std::vector<double> z0c{0.5, 0.5, 0.8, 0.2};
    std::vector<double> z0;
    for (int c : cls) z0.insert(z0.end(), z0c.begin() + 2 * c, z0c.begin() + 2 * c + 2);
    const auto full = nimfa_solve(h, *model, z0, 4.0, tight());
    const std::vector<double> sizes{36.0, 24.0};
    const auto act = activity_solve({class_a, class_b}, sizes, *model, z0c, 4.0, tight());
    for (double t : kGrid) {
      const auto avg = group_averages(full, cls, 2, t);
      for (std::size_t k = 0; k < 2; ++k)
        CHECK(l1(std::span(avg).subspan(k * 2, 2), act.group(k, t)) <= 1e-9);
    }
  }
}

TEST_CASE("partition reduction on the complete graph") {
  const int n = 500, K = 10;
  const auto h = complete_graph(n, Convention::One);
  std::vector<int> block(n);
  for (int i = 0; i < n; ++i) block[static_cast<std::size_t>(i)] = 1 + i / (n / K);
  const auto model = sis_model({2.0}, 1.0);
  const auto z0 = random_rows(n, 2, 12);
  const auto part = partition_reduce(h, PartitionSpec::from_blocks(block), *model, z0, 5.0);
  CHECK(part.kappa == doctest::Approx(0.1));
  CHECK(part.p == doctest::Approx(499.0 / 500));
  const auto full = nimfa_solve(h, *model, z0, 5.0);
  double worst = 0.0;
  for (double t = 0.0; t <= 5.0; t += 0.25) worst = std::max(worst, l1(full.mean(t), part.vbar(t)));
  CHECK(worst <= 0.02);
}

TEST_CASE("partition reduction on a two-community graph") {
  const auto h = stochastic_block({250, 250}, {{0.6, 0.1}, {0.1, 0.5}}, Convention::One, 3);
  std::vector<int> block(500);
  for (int i = 0; i < 500; ++i) block[static_cast<std::size_t>(i)] = i < 250 ? 1 : 2;
  const auto model = sis_model({1.5}, 1.0);
  const auto z0 = random_rows(500, 2, 13);
  const auto part = partition_reduce(h, PartitionSpec::from_blocks(block), *model, z0, 5.0);
  const auto full = nimfa_solve(h, *model, z0, 5.0);
  std::vector<int> group(500);
  for (int i = 0; i < 500; ++i) group[static_cast<std::size_t>(i)] = block[static_cast<std::size_t>(i)] - 1;
  for (double t = 0.0; t <= 5.0; t += 0.5) {
    const auto avg = group_averages(full, group, 2, t);
    for (std::size_t k = 0; k < 2; ++k)
      CHECK(l1(std::span(avg).subspan(k * 2, 2), part.solution.group(k, t)) <= 0.05);
  }
}

TEST_CASE("single-vertex blocks reproduce NIMFA") {
  const auto h = erdos_renyi(40, 0.3, Convention::One, 14);
  std::vector<int> block(40);
  for (int i = 0; i < 40; ++i) block[static_cast<std::size_t>(i)] = i + 1;
  const auto model = sis_model({2.0}, 1.0);
  const auto z0 = random_rows(40, 2, 15);
  const auto part = partition_reduce(h, PartitionSpec::from_blocks(block), *model, z0, 4.0, tight());
  const auto full = nimfa_solve(h, *model, z0, 4.0, tight());
  for (double t : kGrid)
    for (int i = 0; i < 40; ++i) {
      const double zi[] = {full.z(i, 0, t), full.z(i, 1, t)};
      CHECK(l1(zi, part.solution.group(static_cast<std::size_t>(i), t)) <= 1e-10);
    }
}

TEST_CASE("partition reduction preconditions") {
  const auto h = complete_graph(12, Convention::One);
  const auto z0 = random_rows(12, 2, 1);
  std::vector<int> uneven(12, 1);
  for (int i = 0; i < 5; ++i) uneven[static_cast<std::size_t>(i)] = 2;
  CHECK_THROWS_AS(partition_reduce(h, PartitionSpec::from_blocks(uneven), *sis_model({1.0}, 1.0), z0, 1.0),
                  ParameterError);
  std::vector<int> even(12);
  for (int i = 0; i < 12; ++i) even[static_cast<std::size_t>(i)] = 1 + i % 2;
  CHECK_THROWS_AS(partition_reduce(h, PartitionSpec::from_blocks(even),
                                   *glauber_model({1.0}, {1.0}, 1.0), z0, 1.0),
                  UnsupportedError);
}

TEST_CASE("solutions stay on the simplex") {
  const auto g = erdos_renyi(50, 0.1, Convention::Two, 2);
  const auto hyper = random_uniform_hypergraph(50, 2, 200, Convention::Two, 3);
  const std::vector<ModelPtr> models{sis_model({2.0, 3.0}, 1.0), glauber_model({1.0, 0.5}, {1.0, 0.5}, 1.0),
                                     voter_model(1.0), majority_model(2)};
  for (const auto& model : models)
    for (const WeightedHypergraph* h : {&g, &hyper}) {
      if (h->max_order() > model->max_order()) continue;
      const auto sol = nimfa_solve(*h, *model, random_rows(50, 2, 6), 10.0);
      CHECK(sol.max_simplex_defect() <= 1e-8);
      CHECK(sol.min_component() >= -1e-8);
    }
  CHECK_THROWS_AS(nimfa_solve(g, *voter_model(1.0), repeat_row({0.6, 0.6}, 50), 1.0), ParameterError);
}

TEST_CASE("identical starts on convention 2 hypergraphs follow HMFA") {
  const auto h = random_uniform_hypergraph(30, 2, 400, Convention::Two, 9);
  const auto rep = degree_report(h);
  for (double d : rep.degree[1]) REQUIRE(d > 0);
  const auto model = sis_model({0.0, 3.0}, 1.0);
  const std::vector<double> u0{0.4, 0.6};
  const auto full = nimfa_solve(h, *model, repeat_row(u0, 30), 5.0, tight());
  const auto hm = hmfa_solve(*model, u0, 5.0, tight());
  double worst = 0.0;
  for (double t : full.times())
    for (int i = 0; i < 30; ++i) {
      const double zi[] = {full.z(i, 0, t), full.z(i, 1, t)};
      worst = std::max(worst, l1(zi, hm.group(0, t)));
    }
  CHECK(worst <= 1e-8);
}

TEST_CASE("halving the step shrinks the endpoint error at fourth order") {
  const auto h = ring_graph(30, 2, Convention::One);
  const auto model = sis_model({2.0}, 1.0);
  const auto z0 = random_rows(30, 2, 10);
  const auto ref = nimfa_solve(h, *model, z0, 2.0, tight()).state(2.0);
  auto err = [&](double step) {
    ode::Options o = meanfield_options();
    o.adaptive = false;
    o.h_max = step;
    return l1(nimfa_solve(h, *model, z0, 2.0, o).state(2.0), ref);
  };
  const double e1 = err(0.2), e2 = err(0.1);
  CHECK(e1 / e2 >= 8.0);
}

TEST_CASE("zeta interpolation matches the defining sum") {
  const auto h = random_uniform_hypergraph(20, 2, 60, Convention::One, 4);
  const auto model = sis_model({1.0, 2.0}, 1.0);
  const auto sol = nimfa_solve(h, *model, random_rows(20, 2, 3), 2.0);
  const auto& layout = model->layout();
  std::vector<double> zeta(layout.size());
  for (double t : {0.0, 0.77, 2.0}) {
    const auto z = sol.state(t);
    for (int i = 0; i < 20; ++i) {
      sol.zeta(i, t, zeta);
      for (int m = 1; m <= 2; ++m) {
        const auto& o = h.order(m);
        for (std::size_t tup = 0; tup < layout.tuple_count(m); ++tup) {
          const auto st = layout.tuple_states(m, tup);
          double direct = 0.0;
          for (std::size_t e = o.begin(i); e < o.end(i); ++e) {
            double p = o.weights[e];
            const auto tail = o.tail(e);
            for (int r = 0; r < m; ++r)
              p *= z[static_cast<std::size_t>(tail[static_cast<std::size_t>(r)] * 2 + st[static_cast<std::size_t>(r)])];
            direct += p;
          }
          CHECK(std::abs(zeta[layout.offset(m) + tup] - direct) < 1e-6);
        }
      }
    }
  }
}
