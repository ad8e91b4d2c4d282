#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "nimfa/analysis.hpp"
#include "nimfa/errors.hpp"
#include "nimfa/generators.hpp"
#include "nimfa/util.hpp"

using namespace nimfa;

namespace {

std::vector<double> half_rows(int n) {
  std::vector<double> z;
  for (int i = 0; i < n; ++i) z.insert(z.end(), {0.5, 0.5});
  return z;
}

std::vector<CoupledRun> coupled_runs(const WeightedHypergraph& h, const ModelPtr& model,
                                     const NimfaSolution& sol, std::span<const double> z0,
                                     double t, std::size_t replicas, std::uint64_t seed) {
  Simulator sim(h, model);
  std::vector<CoupledRun> runs;
  for (std::size_t r = 0; r < replicas; ++r) {
    Rng rng(replica_seed(seed, r));
    PopulationState init{sample_initial(z0, model->n_states(), rng), 0.0};
    runs.push_back(sim.simulate_coupled(init, sol, t, rng));
  }
  return runs;
}

}  // namespace

TEST_CASE("pure curing gives zero disagreement") {
  const auto h = ring_graph(20, 2, Convention::One);
  const auto model = sis_model({0.0}, 1.0);
  const auto z0 = half_rows(20);
  const auto sol = nimfa_solve(h, *model, z0, 2.0);
  const std::vector<double> grid{0.0, 1.0, 2.0};
  const auto runs = coupled_runs(h, model, sol, z0, 2.0, 50, 3);
  const auto rep = estimate_errors(runs, sol, grid, 2.0);
  for (double p : rep.p_hat) CHECK(p == 0.0);
  CHECK(rep.p_max == 0.0);
  CHECK(rep.p_any == 0.0);
  CHECK(rep.density_error == doctest::Approx(rep.density_error_hat));
}

TEST_CASE("error estimates against a direct recount") {
  const int n = 12;
  const auto h = ring_graph(n, 2, Convention::One);
  const auto model = sis_model({3.0}, 1.0);
  const auto z0 = half_rows(n);
  const double t = 1.5;
  const auto sol = nimfa_solve(h, *model, z0, t);
  const std::vector<double> grid{0.0, 0.5, 1.0, 1.5};
  const auto runs = coupled_runs(h, model, sol, z0, t, 400, 8);
  const auto rep = estimate_errors(runs, sol, grid, t, &h);
  REQUIRE(rep.replicas == 400);

  double pmax = 0.0, psum = 0.0, any = 0.0;
  for (int i = 0; i < n; ++i) {
    double c = 0.0;
    for (const auto& r : runs) c += r.disagreement[static_cast<std::size_t>(i)] <= t;
    const double p = c / 400;
    CHECK(rep.p_hat[static_cast<std::size_t>(i)] == doctest::Approx(p));
    CHECK(rep.p_stderr[static_cast<std::size_t>(i)] == doctest::Approx(std::sqrt(p * (1 - p) / 400)));
    pmax = std::max(pmax, p);
    psum += p;
  }
  for (const auto& r : runs) {
    bool hit = false;
    for (double d : r.disagreement) hit = hit || d <= t;
    any += hit;
  }
  CHECK(rep.p_max == doctest::Approx(pmax));
  CHECK(rep.p_mean == doctest::Approx(psum / n));
  CHECK(rep.p_any == doctest::Approx(any / 400));
  CHECK(rep.p_max >= rep.p_mean);
  CHECK(rep.p_max > 0.0);
  CHECK(rep.p_any >= rep.p_max);

  // sup over the grid of the l1 density gap, replica mean
  double dens = 0.0;
  for (const auto& r : runs) {
    const auto frac = r.xi.fractions_on_grid(grid);
    double sup = 0.0;
    for (std::size_t g = 0; g < grid.size(); ++g) {
      const auto zbar = sol.mean(grid[g]);
      sup = std::max(sup, std::abs(frac[g][0] - zbar[0]) + std::abs(frac[g][1] - zbar[1]));
    }
    dens += sup;
  }
  CHECK(rep.density_error == doctest::Approx(dens / 400).epsilon(1e-12));

  // neighbourhood error at the last grid time by direct evaluation
  REQUIRE(rep.neighborhood_error_mean.size() == 1);
  const auto& layout = model->layout();
  std::vector<double> phi(layout.size()), zeta(layout.size());
  double nb_sum = 0.0;
  for (const auto& r : runs) {
    const auto st = r.xi.states_at(t);
    for (int i = 0; i < n; ++i) {
      empirical_neighborhood(h, layout, st, i, phi);
      sol.zeta(i, t, zeta);
      for (std::size_t k = 0; k < layout.size(); ++k) nb_sum += std::abs(phi[k] - zeta[k]);
    }
  }
  CHECK(rep.neighborhood_error_mean[0].back() == doctest::Approx(nb_sum / (400.0 * n)).epsilon(1e-10));
}

TEST_CASE("accumulator merge equals batch") {
  const auto h = ring_graph(10, 1, Convention::One);
  const auto model = sis_model({2.0}, 1.0);
  const auto z0 = half_rows(10);
  const auto sol = nimfa_solve(h, *model, z0, 1.0);
  const std::vector<double> grid{0.0, 0.5, 1.0};
  const auto runs = coupled_runs(h, model, sol, z0, 1.0, 100, 2);
  ErrorAccumulator a(sol, grid, 1.0), b(sol, grid, 1.0);
  for (std::size_t r = 0; r < 100; ++r) (r < 37 ? a : b).add(runs[r]);
  a.merge(b);
  const auto merged = a.report();
  const auto batch = estimate_errors(runs, sol, grid, 1.0);
  CHECK(merged.p_hat == batch.p_hat);
  CHECK(merged.density_error == doctest::Approx(batch.density_error).epsilon(1e-14));
  CHECK(merged.mismatch_max == batch.mismatch_max);
}

TEST_CASE("instance mismatch and replica count are rejected") {
  const auto h = ring_graph(10, 1, Convention::One);
  const auto model = sis_model({2.0}, 1.0);
  const auto z0 = half_rows(10);
  const auto sol = nimfa_solve(h, *model, z0, 1.0);
  const auto other = nimfa_solve(h, *model, z0, 1.5);
  const std::vector<double> grid{0.0, 1.0};
  const auto runs = coupled_runs(h, model, sol, z0, 1.0, 3, 2);
  CHECK_THROWS_AS(estimate_errors(runs, other, grid, 1.0), InputError);
  CHECK_THROWS_AS(estimate_errors(std::span(runs).first(1), sol, grid, 1.0), InputError);
}

TEST_CASE("disagreement estimates are exchangeable on the complete graph") {
  const int n = 30;
  const auto h = complete_graph(n, Convention::One);
  const auto model = sis_model({2.0}, 1.0);
  const auto z0 = half_rows(n);
  const auto sol = nimfa_solve(h, *model, z0, 1.0);
  const std::vector<double> grid{0.0, 1.0};
  const auto rep = estimate_errors(coupled_runs(h, model, sol, z0, 1.0, 2000, 4), sol, grid, 1.0);
  double lo = 1.0, hi = 0.0;
  for (double p : rep.p_hat) {
    lo = std::min(lo, p);
    hi = std::max(hi, p);
  }
  // pooled binomial standard error of a single vertex estimate
  const double pooled = std::sqrt(rep.p_mean * (1 - rep.p_mean) / 2000);
  CHECK(hi - lo <= 4 * std::sqrt(2.0) * pooled);
}

TEST_CASE("bound ingredients") {
  SUBCASE("complete graph") {
    const auto b = evaluate_bounds(complete_graph(101, Convention::One), 1.0);
    CHECK(b.sqrt_wmax == doctest::Approx(0.1));
    CHECK(b.concentration_bound == doctest::Approx(4.0 / std::sqrt(101.0)));
    CHECK(b.w_inf_norm == doctest::Approx(1.0));
    CHECK(b.w_2_norm == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(b.inf_norm_ok);
    CHECK(b.two_norm_ok);
  }
  SUBCASE("ring") {
    const auto b = evaluate_bounds(ring_graph(200, 10, Convention::One), 2.0);
    CHECK(b.w_max == doctest::Approx(1.0 / 20));
    CHECK(b.mu_inf == doctest::Approx(1.0 / std::sqrt(20.0)));
    CHECK(b.mu_2 == doctest::Approx(std::sqrt(200.0 / 20.0)));
    CHECK(b.frobenius_bound == doctest::Approx(1.0 / std::sqrt(20.0)));
  }
  SUBCASE("convention 2 Frobenius term") {
    const auto h = erdos_renyi(80, 0.1, Convention::Two, 6);
    const auto rep = degree_report(h);
    double inv = 0.0;
    for (double d : rep.degree[0])
      if (d > 0) inv += 1.0 / d;
    const auto b = evaluate_bounds(h, 1.0);
    CHECK(b.frobenius_bound == doctest::Approx(std::sqrt(inv / 80)).epsilon(1e-12));
    CHECK(b.frobenius_bound <= std::sqrt(b.w_max * b.delta_max) + 1e-15);
    CHECK(b.w_2_norm <= b.w_2_bound * (1 + 1e-9));
    CHECK(b.w_inf_norm <= b.delta_max * (1 + 1e-12));
  }
  SUBCASE("pure and deterministic") {
    const auto h = erdos_renyi(50, 0.2, Convention::One, 1);
    const auto a = evaluate_bounds(h, 1.0), b = evaluate_bounds(h, 1.0);
    CHECK(a.w_2_norm == b.w_2_norm);
    CHECK(a.frobenius_bound == b.frobenius_bound);
  }
}

TEST_CASE("scaling fit on synthetic data") {
  std::vector<ScalingPoint> exact;
  for (double n : {100.0, 400.0, 1600.0}) exact.push_back({n, 3.0 / std::sqrt(n), 0.0});
  auto fit = fit_scaling(exact);
  CHECK(std::abs(fit.exponent + 0.5) < 1e-12);
  CHECK(std::abs(fit.intercept - std::log(3.0)) < 1e-10);
  CHECK(fit.used == 3);

  std::vector<ScalingPoint> planted;
  for (double n : {10.0, 50.0, 90.0, 700.0}) planted.push_back({n, 0.2 * std::pow(n, -0.73), 1e-4});
  fit = fit_scaling(planted);
  CHECK(std::abs(fit.exponent + 0.73) < 1e-9);
  CHECK(fit.ci_low <= fit.exponent);
  CHECK(fit.ci_high >= fit.exponent);

  std::vector<ScalingPoint> flat{{10, 0.5, 0.01}, {20, 0.5, 0.01}, {40, 0.5, 0.01}};
  CHECK(std::abs(fit_scaling(flat).exponent) < 1e-12);

  std::vector<ScalingPoint> with_zero{{10, 0.5, 0.01}, {20, 0.0, 0.0}, {40, 0.125, 0.01}, {80, 0.0625, 0.01}};
  fit = fit_scaling(with_zero);
  CHECK(fit.used == 3);
  CHECK(!fit.warnings.empty());
  CHECK(std::abs(fit.exponent + 1.0) < 1e-12);

  std::vector<ScalingPoint> few{{10, 0.5, 0.01}, {20, 0.0, 0.0}, {40, 0.25, 0.01}};
  CHECK_THROWS_AS(fit_scaling(few), InputError);
}
