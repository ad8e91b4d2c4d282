#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "nimfa/hypergraph.hpp"
#include "nimfa/meanfield.hpp"
#include "nimfa/stochastic.hpp"

namespace nimfa {

struct ErrorReport {
  double t = 0.0;
  std::size_t replicas = 0;
  int n_vertices = 0;

  /// P(exists tau <= t with xi_i(tau) != xihat_i(tau)) per vertex.
  std::vector<double> p_hat;
  std::vector<double> p_stderr;
  double p_max = 0.0;
  double p_max_stderr = 0.0;
  double p_mean = 0.0;
  double p_mean_stderr = 0.0;
  /// Fraction of replicas in which any vertex disagreed by time t.
  double p_any = 0.0;

  /// Grid used for the sup-over-time density errors.
  std::vector<double> grid;
  /// Replica mean of sup_g || (1/N) sum_i (xi_i - z_i) ||_1, and the same for xihat.
  double density_error = 0.0;
  double density_error_stderr = 0.0;
  double density_error_hat = 0.0;
  double density_error_hat_stderr = 0.0;
  /// Replica mean of the l1 gap at each grid time.
  std::vector<double> density_gap;
  /// max_i P(xi_i(t_g) != xihat_i(t_g)) at each grid time.
  std::vector<double> mismatch_max;

  /// Optional: [m-1][g] vertex-mean of E || phi^(m)_i - zeta^(m)_i ||_1, and its vertex max.
  std::vector<std::vector<double>> neighborhood_error_mean;
  std::vector<std::vector<double>> neighborhood_error_max;
};

/// Streaming, mergeable estimator over coupled runs of one instance.
class ErrorAccumulator {
 public:
  /// h is only needed for neighbourhood errors (pass nullptr to skip them).
  ErrorAccumulator(const NimfaSolution& nimfa, std::vector<double> grid, double t,
                   const WeightedHypergraph* h = nullptr);

  void add(const CoupledRun& run);
  void merge(const ErrorAccumulator& other);
  ErrorReport report() const;
  std::size_t replicas() const { return replicas_; }

 private:
  const NimfaSolution* nimfa_;
  const WeightedHypergraph* h_;
  std::vector<double> grid_;
  double t_;
  int N_, S_;
  std::vector<double> zbar_;  // [g][s]
  std::vector<double> zeta_;  // [g][i][L], only with h
  std::size_t replicas_ = 0;
  std::vector<double> disagree_;  // per vertex counts
  double any_ = 0.0;
  double dens_ = 0.0, dens_sq_ = 0.0, dens_hat_ = 0.0, dens_hat_sq_ = 0.0;
  std::vector<double> gap_;       // [g]
  std::vector<double> mismatch_;  // [g][i]
  std::vector<double> nb_;        // [g][i][m-1]
};

/// Batch form; every run must carry the solution's instance hash.
ErrorReport estimate_errors(std::span<const CoupledRun> runs, const NimfaSolution& nimfa,
                            std::span<const double> grid, double t,
                            const WeightedHypergraph* h = nullptr);

struct BoundReport {
  double t = 0.0;
  double w_max = 0.0;
  double sqrt_wmax = 0.0;
  double frobenius_bound = 0.0;  // sqrt((1/N) sum_ij w_ij^2)
  double mu_inf = 0.0;
  double mu_2 = 0.0;
  double concentration_bound = 0.0;  // 2|S| / sqrt(N)
  double delta_max = 0.0;
  double delta_max_out = 0.0;
  double sloop_ratio = 0.0;
  double w_inf_norm = 0.0;  // max row sum of W (m = 1)
  double w_2_norm = 0.0;    // spectral norm of W (m = 1), power iteration
  double w_2_bound = 0.0;   // sqrt(delta_out_max * delta_max)
  bool inf_norm_ok = true;
  bool two_norm_ok = true;
};

BoundReport evaluate_bounds(const WeightedHypergraph& h, double t, int n_states = 2);

struct ScalingPoint {
  double size = 0.0;
  double error = 0.0;
  double stderr_ = 0.0;
};

struct ScalingFit {
  double exponent = 0.0;
  double intercept = 0.0;  // log(error) at size 1
  double ci_low = 0.0;
  double ci_high = 0.0;
  std::size_t used = 0;
  std::vector<std::string> warnings;
};

/// Least-squares slope of log(error) against log(size) with a 1000-draw
/// parametric bootstrap interval (95%). Nonpositive errors are dropped with a
/// warning; fewer than 3 usable points throws InputError.
ScalingFit fit_scaling(std::span<const ScalingPoint> points, std::uint64_t seed = 1,
                       int resamples = 1000);

}  // namespace nimfa
