#include "nimfa/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "nimfa/errors.hpp"

namespace nimfa {

namespace {

double stderr_from(double sum, double sq, std::size_t n) {
  if (n < 2) return 0.0;
  const double R = static_cast<double>(n);
  const double m = sum / R;
  return std::sqrt(std::max(0.0, sq / R - m * m) / (R - 1.0));
}

}  // namespace

ErrorAccumulator::ErrorAccumulator(const NimfaSolution& nimfa, std::vector<double> grid, double t,
                                   const WeightedHypergraph* h)
    : nimfa_(&nimfa),
      h_(h),
      grid_(std::move(grid)),
      t_(t),
      N_(nimfa.n_vertices()),
      S_(nimfa.n_states()) {
  if (grid_.empty()) grid_.push_back(t);
  if (!std::is_sorted(grid_.begin(), grid_.end())) throw InputError("error grid must be sorted");
  if (grid_.back() > nimfa.t_end() || t > nimfa.t_end())
    throw InputError("error grid extends beyond the NIMFA horizon");
  const std::size_t G = grid_.size();
  const auto N = static_cast<std::size_t>(N_);
  for (double g : grid_) {
    auto m = nimfa.mean(g);
    zbar_.insert(zbar_.end(), m.begin(), m.end());
  }
  disagree_.assign(N, 0.0);
  gap_.assign(G, 0.0);
  mismatch_.assign(G * N, 0.0);
  if (h_ != nullptr) {
    if (h_->n_vertices() != N_) throw InputError("hypergraph does not match the NIMFA solution");
    const std::size_t L = nimfa.layout().size();
    zeta_.assign(G * N * L, 0.0);
    for (std::size_t g = 0; g < G; ++g)
      for (std::size_t i = 0; i < N; ++i)
        nimfa.zeta(static_cast<int>(i), grid_[g], {zeta_.data() + (g * N + i) * L, L});
    nb_.assign(G * N * static_cast<std::size_t>(nimfa.layout().max_order()), 0.0);
  }
}

void ErrorAccumulator::add(const CoupledRun& run) {
  if (run.instance != nimfa_->instance())
    throw InputError("coupled run belongs to a different instance");
  const auto N = static_cast<std::size_t>(N_);
  const auto S = static_cast<std::size_t>(S_);
  if (run.disagreement.size() != N) throw InputError("coupled run has the wrong vertex count");
  ++replicas_;
  bool any = false;
  for (std::size_t i = 0; i < N; ++i)
    if (run.disagreement[i] <= t_) {
      disagree_[i] += 1.0;
      any = true;
    }
  if (any) any_ += 1.0;

  std::vector<int> a = run.xi.initial.state, b = run.xihat.initial.state;
  std::vector<double> ca(S, 0.0), cb(S, 0.0);
  for (std::size_t i = 0; i < N; ++i) {
    ca[static_cast<std::size_t>(a[i])] += 1.0;
    cb[static_cast<std::size_t>(b[i])] += 1.0;
  }
  std::size_t na = 0, nb = 0;
  double sup = 0.0, sup_hat = 0.0;
  const NeighborhoodLayout& layout = nimfa_->layout();
  const std::size_t L = layout.size();
  std::vector<double> phi(L);
  for (std::size_t g = 0; g < grid_.size(); ++g) {
    const double tg = grid_[g];
    for (; na < run.xi.events.size() && run.xi.events[na].time <= tg; ++na) {
      const Event& e = run.xi.events[na];
      a[static_cast<std::size_t>(e.vertex)] = e.to;
      ca[static_cast<std::size_t>(e.from)] -= 1.0;
      ca[static_cast<std::size_t>(e.to)] += 1.0;
    }
    for (; nb < run.xihat.events.size() && run.xihat.events[nb].time <= tg; ++nb) {
      const Event& e = run.xihat.events[nb];
      b[static_cast<std::size_t>(e.vertex)] = e.to;
      cb[static_cast<std::size_t>(e.from)] -= 1.0;
      cb[static_cast<std::size_t>(e.to)] += 1.0;
    }
    double gap = 0.0, gap_hat = 0.0;
    for (std::size_t s = 0; s < S; ++s) {
      gap += std::abs(ca[s] / N_ - zbar_[g * S + s]);
      gap_hat += std::abs(cb[s] / N_ - zbar_[g * S + s]);
    }
    gap_[g] += gap;
    sup = std::max(sup, gap);
    sup_hat = std::max(sup_hat, gap_hat);
    for (std::size_t i = 0; i < N; ++i)
      if (a[i] != b[i]) mismatch_[g * N + i] += 1.0;

    if (h_ != nullptr) {
      const auto M = static_cast<std::size_t>(layout.max_order());
      for (std::size_t i = 0; i < N; ++i) {
        empirical_neighborhood(*h_, layout, a, static_cast<int>(i), phi);
        const double* z = zeta_.data() + (g * N + i) * L;
        for (int m = 1; m <= layout.max_order(); ++m) {
          double d = 0.0;
          for (std::size_t k = layout.offset(m); k < layout.offset(m) + layout.tuple_count(m); ++k)
            d += std::abs(phi[k] - z[k]);
          nb_[(g * N + i) * M + static_cast<std::size_t>(m - 1)] += d;
        }
      }
    }
  }
  dens_ += sup;
  dens_sq_ += sup * sup;
  dens_hat_ += sup_hat;
  dens_hat_sq_ += sup_hat * sup_hat;
}

void ErrorAccumulator::merge(const ErrorAccumulator& o) {
  if (o.nimfa_->instance() != nimfa_->instance() || o.grid_ != grid_ || o.t_ != t_)
    throw InputError("cannot merge error estimates of different instances");
  replicas_ += o.replicas_;
  for (std::size_t k = 0; k < disagree_.size(); ++k) disagree_[k] += o.disagree_[k];
  any_ += o.any_;
  dens_ += o.dens_;
  dens_sq_ += o.dens_sq_;
  dens_hat_ += o.dens_hat_;
  dens_hat_sq_ += o.dens_hat_sq_;
  for (std::size_t k = 0; k < gap_.size(); ++k) gap_[k] += o.gap_[k];
  for (std::size_t k = 0; k < mismatch_.size(); ++k) mismatch_[k] += o.mismatch_[k];
  for (std::size_t k = 0; k < nb_.size(); ++k) nb_[k] += o.nb_[k];
}

ErrorReport ErrorAccumulator::report() const {
  if (replicas_ < 2) throw InputError("error estimation needs at least two replicas");
  ErrorReport r;
  const double R = static_cast<double>(replicas_);
  const auto N = static_cast<std::size_t>(N_);
  r.t = t_;
  r.replicas = replicas_;
  r.n_vertices = N_;
  r.grid = grid_;
  double sum = 0.0, sum_var = 0.0;
  for (std::size_t i = 0; i < N; ++i) {
    const double p = disagree_[i] / R;
    const double se = std::sqrt(p * (1.0 - p) / R);
    r.p_hat.push_back(p);
    r.p_stderr.push_back(se);
    if (i == 0 || p > r.p_max) {
      r.p_max = p;
      r.p_max_stderr = se;
    }
    sum += p;
    sum_var += p * (1.0 - p);
  }
  r.p_mean = sum / N_;
  // vertices treated as independent; a lower bound under positive correlation
  r.p_mean_stderr = std::sqrt(sum_var / R) / N_;
  r.p_any = any_ / R;
  r.density_error = dens_ / R;
  r.density_error_stderr = stderr_from(dens_, dens_sq_, replicas_);
  r.density_error_hat = dens_hat_ / R;
  r.density_error_hat_stderr = stderr_from(dens_hat_, dens_hat_sq_, replicas_);
  for (std::size_t g = 0; g < grid_.size(); ++g) {
    r.density_gap.push_back(gap_[g] / R);
    double worst = 0.0;
    for (std::size_t i = 0; i < N; ++i) worst = std::max(worst, mismatch_[g * N + i] / R);
    r.mismatch_max.push_back(worst);
  }
  if (!nb_.empty()) {
    const auto M = static_cast<std::size_t>(nimfa_->layout().max_order());
    r.neighborhood_error_mean.assign(M, std::vector<double>(grid_.size(), 0.0));
    r.neighborhood_error_max.assign(M, std::vector<double>(grid_.size(), 0.0));
    for (std::size_t m = 0; m < M; ++m)
      for (std::size_t g = 0; g < grid_.size(); ++g)
        for (std::size_t i = 0; i < N; ++i) {
          const double v = nb_[(g * N + i) * M + m] / R;
          r.neighborhood_error_mean[m][g] += v / N_;
          r.neighborhood_error_max[m][g] = std::max(r.neighborhood_error_max[m][g], v);
        }
  }
  return r;
}

ErrorReport estimate_errors(std::span<const CoupledRun> runs, const NimfaSolution& nimfa,
                            std::span<const double> grid, double t, const WeightedHypergraph* h) {
  if (runs.size() < 2) throw InputError("error estimation needs at least two replicas");
  ErrorAccumulator acc(nimfa, std::vector<double>(grid.begin(), grid.end()), t, h);
  for (const CoupledRun& run : runs) acc.add(run);
  return acc.report();
}

BoundReport evaluate_bounds(const WeightedHypergraph& h, double t, int n_states) {
  const RegularityReport reg = regularity_report(h);
  BoundReport b;
  const int N = h.n_vertices();
  b.t = t;
  b.w_max = reg.w_max;
  b.sqrt_wmax = std::sqrt(reg.w_max);
  b.frobenius_bound = std::sqrt(reg.frobenius_sq);
  for (double m : reg.mu) {
    b.mu_inf = std::max(b.mu_inf, m);
    b.mu_2 += m * m;
  }
  b.mu_2 = std::sqrt(b.mu_2);
  b.concentration_bound = N > 0 ? 2.0 * n_states / std::sqrt(static_cast<double>(N)) : 0.0;
  b.delta_max = reg.delta_max;
  b.delta_max_out = reg.delta_max_out;
  b.sloop_ratio = reg.sloop_ratio;

  const auto& o = h.order(1);
  for (int i = 0; i < N; ++i) {
    double row = 0.0;
    for (std::size_t e = o.begin(i); e < o.end(i); ++e) row += std::abs(o.weights[e]);
    b.w_inf_norm = std::max(b.w_inf_norm, row);
  }
  // power iteration on W^T W from a fixed start vector
  const auto Nu = static_cast<std::size_t>(N);
  std::vector<double> x(Nu), y(Nu), z(Nu);
  for (std::size_t i = 0; i < Nu; ++i) x[i] = 1.0 + 0.01 * static_cast<double>(i % 7);
  double lambda = 0.0;
  for (int it = 0; it < 1000 && N > 0; ++it) {
    double norm = 0.0;
    for (double v : x) norm += v * v;
    norm = std::sqrt(norm);
    if (norm == 0.0) break;
    for (double& v : x) v /= norm;
    std::fill(y.begin(), y.end(), 0.0);
    std::fill(z.begin(), z.end(), 0.0);
    for (int i = 0; i < N; ++i)
      for (std::size_t e = o.begin(i); e < o.end(i); ++e)
        y[static_cast<std::size_t>(i)] += o.weights[e] * x[static_cast<std::size_t>(o.tails[e])];
    for (int i = 0; i < N; ++i)
      for (std::size_t e = o.begin(i); e < o.end(i); ++e)
        z[static_cast<std::size_t>(o.tails[e])] += o.weights[e] * y[static_cast<std::size_t>(i)];
    double next = 0.0;
    for (std::size_t i = 0; i < Nu; ++i) next += x[i] * z[i];
    x.swap(z);
    if (std::abs(next - lambda) <= 1e-14 * std::max(1.0, next)) {
      lambda = next;
      break;
    }
    lambda = next;
  }
  b.w_2_norm = std::sqrt(std::max(0.0, lambda));
  b.w_2_bound = std::sqrt(b.delta_max_out * b.delta_max);
  b.inf_norm_ok = b.w_inf_norm <= b.delta_max * (1.0 + 1e-12) + 1e-15;
  b.two_norm_ok = b.w_2_norm <= b.w_2_bound * (1.0 + 1e-9) + 1e-15;
  return b;
}

namespace {

// Slope and intercept of y on x by ordinary least squares.
std::pair<double, double> least_squares(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    mx += x[k];
    my += y[k];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    sxy += (x[k] - mx) * (y[k] - my);
    sxx += (x[k] - mx) * (x[k] - mx);
  }
  if (sxx == 0.0) throw InputError("scaling fit needs at least two distinct sizes");
  const double slope = sxy / sxx;
  return {slope, my - slope * mx};
}

}  // namespace

ScalingFit fit_scaling(std::span<const ScalingPoint> points, std::uint64_t seed, int resamples) {
  ScalingFit fit;
  std::vector<ScalingPoint> usable;
  for (const ScalingPoint& p : points) {
    if (!(p.error > 0.0) || !(p.size > 0.0)) {
      fit.warnings.push_back("dropped point at size " + std::to_string(p.size) +
                             " with nonpositive value");
      continue;
    }
    usable.push_back(p);
  }
  if (usable.size() < 3) throw InputError("scaling fit needs at least 3 positive points");
  std::vector<double> x, y;
  for (const auto& p : usable) {
    x.push_back(std::log(p.size));
    y.push_back(std::log(p.error));
  }
  std::tie(fit.exponent, fit.intercept) = least_squares(x, y);
  fit.used = usable.size();

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> slopes;
  std::vector<double> yb(y.size());
  for (int r = 0; r < resamples; ++r) {
    for (std::size_t k = 0; k < usable.size(); ++k) {
      // resampled values stay positive; floor at 1e-3 of the estimate
      const double e = usable[k].error + usable[k].stderr_ * normal(rng);
      yb[k] = std::log(std::max(e, 1e-3 * usable[k].error));
    }
    slopes.push_back(least_squares(x, yb).first);
  }
  if (slopes.empty()) {
    fit.ci_low = fit.ci_high = fit.exponent;
  } else {
    std::sort(slopes.begin(), slopes.end());
    auto quantile = [&](double q) {
      const double pos = q * static_cast<double>(slopes.size() - 1);
      const auto lo = static_cast<std::size_t>(std::floor(pos));
      const auto hi = std::min(lo + 1, slopes.size() - 1);
      return slopes[lo] + (pos - static_cast<double>(lo)) * (slopes[hi] - slopes[lo]);
    };
    fit.ci_low = std::min(quantile(0.025), fit.exponent);
    fit.ci_high = std::max(quantile(0.975), fit.exponent);
  }
  return fit;
}

}  // namespace nimfa
