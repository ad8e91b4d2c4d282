#include "nimfa/ode.hpp"

#include <algorithm>
#include <cmath>

#include "nimfa/errors.hpp"

namespace nimfa::ode {

std::size_t DenseSolution::locate(double t) const {
  if (times_.size() < 2) return 0;
  auto it = std::upper_bound(times_.begin(), times_.end(), t);
  std::size_t k = static_cast<std::size_t>(it - times_.begin());
  if (k == 0) return 0;
  return std::min(k - 1, times_.size() - 2);
}

void hermite(double t0, double t1, std::span<const double> y0, std::span<const double> f0,
             std::span<const double> y1, std::span<const double> f1, double t,
             std::span<double> out) {
  const double h = t1 - t0;
  if (h <= 0.0) {
    std::copy(y0.begin(), y0.end(), out.begin());
    return;
  }
  const double s = (t - t0) / h;
  const double s2 = s * s, s3 = s2 * s;
  const double h00 = 2 * s3 - 3 * s2 + 1;
  const double h10 = s3 - 2 * s2 + s;
  const double h01 = -2 * s3 + 3 * s2;
  const double h11 = s3 - s2;
  for (std::size_t k = 0; k < out.size(); ++k)
    out[k] = h00 * y0[k] + h10 * h * f0[k] + h01 * y1[k] + h11 * h * f1[k];
}

void DenseSolution::check_range(double t) const {
  const double slack = 1e-12 * std::max(1.0, std::abs(times_.back()));
  if (times_.empty() || t < times_.front() - slack || t > times_.back() + slack)
    throw InputError("dense output queried outside the integration range");
}

void DenseSolution::eval(double t, std::span<double> out) const {
  check_range(t);
  if (times_.size() == 1) {
    auto v = value(0);
    std::copy(v.begin(), v.end(), out.begin());
    return;
  }
  const std::size_t k = locate(t);
  if (t == times_[k + 1]) {
    auto v = value(k + 1);
    std::copy(v.begin(), v.end(), out.begin());
    return;
  }
  hermite(times_[k], times_[k + 1], value(k), slope(k), value(k + 1), slope(k + 1), t, out);
}

std::vector<double> DenseSolution::eval(double t) const {
  std::vector<double> out(dim_);
  eval(t, out);
  return out;
}

double DenseSolution::eval(double t, std::size_t component) const {
  check_range(t);
  if (times_.size() == 1) return values_[component];
  const std::size_t k = locate(t);
  const double y0 = values_[k * dim_ + component], y1 = values_[(k + 1) * dim_ + component];
  const double f0 = slopes_[k * dim_ + component], f1 = slopes_[(k + 1) * dim_ + component];
  double out;
  hermite(times_[k], times_[k + 1], {&y0, 1}, {&f0, 1}, {&y1, 1}, {&f1, 1}, t, {&out, 1});
  return out;
}

void DenseSolution::push(double t, std::span<const double> y, std::span<const double> dydt) {
  times_.push_back(t);
  values_.insert(values_.end(), y.begin(), y.end());
  slopes_.insert(slopes_.end(), dydt.begin(), dydt.end());
}

namespace {

class Stepper {
 public:
  Stepper(const Rhs& f, std::size_t n, std::size_t& evals)
      : f_(f), evals_(evals), k2_(n), k3_(n), k4_(n), tmp_(n) {}

  // One RK4 step from (t, y) with known slope k1; result into out.
  void step(double t, std::span<const double> y, std::span<const double> k1, double h,
            std::span<double> out) {
    const std::size_t n = y.size();
    for (std::size_t i = 0; i < n; ++i) tmp_[i] = y[i] + 0.5 * h * k1[i];
    call(t + 0.5 * h, tmp_, k2_);
    for (std::size_t i = 0; i < n; ++i) tmp_[i] = y[i] + 0.5 * h * k2_[i];
    call(t + 0.5 * h, tmp_, k3_);
    for (std::size_t i = 0; i < n; ++i) tmp_[i] = y[i] + h * k3_[i];
    call(t + h, tmp_, k4_);
    for (std::size_t i = 0; i < n; ++i)
      out[i] = y[i] + h / 6.0 * (k1[i] + 2.0 * k2_[i] + 2.0 * k3_[i] + k4_[i]);
  }

  void call(double t, std::span<const double> y, std::span<double> dydt) {
    f_(t, y, dydt);
    ++evals_;
  }

 private:
  const Rhs& f_;
  std::size_t& evals_;
  std::vector<double> k2_, k3_, k4_, tmp_;
};

}  // namespace

DenseSolution integrate(const Rhs& f, std::span<const double> y0, double t0, double t_end,
                        const Options& opt) {
  const std::size_t n = y0.size();
  DenseSolution sol(n);
  if (!(t_end >= t0)) throw InputError("integration horizon precedes the start time");
  const double span = t_end - t0;
  if (!opt.adaptive && !(opt.h_max > 0.0 && std::isfinite(opt.h_max)))
    throw InputError("fixed-step integration needs a finite h_max");

  Stepper stepper(f, n, sol.rhs_evaluations);
  std::vector<double> y(y0.begin(), y0.end()), k1(n), full(n), half(n), khalf(n), two(n);
  stepper.call(t0, y, k1);
  sol.push(t0, y, k1);
  if (span == 0.0) return sol;

  std::vector<double> stops;
  for (double s : opt.stop_times)
    if (s > t0 && s < t_end) stops.push_back(s);
  std::sort(stops.begin(), stops.end());
  stops.push_back(t_end);
  std::size_t next_stop = 0;

  const double h_min = opt.h_min_factor * std::max(span, 1.0);
  double h = opt.adaptive ? (opt.h_init > 0.0 ? opt.h_init : 0.01 * span) : opt.h_max;
  h = std::min(h, opt.h_max);
  double t = t0;
  std::size_t steps = 0;

  while (t < t_end) {
    if (++steps > opt.max_steps) throw NumericalError("step budget exhausted", t);
    while (next_stop < stops.size() && stops[next_stop] <= t) ++next_stop;
    const double target = stops[next_stop];
    double step = std::min(h, target - t);
    bool lands = step >= target - t;
    // avoid leaving a sliver before a stop time
    if (!lands && target - t - step < 1e-3 * step) {
      step = target - t;
      lands = true;
    }

    stepper.step(t, y, k1, step, full);
    stepper.step(t, y, k1, 0.5 * step, half);
    stepper.call(t + 0.5 * step, half, khalf);
    stepper.step(t + 0.5 * step, half, khalf, 0.5 * step, two);

    double err = 0.0;
    bool finite = true;
    for (std::size_t i = 0; i < n; ++i) {
      if (!std::isfinite(two[i])) finite = false;
      const double scale = opt.atol + opt.rtol * std::max(std::abs(y[i]), std::abs(two[i]));
      err = std::max(err, std::abs(two[i] - full[i]) / (15.0 * scale));
    }
    const bool ok_error = !opt.adaptive || (finite && err <= 1.0);
    // local extrapolation; linear, so conserved sums are untouched
    if (opt.adaptive && finite)
      for (std::size_t i = 0; i < n; ++i) two[i] += (two[i] - full[i]) / 15.0;
    const bool ok_state = finite && (!opt.accept || opt.accept(two));

    if (!ok_error || !ok_state) {
      ++sol.rejected_steps;
      if (!opt.adaptive && finite && !ok_state)
        throw NumericalError("fixed step produced an inadmissible state", t);
      if (!finite && !opt.adaptive) throw NumericalError("non-finite state", t);
      double shrink = 0.5;
      if (!ok_error && finite && ok_state) shrink = std::max(0.1, 0.9 * std::pow(err, -0.2));
      h = step * std::min(shrink, 0.5);
      if (h < h_min) throw NumericalError("step size underflow", t);
      continue;
    }

    t = lands ? target : t + step;
    y.swap(two);
    stepper.call(t, y, k1);
    sol.push(t, y, k1);
    if (opt.adaptive) {
      const double grow = err > 0.0 ? 0.9 * std::pow(err, -0.2) : 5.0;
      h = std::min(opt.h_max, step * std::clamp(grow, 0.2, 5.0));
      // a step clipped by a stop time should not shrink the proposal
      if (lands) h = std::max(h, std::min(opt.h_max, step));
    } else {
      h = opt.h_max;
    }
  }
  return sol;
}

}  // namespace nimfa::ode
