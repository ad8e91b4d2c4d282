#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <vector>

namespace nimfa::ode {

using Rhs = std::function<void(double t, std::span<const double> y, std::span<double> dydt)>;

/// Returns false when a freshly computed state must be rejected (the step is then halved).
using StateCheck = std::function<bool(std::span<const double> y)>;

struct Options {
  double rtol = 1e-8;
  double atol = 1e-10;
  double h_init = 0.0;  // 0 picks 1% of the horizon
  double h_max = std::numeric_limits<double>::infinity();
  double h_min_factor = 1e-12;  // smallest step, relative to the horizon
  bool adaptive = true;         // false: fixed steps of h_max
  std::vector<double> stop_times;
  StateCheck accept;
  std::size_t max_steps = 50'000'000;
};

/// Accepted step nodes (t, y, dy/dt) with cubic Hermite interpolation between them.
class DenseSolution {
 public:
  DenseSolution() = default;
  explicit DenseSolution(std::size_t dim) : dim_(dim) {}

  std::size_t dim() const { return dim_; }
  std::size_t nodes() const { return times_.size(); }
  const std::vector<double>& times() const { return times_; }
  double t_begin() const { return times_.front(); }
  double t_end() const { return times_.back(); }

  std::span<const double> value(std::size_t node) const { return {&values_[node * dim_], dim_}; }
  std::span<const double> slope(std::size_t node) const { return {&slopes_[node * dim_], dim_}; }

  /// Index k with times[k] <= t <= times[k+1] (clamped to the valid range).
  std::size_t locate(double t) const;

  /// Throws InputError outside [t_begin, t_end].
  void eval(double t, std::span<double> out) const;
  std::vector<double> eval(double t) const;
  double eval(double t, std::size_t component) const;

  void push(double t, std::span<const double> y, std::span<const double> dydt);

  std::size_t rejected_steps = 0;
  std::size_t rhs_evaluations = 0;

 private:
  void check_range(double t) const;

  std::size_t dim_ = 0;
  std::vector<double> times_;
  std::vector<double> values_;
  std::vector<double> slopes_;
};

/// Cubic Hermite interpolation on one interval; shared by every dense-output consumer.
void hermite(double t0, double t1, std::span<const double> y0, std::span<const double> f0,
             std::span<const double> y1, std::span<const double> f1, double t,
             std::span<double> out);

/// Classical RK4 with step-doubling error control. Throws NumericalError when the
/// step size underflows.
DenseSolution integrate(const Rhs& f, std::span<const double> y0, double t0, double t_end,
                        const Options& options = {});

}  // namespace nimfa::ode
