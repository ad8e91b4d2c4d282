#pragma once

#include <cstdint>
#include <istream>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nimfa/neighborhood.hpp"

namespace nimfa {

/// Rates of the form q(phi) = q0 + sum_{m, r} q1_{m, r} * phi^(m)_r, one set of
/// coefficients per (from, to) channel. Coefficients are nonnegative.
struct AffineForm {
  struct Term {
    int order = 1;
    std::size_t tuple = 0;
    double coefficient = 0.0;
  };

  int n_states = 0;
  std::vector<double> constant;           // [from * |S| + to]
  std::vector<std::vector<Term>> linear;  // [from * |S| + to]

  explicit AffineForm(int n_states = 0);

  double& q0(int from, int to) { return constant[channel(from, to)]; }
  void add_term(int from, int to, int order, std::size_t tuple, double coefficient);
  double evaluate(int from, int to, NeighborhoodView phi) const;
  std::size_t channel(int from, int to) const {
    return static_cast<std::size_t>(from) * static_cast<std::size_t>(n_states) +
           static_cast<std::size_t>(to);
  }
};

/// Local rate functions of a density dependent population process.
///
/// rate(from, to, phi) is the rate of a from -> to jump for a vertex with
/// neighbourhood phi. Diagonal rates are never stored.
class RateModel {
 public:
  virtual ~RateModel() = default;

  const std::string& name() const { return name_; }
  int n_states() const { return layout_.n_states(); }
  int max_order() const { return layout_.max_order(); }
  const NeighborhoodLayout& layout() const { return layout_; }
  const std::vector<std::string>& state_labels() const { return labels_; }

  virtual double rate(int from, int to, NeighborhoodView phi) const = 0;

  /// Certified upper bound on rate(from, to, phi) over all nonnegative phi whose
  /// order-m components sum to at most delta_max, for every m.
  virtual double rate_bound(int from, int to, double delta_max) const = 0;

  virtual const AffineForm* affine() const { return nullptr; }
  virtual std::optional<double> lipschitz_hint() const { return std::nullopt; }

  /// Canonical description (name and parameters), used for instance hashing.
  virtual std::string describe() const = 0;
  std::uint64_t fingerprint() const;

  /// Column-generator Q(phi): q[to * |S| + from] = rate(from, to), with the
  /// diagonal holding minus the total exit rate so that dz/dt = Q z.
  void generator(NeighborhoodView phi, std::span<double> q) const;

 protected:
  RateModel(std::string name, int n_states, int max_order, std::vector<std::string> labels);

 private:
  std::string name_;
  NeighborhoodLayout layout_;
  std::vector<std::string> labels_;
};

using ModelPtr = std::shared_ptr<const RateModel>;

/// Simplicial SIS, states {S = 0, I = 1}. beta[m-1] multiplies phi^(m)_(I,...,I).
ModelPtr sis_model(std::vector<double> beta, double gamma);

/// Glauber dynamics, states {+ = 0, - = 1}.
///   - -> + at exp(beta * S(phi)),  S(phi) = sum_m alpha_m phi^(m)_(+..+) - gamma_m phi^(m)_(-..-)
///   + -> - at 1
ModelPtr glauber_model(std::vector<double> alpha, std::vector<double> gamma, double beta);

/// Voter model on graphs, states {0, 1}: 1 -> 0 at lambda*phi_0, 0 -> 1 at lambda*phi_1.
ModelPtr voter_model(double lambda);

/// Modified majority rule, states {0, 1}: a vertex adopts the majority of the
/// other members of an interaction; ties go to opinion 1. Importance factors of
/// each order live in the edge weights (see scale_orders).
ModelPtr majority_model(int max_order);

ModelPtr affine_model(AffineForm form, int max_order, std::string name = "affine");

/// Model by name with numeric parameters (lists are comma separated).
/// sis: beta, gamma; glauber: alpha, gamma, beta; voter: lambda; majority: order;
/// affine: file (coefficient file path), order.
ModelPtr make_model(const std::string& name, const std::map<std::string, std::string>& params);

/// Coefficient file for affine models. One line per channel:
///   from to q0 [m s1 ... sm coef]...
/// '#' starts a comment. The first non-comment line holds "n_states max_order".
std::pair<AffineForm, int> read_affine_coefficients(std::istream& in);

}  // namespace nimfa
