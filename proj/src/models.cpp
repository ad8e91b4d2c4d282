#include "nimfa/models.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "nimfa/errors.hpp"
#include "nimfa/generators.hpp"
#include "nimfa/util.hpp"

namespace nimfa {

AffineForm::AffineForm(int n)
    : n_states(n),
      constant(static_cast<std::size_t>(n * n), 0.0),
      linear(static_cast<std::size_t>(n * n)) {}

void AffineForm::add_term(int from, int to, int order, std::size_t tuple, double coefficient) {
  linear[channel(from, to)].push_back(Term{order, tuple, coefficient});
}

double AffineForm::evaluate(int from, int to, NeighborhoodView phi) const {
  const std::size_t c = channel(from, to);
  double q = constant[c];
  for (const Term& t : linear[c]) q += t.coefficient * phi.at(t.order, t.tuple);
  return q;
}

RateModel::RateModel(std::string name, int n_states, int max_order,
                     std::vector<std::string> labels)
    : name_(std::move(name)), layout_(n_states, max_order), labels_(std::move(labels)) {
  if (labels_.empty())
    for (int s = 0; s < n_states; ++s) labels_.push_back(std::to_string(s));
}

std::uint64_t RateModel::fingerprint() const {
  Fnv1a h;
  h.text(describe());
  return h.digest();
}

void RateModel::generator(NeighborhoodView phi, std::span<double> q) const {
  const int S = n_states();
  std::fill(q.begin(), q.end(), 0.0);
  for (int from = 0; from < S; ++from)
    for (int to = 0; to < S; ++to) {
      if (from == to) continue;
      const double r = rate(from, to, phi);
      q[static_cast<std::size_t>(to * S + from)] += r;
      q[static_cast<std::size_t>(from * S + from)] -= r;
    }
}

namespace {

std::string join(const std::vector<double>& v) {
  std::string s;
  for (std::size_t k = 0; k < v.size(); ++k) s += (k ? "," : "") + format_double(v[k]);
  return s;
}

class AffineRateModel final : public RateModel {
 public:
  AffineRateModel(std::string name, AffineForm form, int max_order,
                  std::vector<std::string> labels, std::string params)
      : RateModel(std::move(name), form.n_states, max_order, std::move(labels)),
        form_(std::move(form)),
        params_(std::move(params)) {
    const int S = n_states();
    for (int from = 0; from < S; ++from)
      for (int to = 0; to < S; ++to) {
        const std::size_t c = form_.channel(from, to);
        if (from == to) {
          if (form_.constant[c] != 0.0 || !form_.linear[c].empty())
            throw ParameterError("affine model: diagonal coefficients are not allowed");
          continue;
        }
        if (!std::isfinite(form_.constant[c]) || form_.constant[c] < 0.0)
          throw ParameterError("affine model: q0 must be finite and nonnegative");
        for (const auto& t : form_.linear[c]) {
          if (t.order < 1 || t.order > max_order || t.tuple >= layout().tuple_count(t.order))
            throw ParameterError("affine model: term outside the neighbourhood layout");
          if (!std::isfinite(t.coefficient) || t.coefficient < 0.0)
            throw ParameterError("affine model: q1 must be finite and nonnegative");
        }
      }
  }

  double rate(int from, int to, NeighborhoodView phi) const override {
    return form_.evaluate(from, to, phi);
  }

  double rate_bound(int from, int to, double delta_max) const override {
    // nonnegative coefficients: sum_r c_r phi_r <= max_r c_r * sum_r phi_r per order
    const std::size_t c = form_.channel(from, to);
    std::vector<double> best(static_cast<std::size_t>(max_order()), 0.0);
    for (const auto& t : form_.linear[c]) {
      auto& b = best[static_cast<std::size_t>(t.order - 1)];
      b = std::max(b, t.coefficient);
    }
    double q = form_.constant[c];
    for (double b : best) q += b * delta_max;
    return q;
  }

  const AffineForm* affine() const override { return &form_; }

  std::optional<double> lipschitz_hint() const override {
    double l = 0.0;
    for (const auto& terms : form_.linear)
      for (const auto& t : terms) l = std::max(l, t.coefficient);
    return l;
  }

  std::string describe() const override {
    if (!params_.empty()) return name() + "(" + params_ + ")";
    std::ostringstream os;
    os << name() << "(S=" << n_states() << ",M=" << max_order();
    for (int from = 0; from < n_states(); ++from)
      for (int to = 0; to < n_states(); ++to) {
        const std::size_t c = form_.channel(from, to);
        os << ";" << from << ">" << to << ":" << format_double(form_.constant[c]);
        for (const auto& t : form_.linear[c])
          os << "," << t.order << "/" << t.tuple << "/" << format_double(t.coefficient);
      }
    os << ")";
    return os.str();
  }

 private:
  AffineForm form_;
  std::string params_;
};

class GlauberModel final : public RateModel {
 public:
  GlauberModel(std::vector<double> alpha, std::vector<double> gamma, double beta)
      : RateModel("glauber", 2, static_cast<int>(alpha.size()), {"+", "-"}),
        alpha_(std::move(alpha)),
        gamma_(std::move(gamma)),
        beta_(beta) {}

  double field(NeighborhoodView phi) const {
    double s = 0.0;
    for (int m = 1; m <= max_order(); ++m) {
      const auto o = phi.order(m);
      // tuple (+,...,+) is index 0, (-,...,-) is the last one
      s += alpha_[static_cast<std::size_t>(m - 1)] * o.front() -
           gamma_[static_cast<std::size_t>(m - 1)] * o.back();
    }
    return s;
  }

  double rate(int from, int to, NeighborhoodView phi) const override {
    if (from == 1 && to == 0) return std::exp(beta_ * field(phi));
    if (from == 0 && to == 1) return 1.0;
    return 0.0;
  }

  double rate_bound(int from, int to, double delta_max) const override {
    if (from == 0 && to == 1) return 1.0;
    if (from == 1 && to == 0) {
      double c = 0.0;
      for (std::size_t k = 0; k < alpha_.size(); ++k) c += std::abs(alpha_[k]) + std::abs(gamma_[k]);
      return std::exp(std::abs(beta_) * c * delta_max);
    }
    return 0.0;
  }

  std::string describe() const override {
    return "glauber(alpha=" + join(alpha_) + ";gamma=" + join(gamma_) +
           ";beta=" + format_double(beta_) + ")";
  }

 private:
  std::vector<double> alpha_, gamma_;
  double beta_;
};

void require_nonnegative(const std::vector<double>& v, const char* what) {
  for (double x : v)
    if (!std::isfinite(x) || x < 0.0)
      throw ParameterError(std::string(what) + " must be finite and nonnegative");
}

}  // namespace

ModelPtr sis_model(std::vector<double> beta, double gamma) {
  if (beta.empty()) throw ParameterError("sis: need at least one infection rate");
  require_nonnegative(beta, "sis: beta");
  require_nonnegative({gamma}, "sis: gamma");
  const int M = static_cast<int>(beta.size());
  NeighborhoodLayout layout(2, M);
  AffineForm form(2);
  form.q0(1, 0) = gamma;
  for (int m = 1; m <= M; ++m) {
    const double b = beta[static_cast<std::size_t>(m - 1)];
    if (b > 0.0) form.add_term(0, 1, m, layout.tuple_count(m) - 1, b);  // (I,...,I)
  }
  return std::make_shared<AffineRateModel>("sis", std::move(form), M,
                                           std::vector<std::string>{"S", "I"},
                                           "beta=" + join(beta) + ";gamma=" + format_double(gamma));
}

ModelPtr glauber_model(std::vector<double> alpha, std::vector<double> gamma, double beta) {
  if (alpha.empty() || alpha.size() != gamma.size())
    throw ParameterError("glauber: alpha and gamma need one entry per order");
  for (double x : alpha)
    if (!std::isfinite(x)) throw ParameterError("glauber: alpha must be finite");
  for (double x : gamma)
    if (!std::isfinite(x)) throw ParameterError("glauber: gamma must be finite");
  if (!std::isfinite(beta)) throw ParameterError("glauber: beta must be finite");
  return std::make_shared<GlauberModel>(std::move(alpha), std::move(gamma), beta);
}

ModelPtr voter_model(double lambda) {
  require_nonnegative({lambda}, "voter: lambda");
  AffineForm form(2);
  if (lambda > 0.0) {
    form.add_term(1, 0, 1, 0, lambda);
    form.add_term(0, 1, 1, 1, lambda);
  }
  return std::make_shared<AffineRateModel>("voter", std::move(form), 1,
                                           std::vector<std::string>{"0", "1"},
                                           "lambda=" + format_double(lambda));
}

ModelPtr majority_model(int max_order) {
  if (max_order < 1) throw ParameterError("majority: max order must be positive");
  NeighborhoodLayout layout(2, max_order);
  AffineForm form(2);
  for (int m = 1; m <= max_order; ++m)
    for (std::size_t t = 0; t < layout.tuple_count(m); ++t) {
      const int ones = layout.count_state(m, t, 1);
      // |s| >= m/2 (ties included) pulls towards 1, a strict minority of ones towards 0
      if (2 * ones >= m)
        form.add_term(0, 1, m, t, 1.0);
      else
        form.add_term(1, 0, m, t, 1.0);
    }
  return std::make_shared<AffineRateModel>("majority", std::move(form), max_order,
                                           std::vector<std::string>{"0", "1"},
                                           "order=" + std::to_string(max_order));
}

ModelPtr affine_model(AffineForm form, int max_order, std::string name) {
  if (form.n_states < 2) throw ParameterError("affine model needs at least two states");
  if (max_order < 1) throw ParameterError("affine model needs max order >= 1");
  return std::make_shared<AffineRateModel>(std::move(name), std::move(form), max_order,
                                           std::vector<std::string>{}, "");
}

std::pair<AffineForm, int> read_affine_coefficients(std::istream& in) {
  std::string line;
  int S = 0, M = 0;
  AffineForm form;
  bool header = false;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto c = line.find('#'); c != std::string::npos) line.erase(c);
    std::istringstream ls(line);
    if (!header) {
      if (!(ls >> S)) continue;
      if (!(ls >> M) || S < 2 || M < 1)
        throw ParameterError("coefficient file: bad header on line " + std::to_string(lineno));
      form = AffineForm(S);
      header = true;
      continue;
    }
    int from, to;
    double q0;
    if (!(ls >> from)) continue;
    if (!(ls >> to >> q0) || from < 0 || from >= S || to < 0 || to >= S || from == to)
      throw ParameterError("coefficient file: bad channel on line " + std::to_string(lineno));
    form.q0(from, to) += q0;
    int m;
    NeighborhoodLayout layout(S, M);
    while (ls >> m) {
      if (m < 1 || m > M)
        throw ParameterError("coefficient file: bad order on line " + std::to_string(lineno));
      std::vector<int> states(static_cast<std::size_t>(m));
      for (auto& s : states)
        if (!(ls >> s) || s < 0 || s >= S)
          throw ParameterError("coefficient file: bad state on line " + std::to_string(lineno));
      double coef;
      if (!(ls >> coef))
        throw ParameterError("coefficient file: missing coefficient on line " +
                             std::to_string(lineno));
      form.add_term(from, to, m, layout.tuple_index(states), coef);
    }
  }
  if (!header) throw ParameterError("coefficient file: missing header");
  return {std::move(form), M};
}

ModelPtr make_model(const std::string& name, const std::map<std::string, std::string>& params) {
  std::set<std::string> used;
  auto get = [&](const std::string& key) -> const std::string* {
    used.insert(key);
    auto it = params.find(key);
    return it == params.end() ? nullptr : &it->second;
  };
  auto list = [&](const std::string& key) {
    const auto* v = get(key);
    if (!v) throw ParameterError(name + ": missing parameter '" + key + "'");
    return parse_number_list(*v);
  };
  auto scalar = [&](const std::string& key) {
    const auto v = list(key);
    if (v.size() != 1) throw ParameterError(name + ": '" + key + "' must be a single number");
    return v[0];
  };
  ModelPtr model;
  if (name == "sis") {
    model = sis_model(list("beta"), scalar("gamma"));
  } else if (name == "glauber") {
    model = glauber_model(list("alpha"), list("gamma"), scalar("beta"));
  } else if (name == "voter") {
    model = voter_model(scalar("lambda"));
  } else if (name == "majority") {
    model = majority_model(get("order") ? static_cast<int>(scalar("order")) : 1);
  } else if (name == "affine") {
    const auto* path = get("file");
    if (!path) throw ParameterError("affine: missing parameter 'file'");
    std::ifstream in(*path);
    if (!in) throw ParameterError("affine: cannot open coefficient file '" + *path + "'");
    auto [form, M] = read_affine_coefficients(in);
    model = affine_model(std::move(form), M);
  } else {
    throw ParameterError("unknown model '" + name + "'");
  }
  for (const auto& [k, v] : params)
    if (!used.count(k)) throw ParameterError(name + ": unknown parameter '" + k + "'");
  return model;
}

}  // namespace nimfa
