#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <map>
#include <utility>
#include <vector>

#include "eef/common.hpp"
#include "eef/conic.hpp"

// Small expression layer for assembling cone programs whose cones reference
// plain variables: affine expressions are materialized as hash-consed
// auxiliary variables pinned by equalities (folded away again by the solver's
// presolve). Every variable carries a value hint, so the assembled problem
// comes with a candidate point for feasibility checks.
namespace eef::modeling {

struct Expr {
  std::vector<conic::LinearTerm> terms;
  double constant = 0.0;

  Expr() = default;
  Expr(double c) : constant(c) {}  // NOLINT: implicit constants are convenient here

  static Expr var(int index, double coef = 1.0) {
    Expr e;
    e.terms.push_back({index, coef});
    return e;
  }

  Expr& operator+=(const Expr& o) {
    terms.insert(terms.end(), o.terms.begin(), o.terms.end());
    constant += o.constant;
    return *this;
  }

  Expr& operator-=(const Expr& o) {
    for (const auto& t : o.terms) terms.push_back({t.var, -t.coef});
    constant -= o.constant;
    return *this;
  }

  Expr& operator*=(double f) {
    for (auto& t : terms) t.coef *= f;
    constant *= f;
    return *this;
  }

  friend Expr operator+(Expr a, const Expr& b) { return a += b; }
  friend Expr operator-(Expr a, const Expr& b) { return a -= b; }
  friend Expr operator*(Expr a, double f) { return a *= f; }
  friend Expr operator*(double f, Expr a) { return a *= f; }
  friend Expr operator-(Expr a) { return a *= -1.0; }

  // Merge duplicate variables, drop zeros, sort by index.
  void canonicalize() {
    std::sort(terms.begin(), terms.end(),
              [](const conic::LinearTerm& a, const conic::LinearTerm& b) { return a.var < b.var; });
    std::vector<conic::LinearTerm> out;
    for (const auto& t : terms) {
      if (!out.empty() && out.back().var == t.var) {
        out.back().coef += t.coef;
      } else {
        out.push_back(t);
      }
    }
    out.erase(std::remove_if(out.begin(), out.end(),
                             [](const conic::LinearTerm& t) { return t.coef == 0.0; }),
              out.end());
    terms = std::move(out);
  }

  bool is_single_var() const { return constant == 0.0 && terms.size() == 1 && terms[0].coef == 1.0; }
};

class Model {
 public:
  conic::ConicProblem& problem() { return prob_; }
  const conic::ConicProblem& problem() const { return prob_; }

  // hint: intended value at the builder's expansion point.
  int add_var(double hint, double lb = -kInf, double ub = kInf) {
    int v = prob_.add_var(lb, ub);
    hints_.push_back(hint);
    return v;
  }

  double hint(int var) const { return hints_.at(var); }
  void set_hint(int var, double h) { hints_.at(var) = h; }

  double hint_of(const Expr& e) const {
    double v = e.constant;
    for (const auto& t : e.terms) v += t.coef * hints_[t.var];
    return v;
  }

  Eigen::VectorXd hint_vector() const {
    return Eigen::Map<const Eigen::VectorXd>(hints_.data(), hints_.size());
  }

  int constant_var(double value) {
    auto it = const_cache_.find(value);
    if (it != const_cache_.end()) return it->second;
    int v = add_var(value);
    prob_.add_equality({{v, 1.0}}, value);
    const_cache_[value] = v;
    return v;
  }

  // Variable equal to the expression (hash-consed).
  int alias(Expr e) {
    e.canonicalize();
    if (e.is_single_var()) return e.terms[0].var;
    if (e.terms.empty()) return constant_var(e.constant);
    AliasKey key{e.terms, e.constant};
    auto it = alias_cache_.find(key);
    if (it != alias_cache_.end()) return it->second;
    int v = add_var(hint_of(e));
    std::vector<conic::LinearTerm> row = e.terms;
    row.push_back({v, -1.0});
    prob_.add_equality(std::move(row), -e.constant);
    alias_cache_[key] = v;
    return v;
  }

  void add_eq(Expr e, double rhs) {
    e.canonicalize();
    prob_.add_equality(e.terms, rhs - e.constant);
  }

  void add_le(Expr e, double rhs) {
    e.canonicalize();
    prob_.add_inequality(e.terms, rhs - e.constant);
  }

  // ||tail|| <= head.
  void add_soc(const Expr& head, const std::vector<Expr>& tail) {
    std::vector<int> vars;
    vars.push_back(alias(head));
    for (const auto& t : tail) vars.push_back(alias(t));
    prob_.add_soc(std::move(vars));
  }

  // ||tail||^2 <= 2 u v. The cone is invariant under u -> u/rho, v -> v*rho,
  // so the two legs are rebalanced to comparable magnitudes at the hint
  // point; mixed-scale legs would otherwise be unresolvable at solver
  // precision inside a single cone block.
  void add_rsoc(const Expr& u, const Expr& v, const std::vector<Expr>& tail) {
    double hu = std::clamp(std::abs(hint_of(u)), 1e-12, 1e12);
    double hv = std::clamp(std::abs(hint_of(v)), 1e-12, 1e12);
    double rho = std::sqrt(hu / hv);
    std::vector<int> vars;
    if (rho > 4.0 || rho < 0.25) {
      vars.push_back(alias(u * (1.0 / rho)));
      vars.push_back(alias(v * rho));
    } else {
      vars.push_back(alias(u));
      vars.push_back(alias(v));
    }
    for (const auto& t : tail) vars.push_back(alias(t));
    prob_.add_rotated_soc(std::move(vars));
  }

  // ||vec||^2 <= bound.
  void add_norm2_le(const std::vector<Expr>& vec, const Expr& bound) {
    add_rsoc(bound, Expr(0.5), vec);
  }

  // ||vec||^2 <= denom * epi  (denom, epi >= 0).
  void add_quad_over_lin_le(const std::vector<Expr>& vec, const Expr& denom, const Expr& epi) {
    std::vector<Expr> scaled;
    scaled.reserve(vec.size());
    const double rt2 = std::sqrt(2.0);
    for (const auto& e : vec) scaled.push_back(e * rt2);
    add_rsoc(epi, denom, scaled);
  }

  // 1/x <= epi for x > 0, as 1 <= x * epi.
  void add_recip_le(const Expr& x, const Expr& epi) {
    add_rsoc(x, epi, {Expr(1.0), Expr(1.0)});
  }

  void minimize(const Expr& e) {
    Expr c = e;
    c.canonicalize();
    for (const auto& t : c.terms) prob_.add_objective(t.var, t.coef);
  }

  int num_cones() const { return static_cast<int>(prob_.cones.size()); }

 private:
  struct AliasKey {
    std::vector<conic::LinearTerm> terms;
    double constant;
    bool operator<(const AliasKey& o) const {
      if (constant != o.constant) return constant < o.constant;
      if (terms.size() != o.terms.size()) return terms.size() < o.terms.size();
      for (size_t i = 0; i < terms.size(); ++i) {
        if (terms[i].var != o.terms[i].var) return terms[i].var < o.terms[i].var;
        if (terms[i].coef != o.terms[i].coef) return terms[i].coef < o.terms[i].coef;
      }
      return false;
    }
  };

  conic::ConicProblem prob_;
  std::vector<double> hints_;
  std::map<double, int> const_cache_;
  std::map<AliasKey, int> alias_cache_;
};

}  // namespace eef::modeling
