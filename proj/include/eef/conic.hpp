#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>
#include <algorithm>
#include <cmath>
#include <limits>
#include <cstdlib>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>
#include <json.hpp>

#include "eef/common.hpp"

// Second-order-cone programming: a problem container with cones over plain
// variable tuples, and a primal-dual interior-point solver (Nesterov-Todd
// scaling, Mehrotra predictor-corrector, homogeneous self-dual embedding).
// Infeasibility and unboundedness are reported through certificate residuals.
namespace eef::conic {

struct LinearTerm {
  int var = 0;
  double coef = 0.0;
};

// sum_i coef_i * x_i  (op)  rhs, where op is fixed by the owning container.
struct LinearRow {
  std::vector<LinearTerm> terms;
  double rhs = 0.0;
};

enum class ConeType { Soc, RotatedSoc };

// Soc:        vars = [t, x...]    with ||x|| <= t.
// RotatedSoc: vars = [u, v, x...] with ||x||^2 <= 2 u v, u >= 0, v >= 0.
struct Cone {
  ConeType type = ConeType::Soc;
  std::vector<int> vars;
};

struct ConicProblem {
  int num_vars = 0;
  std::vector<double> objective;        // minimize objective . x
  std::vector<double> lower, upper;     // variable bounds, +-inf allowed
  std::vector<LinearRow> equalities;    // == rhs
  std::vector<LinearRow> inequalities;  // <= rhs
  std::vector<Cone> cones;

  int add_var(double lb = -kInf, double ub = kInf) {
    lower.push_back(lb);
    upper.push_back(ub);
    objective.push_back(0.0);
    return num_vars++;
  }

  void set_objective(int var, double coef) { objective.at(var) = coef; }
  void add_objective(int var, double coef) { objective.at(var) += coef; }

  void add_equality(std::vector<LinearTerm> terms, double rhs) {
    equalities.push_back({std::move(terms), rhs});
  }

  void add_inequality(std::vector<LinearTerm> terms, double rhs) {
    inequalities.push_back({std::move(terms), rhs});
  }

  void add_soc(std::vector<int> vars) {
    if (vars.empty()) throw ArgumentError("add_soc: need at least the head variable");
    cones.push_back({ConeType::Soc, std::move(vars)});
  }

  void add_rotated_soc(std::vector<int> vars) {
    if (vars.size() < 2) throw ArgumentError("add_rotated_soc: need the two head variables");
    cones.push_back({ConeType::RotatedSoc, std::move(vars)});
  }

  void validate() const {
    if (static_cast<int>(objective.size()) != num_vars ||
        static_cast<int>(lower.size()) != num_vars || static_cast<int>(upper.size()) != num_vars)
      throw ArgumentError("ConicProblem: objective/bounds length must equal num_vars");
    auto check_terms = [&](const std::vector<LinearTerm>& ts) {
      for (const auto& t : ts)
        if (t.var < 0 || t.var >= num_vars) throw ArgumentError("ConicProblem: bad variable index");
    };
    for (const auto& row : equalities) check_terms(row.terms);
    for (const auto& row : inequalities) check_terms(row.terms);
    for (const auto& c : cones) {
      size_t min_size = c.type == ConeType::Soc ? 1 : 2;
      if (c.vars.size() < min_size) throw ArgumentError("ConicProblem: malformed cone");
      for (int v : c.vars)
        if (v < 0 || v >= num_vars) throw ArgumentError("ConicProblem: cone references bad variable");
    }
    for (int v = 0; v < num_vars; ++v)
      if (lower[v] > upper[v]) throw ArgumentError("ConicProblem: empty bound interval");
  }

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["num_vars"] = num_vars;
    j["objective"] = objective;
    j["lower"] = lower;
    j["upper"] = upper;
    auto rows = [](const std::vector<LinearRow>& rs) {
      nlohmann::json out = nlohmann::json::array();
      for (const auto& r : rs) {
        nlohmann::json terms = nlohmann::json::array();
        for (const auto& t : r.terms) terms.push_back({t.var, t.coef});
        out.push_back({{"terms", terms}, {"rhs", r.rhs}});
      }
      return out;
    };
    j["equalities"] = rows(equalities);
    j["inequalities"] = rows(inequalities);
    nlohmann::json cs = nlohmann::json::array();
    for (const auto& c : cones)
      cs.push_back({{"type", c.type == ConeType::Soc ? "soc" : "rsoc"}, {"vars", c.vars}});
    j["cones"] = cs;
    return j;
  }

  // Sparse triplet text: one section per component, rows of "i j value".
  std::string to_triplet_text() const {
    std::ostringstream os;
    os.precision(17);
    os << "# vars " << num_vars << "\n# objective (index value)\n";
    for (int v = 0; v < num_vars; ++v)
      if (objective[v] != 0.0) os << v << " " << objective[v] << "\n";
    os << "# bounds (index lower upper)\n";
    for (int v = 0; v < num_vars; ++v)
      if (lower[v] != -kInf || upper[v] != kInf) os << v << " " << lower[v] << " " << upper[v] << "\n";
    auto section = [&](const char* name, const std::vector<LinearRow>& rs) {
      os << "# " << name << " (row var coef), rhs per row\n";
      for (size_t i = 0; i < rs.size(); ++i) {
        for (const auto& t : rs[i].terms) os << i << " " << t.var << " " << t.coef << "\n";
        os << i << " rhs " << rs[i].rhs << "\n";
      }
    };
    section("equalities", equalities);
    section("inequalities", inequalities);
    os << "# cones (type vars...)\n";
    for (const auto& c : cones) {
      os << (c.type == ConeType::Soc ? "soc" : "rsoc");
      for (int v : c.vars) os << " " << v;
      os << "\n";
    }
    return os.str();
  }
};

enum class SolveStatus { Optimal, Infeasible, Unbounded, MaxIterations, NumericalFailure };

inline const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal: return "optimal";
    case SolveStatus::Infeasible: return "infeasible";
    case SolveStatus::Unbounded: return "unbounded";
    case SolveStatus::MaxIterations: return "max_iter";
    case SolveStatus::NumericalFailure: return "numerical_failure";
  }
  return "unknown";
}

struct ConicSolution {
  SolveStatus status = SolveStatus::NumericalFailure;
  Eigen::VectorXd x;          // primal values, original variable order
  Eigen::VectorXd dual_eq;    // multipliers of the surviving equalities (internal form)
  Eigen::VectorXd dual_cone;  // multipliers of the lowered cone/bound rows (internal form)
  double objective = std::numeric_limits<double>::quiet_NaN();
  double dual_objective = std::numeric_limits<double>::quiet_NaN();
  double duality_gap = std::numeric_limits<double>::quiet_NaN();
  double primal_residual = std::numeric_limits<double>::quiet_NaN();
  double dual_residual = std::numeric_limits<double>::quiet_NaN();
  int iterations = 0;
};

struct SolverOptions {
  double feas_tol = 1e-8;
  double gap_abs_tol = 1e-8;
  double gap_rel_tol = 1e-8;
  int max_iterations = 120;
  double static_reg = 1e-13;
  int refine_steps = 6;
};

// Affine expression sum(coef_i x_i) + constant; used by the standard-cone
// image of a rotated cone and by the violation checker.
struct AffineExpr {
  std::vector<LinearTerm> terms;
  double constant = 0.0;

  double eval(const Eigen::VectorXd& x) const {
    double v = constant;
    for (const auto& t : terms) v += t.coef * x[t.var];
    return v;
  }
};

// ||tail|| <= head over affine expressions of the same variables.
struct AffineSoc {
  AffineExpr head;
  std::vector<AffineExpr> tail;

  bool contains(const Eigen::VectorXd& x, double tol = 0.0) const {
    double h = head.eval(x);
    double nrm2 = 0.0;
    for (const auto& t : tail) nrm2 += sq(t.eval(x));
    return std::sqrt(nrm2) <= h + tol;
  }
};

// Standard-cone image of ||x||^2 <= 2uv, u,v >= 0:
//   ||(sqrt(2) x, u - v)|| <= u + v.
inline AffineSoc rotated_to_standard(const Cone& cone) {
  if (cone.type != ConeType::RotatedSoc || cone.vars.size() < 2)
    throw ArgumentError("rotated_to_standard: expects a rotated cone");
  int u = cone.vars[0], v = cone.vars[1];
  AffineSoc out;
  out.head.terms = {{u, 1.0}, {v, 1.0}};
  const double rt2 = std::sqrt(2.0);
  for (size_t i = 2; i < cone.vars.size(); ++i) out.tail.push_back({{{cone.vars[i], rt2}}, 0.0});
  out.tail.push_back({{{u, 1.0}, {v, -1.0}}, 0.0});
  return out;
}

inline bool rotated_member(const Cone& cone, const Eigen::VectorXd& x, double tol = 0.0) {
  double u = x[cone.vars[0]], v = x[cone.vars[1]];
  if (u < -tol || v < -tol) return false;
  double nrm2 = 0.0;
  for (size_t i = 2; i < cone.vars.size(); ++i) nrm2 += sq(x[cone.vars[i]]);
  return nrm2 <= 2.0 * u * v + tol;
}

// Largest constraint violation of x over bounds, linear rows and cones.
inline double max_violation(const ConicProblem& p, const Eigen::VectorXd& x) {
  double viol = 0.0;
  for (int v = 0; v < p.num_vars; ++v) {
    if (p.lower[v] != -kInf) viol = std::max(viol, p.lower[v] - x[v]);
    if (p.upper[v] != kInf) viol = std::max(viol, x[v] - p.upper[v]);
  }
  auto row_val = [&](const LinearRow& r) {
    double s = 0.0;
    for (const auto& t : r.terms) s += t.coef * x[t.var];
    return s;
  };
  for (const auto& r : p.equalities) viol = std::max(viol, std::abs(row_val(r) - r.rhs));
  for (const auto& r : p.inequalities) viol = std::max(viol, row_val(r) - r.rhs);
  for (const auto& c : p.cones) {
    if (c.type == ConeType::Soc) {
      double nrm2 = 0.0;
      for (size_t i = 1; i < c.vars.size(); ++i) nrm2 += sq(x[c.vars[i]]);
      viol = std::max(viol, std::sqrt(nrm2) - x[c.vars[0]]);
    } else {
      double u = x[c.vars[0]], v = x[c.vars[1]];
      double nrm2 = 0.0;
      for (size_t i = 2; i < c.vars.size(); ++i) nrm2 += sq(x[c.vars[i]]);
      viol = std::max(viol, std::max({-u, -v, nrm2 - 2.0 * u * v}));
    }
  }
  return viol;
}

namespace detail {

struct SparseRow {
  std::map<int, double> a;
  double b = 0.0;
};

// Post-lowering standard form: min c.x s.t. eq rows = b, g rows: a.x + s = b
// with s in (LP block of lp_dim rows) x (SOC blocks of soc_dims rows).
struct Lowered {
  int n_orig = 0;
  Eigen::VectorXd c_orig;
  std::vector<SparseRow> eq;
  std::vector<SparseRow> g;
  int lp_dim = 0;
  std::vector<int> soc_dims;
  double obj_offset = 0.0;

  struct Elim {
    int var;
    std::vector<std::pair<int, double>> expr;
    double constant;
  };
  std::vector<Elim> elims;  // in elimination order
};

inline Lowered lower_problem(const ConicProblem& p) {
  Lowered lo;
  lo.n_orig = p.num_vars;
  lo.c_orig = Eigen::Map<const Eigen::VectorXd>(p.objective.data(), p.num_vars);

  for (const auto& r : p.equalities) {
    SparseRow row;
    for (const auto& t : r.terms) row.a[t.var] += t.coef;
    row.b = r.rhs;
    lo.eq.push_back(std::move(row));
  }
  // Fixed variables become equalities so presolve can fold them away.
  for (int v = 0; v < p.num_vars; ++v)
    if (p.lower[v] == p.upper[v] && p.lower[v] != -kInf) {
      SparseRow row;
      row.a[v] = 1.0;
      row.b = p.lower[v];
      lo.eq.push_back(std::move(row));
    }

  std::vector<SparseRow> lp_rows;
  for (const auto& r : p.inequalities) {
    SparseRow row;
    for (const auto& t : r.terms) row.a[t.var] += t.coef;
    row.b = r.rhs;
    lp_rows.push_back(std::move(row));
  }
  for (int v = 0; v < p.num_vars; ++v) {
    if (p.lower[v] == p.upper[v]) continue;  // handled as equality
    if (p.lower[v] != -kInf) {
      SparseRow row;
      row.a[v] = -1.0;
      row.b = -p.lower[v];
      lp_rows.push_back(std::move(row));
    }
    if (p.upper[v] != kInf) {
      SparseRow row;
      row.a[v] = 1.0;
      row.b = p.upper[v];
      lp_rows.push_back(std::move(row));
    }
  }

  std::vector<std::vector<SparseRow>> soc_blocks;
  for (const auto& c : p.cones) {
    if (c.type == ConeType::Soc) {
      if (c.vars.size() == 1) {  // ||()|| <= t is just t >= 0
        SparseRow row;
        row.a[c.vars[0]] = -1.0;
        lp_rows.push_back(std::move(row));
        continue;
      }
      std::vector<SparseRow> block;
      for (int v : c.vars) {
        SparseRow row;
        row.a[v] = -1.0;
        block.push_back(std::move(row));  // s_i = x_i
      }
      soc_blocks.push_back(std::move(block));
    } else {
      AffineSoc img = rotated_to_standard(c);
      std::vector<SparseRow> block;
      auto push = [&](const AffineExpr& e) {
        SparseRow row;
        for (const auto& t : e.terms) row.a[t.var] -= t.coef;  // s = expr => a = -coef, b = const
        row.b = e.constant;
        block.push_back(std::move(row));
      };
      push(img.head);
      for (const auto& t : img.tail) push(t);
      soc_blocks.push_back(std::move(block));
    }
  }

  lo.lp_dim = static_cast<int>(lp_rows.size());
  lo.g = std::move(lp_rows);
  for (auto& blk : soc_blocks) {
    lo.soc_dims.push_back(static_cast<int>(blk.size()));
    for (auto& row : blk) lo.g.push_back(std::move(row));
  }
  return lo;
}

// Eliminate any variable that appears in exactly one equality: substitute its
// defining expression into every other row and the objective. Repeats until
// no candidate remains; records substitutions for back-filling the solution.
inline void presolve(Lowered& lo) {
  int n = lo.n_orig;
  std::vector<int> eq_count(n, 0);
  for (const auto& row : lo.eq)
    for (const auto& [v, a] : row.a)
      if (a != 0.0) eq_count[v]++;

  std::vector<char> removed_row(lo.eq.size(), 0);
  std::vector<char> removed_var(n, 0);
  std::vector<int> owner(n, -1);
  for (size_t ri = 0; ri < lo.eq.size(); ++ri)
    for (const auto& [v, a] : lo.eq[ri].a)
      if (a != 0.0 && eq_count[v] == 1) owner[v] = static_cast<int>(ri);

  bool changed = true;
  while (changed) {
    changed = false;
    for (int v = 0; v < n; ++v) {
      if (removed_var[v] || eq_count[v] != 1 || owner[v] < 0) continue;
      int ri = owner[v];
      if (removed_row[ri]) continue;
      auto& row = lo.eq[ri];
      auto it = row.a.find(v);
      if (it == row.a.end() || it->second == 0.0) continue;
      double piv = it->second;
      double row_max = 0.0;
      for (const auto& [u, a] : row.a) row_max = std::max(row_max, std::abs(a));
      if (std::abs(piv) < 1e-7 * row_max || std::abs(piv) < 1e-300) continue;

      Lowered::Elim e;
      e.var = v;
      e.constant = row.b / piv;
      for (const auto& [u, a] : row.a)
        if (u != v && a != 0.0) e.expr.push_back({u, -a / piv});

      // Substitute x_v = e.constant + e.expr . x everywhere else.
      auto substitute = [&](SparseRow& target) {
        auto tv = target.a.find(v);
        if (tv == target.a.end() || tv->second == 0.0) return;
        double g = tv->second;
        target.a.erase(tv);
        target.b -= g * e.constant;
        for (const auto& [u, coef] : e.expr) target.a[u] += g * coef;
      };
      for (auto& grow : lo.g) substitute(grow);
      for (size_t rj = 0; rj < lo.eq.size(); ++rj)
        if (!removed_row[rj] && rj != static_cast<size_t>(ri)) substitute(lo.eq[rj]);
      if (lo.c_orig[v] != 0.0) {
        double cv = lo.c_orig[v];
        lo.obj_offset += cv * e.constant;
        for (const auto& [u, coef] : e.expr) lo.c_orig[u] += cv * coef;
        lo.c_orig[v] = 0.0;
      }

      removed_row[ri] = 1;
      removed_var[v] = 1;
      // Other variables of the removed row may become candidates now.
      for (const auto& [u, a] : row.a)
        if (u != v && a != 0.0 && !removed_var[u]) {
          if (--eq_count[u] == 1) {
            for (size_t rj = 0; rj < lo.eq.size(); ++rj) {
              if (removed_row[rj]) continue;
              if (lo.eq[rj].a.count(u) && lo.eq[rj].a[u] != 0.0) owner[u] = static_cast<int>(rj);
            }
            changed = true;
          }
        }
      eq_count[v] = 0;
      lo.elims.push_back(std::move(e));
      changed = true;
    }
  }

  std::vector<SparseRow> kept;
  for (size_t ri = 0; ri < lo.eq.size(); ++ri)
    if (!removed_row[ri]) kept.push_back(std::move(lo.eq[ri]));
  lo.eq = std::move(kept);
}

struct Dense {
  Eigen::VectorXd c;
  Eigen::MatrixXd A;  // p x n
  Eigen::VectorXd b;
  Eigen::MatrixXd G;  // m x n
  Eigen::VectorXd h;
  int lp_dim = 0;
  std::vector<int> soc_dims;
  std::vector<int> var_map;      // dense column -> original variable
  Eigen::VectorXd col_scale;     // x_orig = col_scale .* x_scaled
  double c_scale = 1.0, rhs_scale = 1.0;
  double obj_offset = 0.0;
  bool inconsistent = false;     // contradictory equalities found during lowering
};

inline Dense densify(const Lowered& lo) {
  Dense d;
  d.obj_offset = lo.obj_offset;
  std::vector<char> used(lo.n_orig, 0);
  for (const auto& row : lo.eq)
    for (const auto& [v, a] : row.a)
      if (a != 0.0) used[v] = 1;
  for (const auto& row : lo.g)
    for (const auto& [v, a] : row.a)
      if (a != 0.0) used[v] = 1;
  for (int v = 0; v < lo.n_orig; ++v)
    if (lo.c_orig[v] != 0.0) used[v] = 1;
  std::vector<char> eliminated(lo.n_orig, 0);
  for (const auto& e : lo.elims) eliminated[e.var] = 1;

  std::vector<int> col_of(lo.n_orig, -1);
  for (int v = 0; v < lo.n_orig; ++v)
    if (used[v] && !eliminated[v]) {
      col_of[v] = static_cast<int>(d.var_map.size());
      d.var_map.push_back(v);
    }
  int n = static_cast<int>(d.var_map.size());

  std::vector<SparseRow> eq_rows;
  for (const auto& row : lo.eq) {
    bool empty = true;
    for (const auto& [v, a] : row.a)
      if (std::abs(a) > 1e-14) empty = false;
    if (empty) {
      if (std::abs(row.b) > 1e-9) d.inconsistent = true;
      continue;
    }
    eq_rows.push_back(row);
  }

  int p = static_cast<int>(eq_rows.size());
  int m = static_cast<int>(lo.g.size());
  d.c.setZero(n);
  for (int v = 0; v < lo.n_orig; ++v)
    if (col_of[v] >= 0) d.c[col_of[v]] = lo.c_orig[v];
  d.A.setZero(p, n);
  d.b.setZero(p);
  for (int i = 0; i < p; ++i) {
    for (const auto& [v, a] : eq_rows[i].a)
      if (col_of[v] >= 0) d.A(i, col_of[v]) = a;
    d.b[i] = eq_rows[i].b;
  }
  d.G.setZero(m, n);
  d.h.setZero(m);
  for (int i = 0; i < m; ++i) {
    for (const auto& [v, a] : lo.g[i].a)
      if (col_of[v] >= 0) d.G(i, col_of[v]) = a;
    d.h[i] = lo.g[i].b;
  }
  d.lp_dim = lo.lp_dim;
  d.soc_dims = lo.soc_dims;
  d.col_scale = Eigen::VectorXd::Ones(n);
  return d;
}

// Ruiz-style equilibration; SOC blocks share one row factor so the cone
// geometry is preserved.
inline void equilibrate(Dense& d) {
  int n = static_cast<int>(d.c.size());
  int p = static_cast<int>(d.b.size());
  int m = static_cast<int>(d.h.size());
  if (n == 0) return;
  for (int pass = 0; pass < 3; ++pass) {
    for (int i = 0; i < p; ++i) {
      double s = std::max(d.A.row(i).cwiseAbs().maxCoeff(), std::abs(d.b[i]));
      if (s > 0) {
        double f = 1.0 / std::sqrt(s);
        d.A.row(i) *= f;
        d.b[i] *= f;
      }
    }
    int row = d.lp_dim;
    for (int i = 0; i < d.lp_dim; ++i) {
      double s = std::max(d.G.row(i).cwiseAbs().maxCoeff(), std::abs(d.h[i]));
      if (s > 0) {
        double f = 1.0 / std::sqrt(s);
        d.G.row(i) *= f;
        d.h[i] *= f;
      }
    }
    for (int dim : d.soc_dims) {
      double s = 0.0;
      for (int i = row; i < row + dim; ++i)
        s = std::max({s, d.G.row(i).cwiseAbs().maxCoeff(), std::abs(d.h[i])});
      if (s > 0) {
        double f = 1.0 / std::sqrt(s);
        d.G.middleRows(row, dim) *= f;
        d.h.segment(row, dim) *= f;
      }
      row += dim;
    }
    for (int jcol = 0; jcol < n; ++jcol) {
      double s = 0.0;
      if (p > 0) s = std::max(s, d.A.col(jcol).cwiseAbs().maxCoeff());
      if (m > 0) s = std::max(s, d.G.col(jcol).cwiseAbs().maxCoeff());
      if (s > 0) {
        double f = 1.0 / std::sqrt(s);
        if (p > 0) d.A.col(jcol) *= f;
        if (m > 0) d.G.col(jcol) *= f;
        d.col_scale[jcol] *= f;
        d.c[jcol] *= f;
      }
    }
  }
  d.c_scale = std::max(1.0, d.c.cwiseAbs().maxCoeff());
  d.c /= d.c_scale;
  double rn = 1.0;
  if (p > 0) rn = std::max(rn, d.b.cwiseAbs().maxCoeff());
  if (m > 0) rn = std::max(rn, d.h.cwiseAbs().maxCoeff());
  d.rhs_scale = rn;
  d.b /= rn;
  d.h /= rn;
}

// Cone block layout over a length-m vector: one LP block then SOC blocks.
struct BlockLayout {
  int lp_dim = 0;
  std::vector<int> soc_dims;
  int m = 0;
  int degree = 0;  // lp_dim + number of SOC blocks

  void init(int lp, std::vector<int> socs) {
    lp_dim = lp;
    soc_dims = std::move(socs);
    m = lp;
    for (int d : soc_dims) m += d;
    degree = lp + static_cast<int>(soc_dims.size());
  }

  Eigen::VectorXd identity() const {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(m);
    e.head(lp_dim).setOnes();
    int row = lp_dim;
    for (int d : soc_dims) {
      e[row] = 1.0;
      row += d;
    }
    return e;
  }

  // Minimum shift t such that u + t*e lies in the cone (0 if interior).
  double shift_needed(const Eigen::VectorXd& u) const {
    double t = 0.0;
    for (int i = 0; i < lp_dim; ++i) t = std::max(t, -u[i]);
    int row = lp_dim;
    for (int d : soc_dims) {
      double tail = u.segment(row + 1, d - 1).norm();
      t = std::max(t, tail - u[row]);
      row += d;
    }
    return t;
  }

  // Max step alpha with u + alpha*du staying in the cone; may be +inf.
  double max_step(const Eigen::VectorXd& u, const Eigen::VectorXd& du) const {
    double alpha = kInf;
    for (int i = 0; i < lp_dim; ++i)
      if (du[i] < 0.0) alpha = std::min(alpha, -u[i] / du[i]);
    int row = lp_dim;
    for (int d : soc_dims) {
      double u0 = u[row], d0 = du[row];
      auto u1 = u.segment(row + 1, d - 1);
      auto d1 = du.segment(row + 1, d - 1);
      double a = d0 * d0 - d1.squaredNorm();
      double bq = u0 * d0 - u1.dot(d1);
      double cq = u0 * u0 - u1.squaredNorm();
      cq = std::max(cq, 0.0);
      // f(alpha) = cq + 2 bq alpha + a alpha^2 >= 0 and u0 + alpha d0 >= 0.
      double root = kInf;
      if (std::abs(a) < 1e-300) {
        if (bq < 0.0) root = -cq / (2.0 * bq);
      } else {
        double disc = bq * bq - a * cq;
        if (disc >= 0.0) {
          // stable roots of a t^2 + 2 b t + c: q/a and c/q with q = -(b + sgn(b) sqrt(disc))
          double sd = std::sqrt(disc);
          double qq = -(bq + std::copysign(sd, bq));
          double ra = qq / a;
          double rb = qq != 0.0 ? cq / qq : kInf;
          double r1 = std::min(ra, rb), r2 = std::max(ra, rb);
          if (a > 0.0) {
            // feasible outside (r1, r2): first crossing is r1 when positive
            if (r1 > 0.0) root = r1;
            else if (r2 > 0.0 && bq < 0.0) root = 0.0;  // starting on the boundary, moving in
          } else {
            // feasible inside [r1, r2]
            root = r2 > 0.0 ? r2 : 0.0;
          }
        }
      }
      if (d0 < 0.0) root = std::min(root, -u0 / d0);
      alpha = std::min(alpha, root);
      row += d;
    }
    return alpha;
  }
};

// Nesterov-Todd scaling state: W z = W^{-1} s = lambda.
struct NtScaling {
  const BlockLayout* layout = nullptr;
  Eigen::VectorXd lp_w;                 // sqrt(s_i / z_i)
  std::vector<double> soc_eta;
  std::vector<Eigen::VectorXd> soc_wbar;  // unit hyperbolic points
  Eigen::VectorXd lambda;

  void compute(const BlockLayout& lay, const Eigen::VectorXd& s, const Eigen::VectorXd& z) {
    layout = &lay;
    lp_w.resize(lay.lp_dim);
    for (int i = 0; i < lay.lp_dim; ++i) {
      double si = std::max(s[i], 1e-300), zi = std::max(z[i], 1e-300);
      lp_w[i] = std::clamp(std::sqrt(si / zi), 1e-10, 1e10);
    }
    soc_eta.assign(lay.soc_dims.size(), 1.0);
    soc_wbar.assign(lay.soc_dims.size(), Eigen::VectorXd());
    int row = lay.lp_dim;
    for (size_t bclk = 0; bclk < lay.soc_dims.size(); ++bclk) {
      int d = lay.soc_dims[bclk];
      Eigen::VectorXd sb = s.segment(row, d), zb = z.segment(row, d);
      // Factored residues avoid the cancellation in s0^2 - ||s1||^2 near the
      // boundary; the relative floor keeps eta finite there.
      auto residue = [](const Eigen::VectorXd& u) {
        double tail = u.tail(u.size() - 1).norm();
        double raw = (u[0] - tail) * (u[0] + tail);
        return std::max(raw, 1e-14 * std::max(u[0] * u[0], 1e-300));
      };
      double sres = residue(sb), zres = residue(zb);
      double snorm = std::sqrt(sres), znorm = std::sqrt(zres);
      Eigen::VectorXd sbar = sb / snorm, zbar = zb / znorm;
      double gamma = std::sqrt(std::max((1.0 + sbar.dot(zbar)) * 0.5, 1e-14));
      Eigen::VectorXd wbar(d);
      wbar[0] = (sbar[0] + zbar[0]) / (2.0 * gamma);
      wbar.tail(d - 1) = (sbar.tail(d - 1) - zbar.tail(d - 1)) / (2.0 * gamma);
      soc_eta[bclk] = std::clamp(std::sqrt(snorm / znorm), 1e-10, 1e10);
      soc_wbar[bclk] = std::move(wbar);
      row += d;
    }
    lambda = apply(z, false);
  }

  // W u (inverse = false) or W^{-1} u (inverse = true); W is symmetric.
  // SOC blocks use W = eta * [ w0 w1'; w1  I + w1 w1'/(1+w0) ] and the
  // inverse flips the sign of w1 (the hyperbolic inverse of a unit point).
  Eigen::VectorXd apply(const Eigen::VectorXd& u, bool inverse) const {
    const auto& lay = *layout;
    Eigen::VectorXd out(lay.m);
    for (int i = 0; i < lay.lp_dim; ++i) out[i] = inverse ? u[i] / lp_w[i] : u[i] * lp_w[i];
    int row = lay.lp_dim;
    for (size_t bclk = 0; bclk < lay.soc_dims.size(); ++bclk) {
      int d = lay.soc_dims[bclk];
      const auto& wbar = soc_wbar[bclk];
      double w0 = wbar[0];
      auto w1 = wbar.tail(d - 1);
      double u0 = u[row];
      auto u1 = u.segment(row + 1, d - 1);
      double t1 = w1.dot(u1);
      double sgn = inverse ? -1.0 : 1.0;
      double scale = inverse ? 1.0 / soc_eta[bclk] : soc_eta[bclk];
      out[row] = scale * (w0 * u0 + sgn * t1);
      out.segment(row + 1, d - 1) = scale * (u1 + (sgn * u0 + t1 / (1.0 + w0)) * w1);
      row += d;
    }
    return out;
  }

};

inline Eigen::VectorXd jordan_mul(const BlockLayout& lay, const Eigen::VectorXd& u,
                                  const Eigen::VectorXd& v) {
  Eigen::VectorXd out(lay.m);
  for (int i = 0; i < lay.lp_dim; ++i) out[i] = u[i] * v[i];
  int row = lay.lp_dim;
  for (int d : lay.soc_dims) {
    auto ub = u.segment(row, d);
    auto vb = v.segment(row, d);
    out[row] = ub.dot(vb);
    out.segment(row + 1, d - 1) = ub[0] * vb.tail(d - 1) + vb[0] * ub.tail(d - 1);
    row += d;
  }
  return out;
}

// Solve lambda o out = d for out.
inline Eigen::VectorXd jordan_div(const BlockLayout& lay, const Eigen::VectorXd& lambda,
                                  const Eigen::VectorXd& d) {
  Eigen::VectorXd out(lay.m);
  for (int i = 0; i < lay.lp_dim; ++i) out[i] = d[i] / lambda[i];
  int row = lay.lp_dim;
  for (int dim : lay.soc_dims) {
    double l0 = lambda[row];
    auto l1 = lambda.segment(row + 1, dim - 1);
    double d0 = d[row];
    auto d1 = d.segment(row + 1, dim - 1);
    double den = l0 * l0 - l1.squaredNorm();
    double x0 = (l0 * d0 - l1.dot(d1)) / den;
    out[row] = x0;
    out.segment(row + 1, dim - 1) = (d1 - x0 * l1) / l0;
    row += dim;
  }
  return out;
}

// Regularized quasi-definite KKT system
//   [ dI   A'     G'    ] [dx]   [bx]
//   [ A   -dI     0     ] [dy] = [by]
//   [ G    0   -W^2-dI  ] [dz]   [bz]
// factored by sparse LDL' (no pivoting needed for quasi-definite matrices);
// iterative refinement against the unregularized operator recovers accuracy.
struct KktSolver {
  const Dense* d = nullptr;
  const NtScaling* nt = nullptr;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>, Eigen::Lower> ldlt;
  bool analyzed = false;
  double reg = 0.0;
  int refine_steps = 2;
  int n = 0, p = 0, m = 0;

  bool factor(const Dense& dense, const NtScaling& scaling, double base_reg) {
    d = &dense;
    nt = &scaling;
    n = static_cast<int>(dense.c.size());
    p = static_cast<int>(dense.b.size());
    m = static_cast<int>(dense.h.size());
    reg = std::max(base_reg, 1e-12);
    const auto& lay = *scaling.layout;
    for (int attempt = 0; attempt < 6; ++attempt) {
      std::vector<Eigen::Triplet<double>> trips;
      trips.reserve(static_cast<size_t>(n + p + m) * 6);
      for (int i = 0; i < n; ++i) trips.emplace_back(i, i, reg);
      for (int i = 0; i < p; ++i) {
        for (int j = 0; j < n; ++j)
          if (dense.A(i, j) != 0.0) trips.emplace_back(n + i, j, dense.A(i, j));
        trips.emplace_back(n + i, n + i, -reg);
      }
      int base = n + p;
      for (int i = 0; i < m; ++i)
        for (int j = 0; j < n; ++j)
          if (dense.G(i, j) != 0.0) trips.emplace_back(base + i, j, dense.G(i, j));
      // -W^2 blocks: diagonal for the LP part, eta^2 (2 wbar wbar' - J) per cone
      for (int i = 0; i < lay.lp_dim; ++i)
        trips.emplace_back(base + i, base + i, -scaling.lp_w[i] * scaling.lp_w[i] - reg);
      int row = lay.lp_dim;
      for (size_t blk = 0; blk < lay.soc_dims.size(); ++blk) {
        int dim = lay.soc_dims[blk];
        const auto& wbar = scaling.soc_wbar[blk];
        double eta2 = scaling.soc_eta[blk] * scaling.soc_eta[blk];
        // full block pattern always emitted so the symbolic factor is reusable
        for (int a = 0; a < dim; ++a)
          for (int b2 = 0; b2 <= a; ++b2) {
            double v = 2.0 * wbar[a] * wbar[b2];
            if (a == b2) v -= a == 0 ? 1.0 : -1.0;  // J diagonal
            v *= eta2;
            if (a == b2) v += reg;
            trips.emplace_back(base + row + a, base + row + b2, -v);
          }
        row += dim;
      }
      Eigen::SparseMatrix<double> K(n + p + m, n + p + m);
      K.setFromTriplets(trips.begin(), trips.end());
      if (!analyzed) {
        ldlt.analyzePattern(K);
        analyzed = true;
      }
      ldlt.factorize(K);
      if (ldlt.info() == Eigen::Success) return true;
      reg *= 100.0;
      analyzed = false;  // fill pattern unchanged, but stay safe after failure
    }
    return false;
  }

  void solve_once(const Eigen::VectorXd& bx, const Eigen::VectorXd& by, const Eigen::VectorXd& bz,
                  Eigen::VectorXd& dx, Eigen::VectorXd& dy, Eigen::VectorXd& dz) const {
    Eigen::VectorXd rhs(n + p + m);
    rhs.head(n) = bx;
    rhs.segment(n, p) = by;
    rhs.tail(m) = bz;
    Eigen::VectorXd sol = ldlt.solve(rhs);
    dx = sol.head(n);
    dy = sol.segment(n, p);
    dz = sol.tail(m);
  }

  void residual(const Eigen::VectorXd& bx, const Eigen::VectorXd& by, const Eigen::VectorXd& bz,
                const Eigen::VectorXd& dx, const Eigen::VectorXd& dy, const Eigen::VectorXd& dz,
                Eigen::VectorXd& ex, Eigen::VectorXd& ey, Eigen::VectorXd& ez) const {
    ex = bx - (d->G.transpose() * dz);
    if (d->b.size() > 0) ex -= d->A.transpose() * dy;
    ey = by;
    if (d->b.size() > 0) ey -= d->A * dx;
    ez = bz - (d->G * dx - nt->apply(nt->apply(dz, false), false));
  }

  void solve(const Eigen::VectorXd& bx, const Eigen::VectorXd& by, const Eigen::VectorXd& bz,
             Eigen::VectorXd& dx, Eigen::VectorXd& dy, Eigen::VectorXd& dz) const {
    solve_once(bx, by, bz, dx, dy, dz);
    double rhs_norm = std::max({bx.norm(), by.norm(), bz.norm(), 1e-300});
    double prev = kInf;
    for (int it = 0; it < refine_steps; ++it) {
      Eigen::VectorXd ex, ey, ez, cx, cy, cz;
      residual(bx, by, bz, dx, dy, dz, ex, ey, ez);
      double err = std::max({ex.norm(), ey.norm(), ez.norm()});
      if (err <= 1e-13 * rhs_norm || err >= prev) break;
      prev = err;
      solve_once(ex, ey, ez, cx, cy, cz);
      dx += cx;
      if (dy.size() > 0) dy += cy;
      dz += cz;
    }
  }
};

struct IpmResult {
  SolveStatus status = SolveStatus::NumericalFailure;
  Eigen::VectorXd x, y, z, s;
  double tau = 1.0, kappa = 1.0;
  double pres = kInf, dres = kInf, gap = kInf;
  int iterations = 0;
};

inline IpmResult ipm(const Dense& d, const SolverOptions& opt) {
  IpmResult res;
  int n = static_cast<int>(d.c.size());
  int p = static_cast<int>(d.b.size());
  BlockLayout lay;
  lay.init(d.lp_dim, d.soc_dims);
  int m = lay.m;
  Eigen::VectorXd e = lay.identity();

  double bnorm = std::max(1.0, d.b.norm());
  double hnorm = std::max(1.0, d.h.norm());
  double cnorm = std::max(1.0, d.c.norm());

  // Unit-scaling initial point.
  Eigen::VectorXd x = Eigen::VectorXd::Zero(n), y = Eigen::VectorXd::Zero(p);
  Eigen::VectorXd s = e, z = e;
  KktSolver kkt;
  kkt.refine_steps = opt.refine_steps;
  {
    NtScaling unit;  // s = z = e gives W = I
    unit.compute(lay, e, e);
    if (kkt.factor(d, unit, std::max(opt.static_reg, 1e-12))) {
      Eigen::VectorXd dx, dy, dz;
      kkt.solve(Eigen::VectorXd::Zero(n), d.b, d.h, dx, dy, dz);
      x = dx;
      Eigen::VectorXd shat = -dz;  // s = h - Gx
      double t = lay.shift_needed(shat);
      s = t >= -1e-12 ? (shat + (1.0 + t) * e).eval() : shat;
      kkt.solve(-d.c, Eigen::VectorXd::Zero(p), Eigen::VectorXd::Zero(m), dx, dy, dz);
      y = dy;
      Eigen::VectorXd zhat = dz;
      t = lay.shift_needed(zhat);
      z = t >= -1e-12 ? (zhat + (1.0 + t) * e).eval() : zhat;
    }
  }
  double tau = 1.0, kappa = 1.0;

  auto snapshot = [&](SolveStatus st, double pres, double dres, double gap, int iter) {
    res.status = st;
    res.x = x;
    res.y = y;
    res.z = z;
    res.s = s;
    res.tau = tau;
    res.kappa = kappa;
    res.pres = pres;
    res.dres = dres;
    res.gap = gap;
    res.iterations = iter;
  };

  double best_score = kInf;
  IpmResult best;
  int stalls = 0;
  int polish_left = 1;
  bool converged = false;

  for (int iter = 0; iter <= opt.max_iterations; ++iter) {
    Eigen::VectorXd r1 = d.G.transpose() * z + d.c * tau;
    if (p > 0) r1 += d.A.transpose() * y;
    Eigen::VectorXd r2 = -d.b * tau;
    if (p > 0) r2 += d.A * x;
    Eigen::VectorXd r3 = s + d.G * x - d.h * tau;
    double cx = d.c.dot(x);
    double byhz = (p > 0 ? d.b.dot(y) : 0.0) + d.h.dot(z);
    double r4 = kappa + cx + byhz;

    double pres = std::max(r2.norm() / bnorm, r3.norm() / hnorm) / tau;
    double dres = r1.norm() / cnorm / tau;
    double gap = s.dot(z) / (tau * tau);
    double pcost = cx / tau;
    double relgap = gap / std::max(1.0, std::abs(pcost));

    if (!std::isfinite(pres) || !std::isfinite(dres) || !std::isfinite(gap)) {
      if (converged) {
        best.status = SolveStatus::Optimal;
        return best;
      }
      if (best_score < kInf) {
        best.status = SolveStatus::NumericalFailure;
        best.iterations = iter;
        return best;
      }
      snapshot(SolveStatus::NumericalFailure, pres, dres, gap, iter);
      return res;
    }

    double score = std::max({pres, dres, relgap});
    if (score < best_score) {
      best_score = score;
      snapshot(SolveStatus::MaxIterations, pres, dres, gap, iter);
      best = res;
    }

#ifdef EEF_IPM_TRACE
    std::fprintf(stderr, "ipm it=%03d mu=%.3e pres=%.3e dres=%.3e gap=%.3e tau=%.3e kap=%.3e\n",
                 iter, (s.dot(z) + tau * kappa) / (lay.degree + 1), pres, dres, gap, tau, kappa);
#endif

    if (pres <= opt.feas_tol && dres <= opt.feas_tol &&
        (gap <= opt.gap_abs_tol || relgap <= opt.gap_rel_tol)) {
      converged = true;
      // One extra centering pass usually gains orders of magnitude.
      if (polish_left-- <= 0 || iter == opt.max_iterations) {
        best.status = SolveStatus::Optimal;
        return best;
      }
    }

    // Certificates of primal / dual infeasibility.
    double dual_norm = std::sqrt(y.squaredNorm() + z.squaredNorm());
    if (iter > 0 && byhz < -1e-10 * std::max(1.0, dual_norm)) {
      Eigen::VectorXd cert = d.G.transpose() * z;
      if (p > 0) cert += d.A.transpose() * y;
      if (cert.norm() / (-byhz) <= opt.feas_tol * 0.1) {
        snapshot(SolveStatus::Infeasible, pres, dres, gap, iter);
        return res;
      }
    }
    double prim_norm = std::sqrt(x.squaredNorm() + s.squaredNorm());
    if (iter > 0 && cx < -1e-10 * std::max(1.0, prim_norm)) {
      double unb = std::max((p > 0 ? (d.A * x).norm() : 0.0), (d.G * x + s).norm());
      if (unb / (-cx) <= opt.feas_tol * 0.1) {
        snapshot(SolveStatus::Unbounded, pres, dres, gap, iter);
        return res;
      }
    }

    if (iter == opt.max_iterations) break;

    double mu = (s.dot(z) + tau * kappa) / (lay.degree + 1);

    NtScaling nt;
    nt.compute(lay, s, z);
    if (!kkt.factor(d, nt, opt.static_reg)) {
      best.status = converged ? SolveStatus::Optimal : SolveStatus::NumericalFailure;
      best.iterations = iter;
      return best;
    }

    Eigen::VectorXd vx, vy, vz;
    kkt.solve(-d.c, d.b, d.h, vx, vy, vz);
    double denom = kappa / tau - (d.c.dot(vx) + (p > 0 ? d.b.dot(vy) : 0.0) + d.h.dot(vz));

    auto direction = [&](double sigma, const Eigen::VectorXd& ds_rhs, double dtk_rhs,
                         Eigen::VectorXd& dx, Eigen::VectorXd& dy, Eigen::VectorXd& dz,
                         Eigen::VectorXd& ds, double& dtau, double& dkappa) {
      Eigen::VectorXd dbar = jordan_div(lay, nt.lambda, ds_rhs);
      Eigen::VectorXd wdbar = nt.apply(dbar, false);
      double w1 = 1.0 - sigma;
      Eigen::VectorXd ux, uy, uz;
      kkt.solve(-w1 * r1, -w1 * r2, -w1 * r3 - wdbar, ux, uy, uz);
      double num = w1 * r4 + dtk_rhs / tau + d.c.dot(ux) + (p > 0 ? d.b.dot(uy) : 0.0) + d.h.dot(uz);
      dtau = num / denom;
      dx = ux + dtau * vx;
      if (p > 0) dy = uy + dtau * vy; else dy.resize(0);
      dz = uz + dtau * vz;
      ds = nt.apply(dbar - nt.apply(dz, false), false);
      dkappa = (dtk_rhs - kappa * dtau) / tau;
    };

    // Predictor.
    Eigen::VectorXd lam2 = jordan_mul(lay, nt.lambda, nt.lambda);
    Eigen::VectorXd dxa, dya, dza, dsa;
    double dtaua, dkappaa;
    direction(0.0, -lam2, -tau * kappa, dxa, dya, dza, dsa, dtaua, dkappaa);

    double alpha_aff = std::min({1.0, lay.max_step(s, dsa), lay.max_step(z, dza),
                                 dtaua < 0 ? -tau / dtaua : kInf,
                                 dkappaa < 0 ? -kappa / dkappaa : kInf});
    double sigma = std::pow(1.0 - alpha_aff, 3.0);
    sigma = std::min(1.0, std::max(sigma, 1e-8));

    // Corrector with Mehrotra second-order term.
    Eigen::VectorXd corr = jordan_mul(lay, nt.apply(dsa, true), nt.apply(dza, false));
    Eigen::VectorXd ds_rhs = -lam2 - corr + sigma * mu * e;
    double dtk_rhs = -tau * kappa - dtaua * dkappaa + sigma * mu;
    Eigen::VectorXd dx, dy, dz, ds;
    double dtau, dkappa;
    direction(sigma, ds_rhs, dtk_rhs, dx, dy, dz, ds, dtau, dkappa);

    bool finite_dir = dx.allFinite() && dz.allFinite() && ds.allFinite() &&
                      std::isfinite(dtau) && std::isfinite(dkappa) &&
                      (p == 0 || dy.allFinite());
    if (!finite_dir) break;

    double alpha = std::min({1.0 / 0.99, lay.max_step(s, ds), lay.max_step(z, dz),
                             dtau < 0 ? -tau / dtau : kInf, dkappa < 0 ? -kappa / dkappa : kInf});
    alpha *= 0.99;
    alpha = std::min(alpha, 1.0);
    if (alpha < 1e-7) {
      if (++stalls >= 3) break;
    } else {
      stalls = 0;
    }

    x += alpha * dx;
    if (p > 0) y += alpha * dy;
    z += alpha * dz;
    s += alpha * ds;
    tau += alpha * dtau;
    kappa += alpha * dkappa;
    if (tau < 1e-300) tau = 1e-300;
  }

  best.status = converged ? SolveStatus::Optimal : SolveStatus::MaxIterations;
  return best;
}

}  // namespace detail

inline ConicSolution solve(const ConicProblem& problem, const SolverOptions& options = {}) {
  problem.validate();
  detail::Lowered lo = detail::lower_problem(problem);
  if (!std::getenv("EEF_NO_PRESOLVE")) detail::presolve(lo);
  detail::Dense d = detail::densify(lo);

  ConicSolution sol;
  auto backfill = [&](const Eigen::VectorXd& xdense) {
    Eigen::VectorXd full = Eigen::VectorXd::Zero(problem.num_vars);
    for (size_t jcol = 0; jcol < d.var_map.size(); ++jcol)
      full[d.var_map[jcol]] = xdense[jcol] * d.col_scale[jcol] * d.rhs_scale;
    for (auto it = lo.elims.rbegin(); it != lo.elims.rend(); ++it) {
      double v = it->constant;
      for (const auto& [u, coef] : it->expr) v += coef * full[u];
      full[it->var] = v;
    }
    return full;
  };

  if (d.inconsistent) {
    sol.status = SolveStatus::Infeasible;
    sol.x = Eigen::VectorXd::Zero(problem.num_vars);
    return sol;
  }

  if (d.c.size() == 0) {
    // Everything was eliminated; remaining rows are constants.
    sol.x = backfill(Eigen::VectorXd());
    double viol = max_violation(problem, sol.x);
    sol.status = viol <= 1e-7 ? SolveStatus::Optimal : SolveStatus::Infeasible;
    Eigen::Map<const Eigen::VectorXd> c(problem.objective.data(), problem.num_vars);
    sol.objective = c.dot(sol.x);
    sol.dual_objective = sol.objective;
    sol.duality_gap = 0.0;
    sol.primal_residual = viol;
    sol.dual_residual = 0.0;
    return sol;
  }

  if (d.h.size() == 0) {  // no cone rows: give the interior-point method one
    d.G.resize(1, d.c.size());
    d.G.setZero();
    d.h.resize(1);
    d.h[0] = 1.0;
    d.lp_dim = 1;
  }

  detail::equilibrate(d);
  detail::IpmResult r = detail::ipm(d, options);

  sol.status = r.status;
  sol.iterations = r.iterations;
  sol.primal_residual = r.pres;
  sol.dual_residual = r.dres;
  double unscale = d.c_scale * d.rhs_scale;
  bool have_iterate = r.status == SolveStatus::Optimal || r.status == SolveStatus::MaxIterations ||
                      (r.status == SolveStatus::NumericalFailure && r.x.size() > 0 &&
                       r.tau > 1e-300 && r.x.allFinite() && std::isfinite(r.pres));
  if (have_iterate) {
    sol.x = backfill(r.x / r.tau);
    Eigen::Map<const Eigen::VectorXd> c(problem.objective.data(), problem.num_vars);
    sol.objective = c.dot(sol.x);
    double scaled_dual = -((d.b.size() > 0 ? d.b.dot(r.y) : 0.0) + d.h.dot(r.z)) / r.tau;
    sol.dual_objective = scaled_dual * unscale + d.obj_offset;
    sol.duality_gap = r.gap * unscale;
    // Certificates in the internal equilibrated coordinates; primarily for
    // diagnostics, the objective values above carry the duality information.
    sol.dual_eq = r.y / r.tau;
    sol.dual_cone = r.z / r.tau;
  } else if (r.status == SolveStatus::Infeasible || r.status == SolveStatus::Unbounded) {
    sol.x = Eigen::VectorXd::Zero(problem.num_vars);
    sol.dual_eq = r.y;
    sol.dual_cone = r.z;
    sol.duality_gap = r.gap;
  } else {
    sol.x = Eigen::VectorXd::Zero(problem.num_vars);
  }
  return sol;
}

}  // namespace eef::conic
