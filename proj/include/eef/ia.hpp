#pragma once

#include <Eigen/Dense>
#include <chrono>
#include <cmath>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>
#include <json.hpp>

#include "eef/approx.hpp"
#include "eef/channel.hpp"
#include "eef/common.hpp"
#include "eef/conic.hpp"
#include "eef/model.hpp"
#include "eef/modeling.hpp"
#include "eef/params.hpp"

// Iterative max-min energy-efficiency design. Each outer iteration replaces
// the nonconvex constraints with convex surrogates that touch them at the
// current iterate (value and gradient) and solves one second-order-cone
// program, so the best inverse-efficiency eta never increases.
namespace eef {

// Lifted decision variables: reciprocal powers q = 1/p, time ratio
// tau_tilde = (1+tau)/(1-tau), inverse efficiency eta, and the slack chain
// (v: SINR lower bounds, s: disturbance upper bounds, u: relay power slacks,
// t: harvester slacks, z: time-per-rate slacks).
struct TransformedPoint {
  Mode mode = Mode::OneWay;
  Eigen::VectorXd q;   // per stream
  Eigen::VectorXcd w;  // relay weights (reduced coordinates for ZF designs)
  Eigen::VectorXd r;   // per stream
  double tau_tilde = 3.0;
  double eta = 1.0;
  Eigen::VectorXd v, s;  // per stream
  Eigen::VectorXd u, t;  // per relay
  Eigen::VectorXd z;     // per pair

  int streams() const { return static_cast<int>(q.size()); }

  nlohmann::json to_json() const {
    auto vec = [](const Eigen::VectorXd& x) {
      return std::vector<double>(x.data(), x.data() + x.size());
    };
    nlohmann::json jw = nlohmann::json::array();
    for (int l = 0; l < w.size(); ++l) jw.push_back({w[l].real(), w[l].imag()});
    return {{"mode", to_string(mode)}, {"q", vec(q)},       {"w", jw},
            {"r", vec(r)},             {"tau_tilde", tau_tilde}, {"eta", eta},
            {"v", vec(v)},             {"s", vec(s)},       {"u", vec(u)},
            {"t", vec(t)},             {"z", vec(z)}};
  }

  static TransformedPoint from_json(const nlohmann::json& j) {
    TransformedPoint p;
    p.mode = j.at("mode").get<std::string>() == "ow" ? Mode::OneWay : Mode::TwoWay;
    auto vec = [&](const char* key) {
      auto v = j.at(key).get<std::vector<double>>();
      return Eigen::Map<const Eigen::VectorXd>(v.data(), v.size()).eval();
    };
    p.q = vec("q");
    p.r = vec("r");
    p.v = vec("v");
    p.s = vec("s");
    p.u = vec("u");
    p.t = vec("t");
    p.z = vec("z");
    p.tau_tilde = j.at("tau_tilde").get<double>();
    p.eta = j.at("eta").get<double>();
    const auto& jw = j.at("w");
    p.w.resize(jw.size());
    for (size_t l = 0; l < jw.size(); ++l)
      p.w[l] = {jw.at(l).at(0).get<double>(), jw.at(l).at(1).get<double>()};
    return p;
  }
};

struct IaConfig {
  int max_outer_iterations = 200;
  double objective_tolerance = 1e-5;  // absolute decrease of eta
  double penalty_weight = 0.0;        // 0: scaled automatically from the initial eta
  double proximal_weight = 0.0;
  double solver_feas_tol = 1e-10;
  double solver_gap_tol = 1e-10;
  int solver_max_iterations = 150;
  std::uint64_t seed = 1;
  int max_phase1_iterations = 200;
  int penalty_stall_iterations = 50;  // no penalty progress for this long -> infeasible
  int penalty_boost_iterations = 10;  // stall window before doubling the weight
  int init_attempts = 60;
  bool check_expansion_feasible = false;  // verify the inner-approximation property per iteration
  double expansion_check_tol = 1e-6;
  std::optional<double> fixed_tau;  // freeze the charging fraction
  bool fix_user_power = false;      // freeze p at pmax
  ModelVariant variant;
};

enum class Phase { FeasibilitySearch, Descent };

struct IterRecord {
  int iteration = 0;
  int phase = 2;
  double eta = 0.0;
  double penalty = 0.0;
  int solver_iters = 0;
  double solve_time_s = 0.0;
};

struct IaTrace {
  std::vector<IterRecord> iters;

  void write_csv(const std::string& path) const {
    std::ofstream os(path);
    os << "iteration,phase,eta,penalty,solver_iters,solve_time_s\n";
    char line[256];
    for (const auto& it : iters) {
      std::snprintf(line, sizeof(line), "%d,%d,%.12g,%.12g,%d,%.6g\n", it.iteration, it.phase,
                    it.eta, it.penalty, it.solver_iters, it.solve_time_s);
      os << line;
    }
  }

  std::vector<double> phase2_etas() const {
    std::vector<double> out;
    for (const auto& it : iters)
      if (it.phase == 2) out.push_back(it.eta);
    return out;
  }
};

enum class IaStatus { Converged, MaxIterations, Infeasible, SolverFailure };

inline const char* to_string(IaStatus s) {
  switch (s) {
    case IaStatus::Converged: return "converged";
    case IaStatus::MaxIterations: return "max_iterations";
    case IaStatus::Infeasible: return "infeasible";
    case IaStatus::SolverFailure: return "solver_failure";
  }
  return "unknown";
}

struct IaResult {
  IaStatus status = IaStatus::Infeasible;
  DesignPoint design;        // full-coordinate weights, also for ZF runs
  TransformedPoint point;    // final lifted iterate (reduced weights for ZF)
  double eta = kInf;         // final inverse min-efficiency (per-Hz units)
  IaTrace trace;
  int phase1_iters = 0;
  int phase2_iters = 0;
  int failed_iteration = -1;  // outer iteration of a solver failure
  std::string message;
};

// Assembled cone program for one iteration plus the variable map and a
// candidate point (the expansion point with tight slack values).
struct Subproblem {
  conic::ConicProblem problem;
  Eigen::VectorXi q, r, v, s, u, t, z;
  Eigen::VectorXi w_re, w_im;
  int tau_tilde = -1, eta = -1;
  Eigen::VectorXi penalty;  // feasibility-phase hinge slacks (may be empty)
  int prox = -1;
  Eigen::VectorXd expansion;  // hint vector, feasible for `problem`
  int cone_count = 0;
  int real_vars = 0;
  // The disturbance and relay-collection variables are carried in units of
  // the respective noise powers to keep the cone data well ranged.
  double s_unit = 1.0, u_unit = 1.0;

  TransformedPoint extract(const Eigen::VectorXd& x, Mode mode) const {
    TransformedPoint p;
    p.mode = mode;
    auto take = [&](const Eigen::VectorXi& idx) {
      Eigen::VectorXd out(idx.size());
      for (int i = 0; i < idx.size(); ++i) out[i] = x[idx[i]];
      return out;
    };
    p.q = take(q);
    p.r = take(r);
    p.v = take(v);
    p.s = take(s) * s_unit;
    p.u = take(u) * u_unit;
    p.t = take(t);
    p.z = take(z);
    p.w.resize(w_re.size());
    for (int l = 0; l < w_re.size(); ++l) p.w[l] = {x[w_re[l]], x[w_im[l]]};
    p.tau_tilde = x[tau_tilde];
    p.eta = x[eta];
    return p;
  }
};

namespace engine_detail {

constexpr double kVarFloor = 1e-9;
constexpr double kTauTildeCap = 1999.0;  // tau <= 0.999

// Weight coordinates the design is optimized over: full relay space or an
// interference-nulling basis (columns orthonormal).
struct WeightSpace {
  Eigen::MatrixXcd basis;        // L x Lr
  bool interference_free = false;

  int full_dim() const { return static_cast<int>(basis.rows()); }
  int reduced_dim() const { return static_cast<int>(basis.cols()); }

  static WeightSpace identity(int relays) {
    WeightSpace s;
    s.basis = Eigen::MatrixXcd::Identity(relays, relays);
    return s;
  }

  Eigen::VectorXcd expand(const Eigen::VectorXcd& wr) const { return basis * wr; }
};

inline int partner_stream(Mode mode, int st) { return mode == Mode::OneWay ? st : (st ^ 1); }

inline std::pair<int, int> rx_user(Mode mode, int rs) {
  if (mode == Mode::OneWay) return {2, rs};
  return stream_user(mode, rs);
}

// Everything the builder and the lift need, precomputed once per channel.
struct Context {
  const SystemParams* P = nullptr;
  const ChannelRealization* C = nullptr;
  Mode mode = Mode::OneWay;
  ModelVariant variant;
  WeightSpace space;
  int K = 0, L = 0, Lr = 0, ns = 0;

  // Per relay: harvester constants.
  Eigen::VectorXd beta, alpha_eh, beta_hat, beta_bar, beta_check, eps_relay;
  // Per (stream, relay): squared gain of the transmitting user.
  Eigen::MatrixXd b_gain;
  // Per stream (pair energy constants, indexed by transmit stream).
  Eigen::VectorXd rho_sp, pa_coef_v;
  Eigen::VectorXd p_prime, p_dprime, e_cir;  // per pair
  Eigen::VectorXd qos;                       // per stream
  Eigen::VectorXd pmax;                      // per stream

  // Channel rows projected into the weight space.
  Eigen::MatrixXcd desired_rows;                 // K x Lr, pair k desired path
  std::vector<std::vector<Eigen::RowVectorXcd>> interf_rows;  // [rs][list] cross-pair paths
  std::vector<std::vector<int>> interf_q;                      // q stream index per row
  std::vector<Eigen::MatrixXcd> noise_rows;      // per rs: L x Lr scaled receive rows

  void init(const SystemParams& params, const ChannelRealization& ch, Mode m,
            const ModelVariant& var, WeightSpace sp) {
    P = &params;
    C = &ch;
    mode = m;
    variant = var;
    space = std::move(sp);
    K = params.num_pairs;
    L = params.num_relays;
    Lr = space.reduced_dim();
    ns = params.num_streams(mode);

    beta.resize(L);
    alpha_eh.resize(L);
    beta_hat.resize(L);
    beta_bar.resize(L);
    beta_check.resize(L);
    eps_relay.resize(L);
    for (int l = 0; l < L; ++l) {
      beta[l] = params.eh_beta(l);
      alpha_eh[l] = std::exp(params.eh_c_per_w[l] * params.eh_d_w[l]);
      beta_hat[l] = params.eh_max_w[l] / (1.0 - beta[l]);
      beta_bar[l] = beta[l] * beta_hat[l] + params.relay_const_j[l];
      beta_check[l] = beta_bar[l] - 2.0 * params.relay_const_j[l];
      eps_relay[l] = std::sqrt(params.pmax_relay_w[l]) / params.pa_eff_relay[l];
    }

    b_gain.resize(ns, L);
    rho_sp.resize(ns);
    pa_coef_v.resize(ns);
    qos.resize(ns);
    pmax.resize(ns);
    for (int st = 0; st < ns; ++st) {
      auto [i, k] = stream_user(mode, st);
      for (int l = 0; l < L; ++l) b_gain(st, l) = std::norm(ch.f(i, k, l));
      rho_sp[st] = variant.zero_sp_power ? 0.0 : params.sp_rate_coef(i, k);
      pa_coef_v[st] = variant.pa == ModelVariant::PaModel::FixedEfficiency
                          ? 1.0 / params.pa_eff(i, k)
                          : params.pa_coef(i, k);
      qos[st] = params.qos(i, k);
      pmax[st] = params.pmax_user(i, k);
    }
    p_prime.resize(K);
    p_dprime.resize(K);
    e_cir.resize(K);
    for (int k = 0; k < K; ++k) {
      p_prime[k] = params.idle(1, k) + params.active_circuit(2, k);
      p_dprime[k] = params.idle(2, k) + params.active_circuit(1, k);
      e_cir[k] = params.active_circuit(1, k) + params.active_circuit(2, k);
    }

    desired_rows.resize(K, Lr);
    for (int k = 0; k < K; ++k)
      desired_rows.row(k) = relay_path_row(ch, 1, k, 2, k) * space.basis;

    interf_rows.assign(ns, {});
    interf_q.assign(ns, {});
    noise_rows.clear();
    for (int rs = 0; rs < ns; ++rs) {
      auto [ri, rk] = rx_user(mode, rs);
      if (!space.interference_free) {
        for (int ts = 0; ts < ns; ++ts) {
          auto [ti, tk] = stream_user(mode, ts);
          if (tk == rk) continue;
          interf_rows[rs].push_back(relay_path_row(ch, ri, rk, ti, tk) * space.basis);
          interf_q[rs].push_back(ts);
        }
      }
      Eigen::MatrixXcd nr(L, Lr);
      for (int l = 0; l < L; ++l)
        nr.row(l) = std::sqrt(params.noise_relay_w) * ch.f(ri, rk, l) * space.basis.row(l);
      noise_rows.push_back(std::move(nr));
    }
  }

  // RF power collected at relay l for powers p (stream-indexed).
  double rf_power(const Eigen::VectorXd& p, int l) const {
    double acc = 0.0;
    for (int st = 0; st < ns; ++st) acc += p[st] * b_gain(st, l);
    return acc;
  }

  double harvested(double tau, double p_rf, int l) const {
    return harvested_energy(*P, tau, p_rf, l, variant);
  }

  // Disturbance power (interference + amplified noise + receiver noise) at
  // receiver stream rs for reduced weights wr.
  double disturbance(const Eigen::VectorXcd& wr, const Eigen::VectorXd& p, int rs) const {
    double acc = P->noise_user_w;
    for (size_t idx = 0; idx < interf_rows[rs].size(); ++idx)
      acc += p[interf_q[rs][idx]] * std::norm((interf_rows[rs][idx] * wr)(0, 0));
    acc += (noise_rows[rs] * wr).squaredNorm();
    return acc;
  }

  double desired_power(const Eigen::VectorXcd& wr, const Eigen::VectorXd& p, int rs) const {
    int tx = partner_stream(mode, rs);
    return p[tx] * std::norm((desired_rows.row(pair_of(rs)) * wr)(0, 0));
  }

  int pair_of(int st) const { return mode == Mode::OneWay ? st : st / 2; }

  double radiated(const Eigen::VectorXcd& wr, const Eigen::VectorXd& p, int l) const {
    double wl2 = std::norm((space.basis.row(l) * wr)(0, 0));
    return wl2 * (P->noise_relay_w + rf_power(p, l));
  }

  // Inverse per-Hz efficiency of pair k at a lifted point with tight slacks.
  double eta_hat(const TransformedPoint& pt, int k) const {
    double tt = pt.tau_tilde;
    if (mode == Mode::OneWay) {
      double pa = pa_term(pt.q[k], k);
      return rho_sp[k] + p_prime[k] / pt.r[k] + tt / pt.r[k] * (pa + p_dprime[k]);
    }
    int s1 = stream_index(mode, 1, k), s2 = stream_index(mode, 2, k);
    double rsum = pt.r[s1] + pt.r[s2];
    double pa = pa_term(pt.q[s1], s1) + pa_term(pt.q[s2], s2);
    double sp = rho_sp[s1] * pt.r[s1] + rho_sp[s2] * pt.r[s2];
    return e_cir[pair_of(s1)] * (1.0 + tt) / rsum + tt / rsum * pa + sp / rsum;
  }

  double pa_term(double q, int st) const {
    if (variant.pa == ModelVariant::PaModel::FixedEfficiency) return pa_coef_v[st] / q;
    return pa_coef_v[st] / std::sqrt(q);
  }
};

}  // namespace engine_detail

// Lift a design into the transformed coordinates; the slack variables are set
// so their defining constraints hold with equality. The design must satisfy
// the power, relay-power and harvesting constraints (rates may violate QoS
// but must be supported by the SINRs).
inline TransformedPoint lift(const SystemParams& params, const ChannelRealization& ch,
                             const DesignPoint& design, const ModelVariant& variant = {});

inline DesignPoint project(const TransformedPoint& pt) {
  DesignPoint d;
  d.mode = pt.mode;
  d.p = pt.q.cwiseInverse();
  d.w = pt.w;
  d.r = pt.r;
  d.tau = (pt.tau_tilde - 1.0) / (pt.tau_tilde + 1.0);
  return d;
}

namespace engine_detail {

inline TransformedPoint lift_in_space(const Context& ctx, const Eigen::VectorXd& p,
                                      const Eigen::VectorXcd& wr, const Eigen::VectorXd& r,
                                      double tau) {
  const double tol = 1e-7;
  TransformedPoint pt;
  pt.mode = ctx.mode;
  pt.q = p.cwiseInverse();
  pt.w = wr;
  pt.r = r;
  pt.tau_tilde = (1.0 + tau) / (1.0 - tau);
  int ns = ctx.ns, L = ctx.L, K = ctx.K;
  pt.v.resize(ns);
  pt.s.resize(ns);
  for (int rs = 0; rs < ns; ++rs) {
    pt.s[rs] = ctx.disturbance(wr, p, rs);
    pt.v[rs] = ctx.desired_power(wr, p, rs) / pt.s[rs];
  }
  for (int st = 0; st < ns; ++st) {
    double cap = std::log1p(pt.v[partner_stream(ctx.mode, st)]);
    if (r[st] > cap * (1.0 + 1e-9) + 1e-12)
      throw ArgumentError("lift: rate exceeds the supported maximum");
  }
  pt.u.resize(L);
  pt.t.resize(L);
  for (int l = 0; l < L; ++l) {
    double wl2 = std::norm((ctx.space.basis.row(l) * wr)(0, 0));
    double acc = 0.0;
    for (int st = 0; st < ns; ++st) acc += p[st] * ctx.b_gain(st, l) * wl2;
    pt.u[l] = std::sqrt(acc);
    double prad = acc + ctx.P->noise_relay_w * wl2;
    if (prad > ctx.P->pmax_relay_w[l] * (1.0 + tol))
      throw ArgumentError("lift: relay power budget violated");
    double pa_side = ctx.eps_relay[l] * std::sqrt(prad);
    if (ctx.variant.eh == ModelVariant::EhModel::Sigmoid) {
      pt.t[l] = (pa_side + ctx.beta_bar[l] * pt.tau_tilde - ctx.beta_check[l]) / ctx.beta_hat[l];
      // harvest feasibility <=> t below the sigmoid level
      double sig = 1.0 / (1.0 + ctx.alpha_eh[l] *
                                    std::exp(-ctx.P->eh_c_per_w[l] * ctx.rf_power(p, l)));
      if (pt.t[l] > (pt.tau_tilde - 1.0) * sig * (1.0 + tol) + tol)
        throw ArgumentError("lift: harvested energy cannot cover the relay draw");
    } else {
      pt.t[l] = ctx.rf_power(p, l);  // linear model: t carries the RF power bound
      double lhs = 0.5 * (1.0 - tau) * pa_side + ctx.P->relay_const_j[l];
      if (lhs > ctx.harvested(tau, pt.t[l], l) * (1.0 + tol) + tol)
        throw ArgumentError("lift: harvested energy cannot cover the relay draw");
    }
  }
  pt.z.resize(K);
  for (int k = 0; k < K; ++k) {
    double rsum = ctx.mode == Mode::OneWay
                      ? r[k]
                      : r[stream_index(ctx.mode, 1, k)] + r[stream_index(ctx.mode, 2, k)];
    if (rsum <= 0) throw ArgumentError("lift: zero pair rate");
    pt.z[k] = std::sqrt(pt.tau_tilde / rsum);
  }
  double eta = 0.0;
  for (int k = 0; k < K; ++k) eta = std::max(eta, ctx.eta_hat(pt, k));
  pt.eta = eta;
  return pt;
}

// Shrink weights into the relay power and harvesting budgets, clamp rates to
// capacity, then lift. Used to restore exact feasibility after a finite-
// precision subproblem solve.
inline TransformedPoint sanitize_and_lift(const Context& ctx, Eigen::VectorXd p,
                                          Eigen::VectorXcd wr, Eigen::VectorXd r, double tau,
                                          bool allow_tau_bump = true) {
  const SystemParams& P = *ctx.P;
  tau = std::clamp(tau, 1e-9, 1.0 - 1e-9);
  for (int st = 0; st < ctx.ns; ++st) p[st] = std::clamp(p[st], 1e-300, ctx.pmax[st]);
  // harvest grows linearly with tau: raise it just enough to cover the fixed
  // relay draw when a finite-precision iterate grazes the boundary
  for (int l = 0; l < ctx.L; ++l) {
    double per_tau = ctx.harvested(1.0, ctx.rf_power(p, l), l);
    double needed = P.relay_const_j[l] * (1.0 + 1e-9) / per_tau;
    if (needed >= 1.0 || (!allow_tau_bump && needed > tau))
      throw ArgumentError("sanitize: harvest below the fixed draw");
    tau = std::max(tau, needed);
  }
  double scale = 1.0;
  for (int l = 0; l < ctx.L; ++l) {
    double prad = ctx.radiated(wr, p, l);
    if (prad > 0.0) scale = std::min(scale, std::sqrt(P.pmax_relay_w[l] / prad) * (1.0 - 1e-12));
    double margin = ctx.harvested(tau, ctx.rf_power(p, l), l) - P.relay_const_j[l];
    if (margin <= 0.0) throw ArgumentError("sanitize: harvest below the fixed draw");
    double draw = 0.5 * (1.0 - tau) * ctx.eps_relay[l] * std::sqrt(prad) * scale;
    if (draw > margin) scale *= (1.0 - 1e-12) * margin / draw;
  }
  wr *= scale;
  for (int st = 0; st < ctx.ns; ++st) {
    int rs = partner_stream(ctx.mode, st);
    double cap = std::log1p(ctx.desired_power(wr, p, rs) / ctx.disturbance(wr, p, rs));
    r[st] = std::clamp(r[st], kVarFloor, cap);
  }
  return lift_in_space(ctx, p, wr, r, tau);
}

// One convex subproblem around `pt`. Every surrogate touches the constraint
// it replaces at `pt`, so `expansion` is feasible for the assembled program.
inline Subproblem build(const TransformedPoint& pt, const Context& ctx, const IaConfig& cfg,
                        Phase phase) {
  using modeling::Expr;
  modeling::Model M;
  const SystemParams& P = *ctx.P;
  int ns = ctx.ns, L = ctx.L, Lr = ctx.Lr, K = ctx.K;
  Subproblem sp;

  // Decision variables with expansion-point hints. Disturbances are carried
  // in receiver-noise units, relay collections in relay-noise amplitude
  // units: the physical watt scales sit twelve orders below the rest and
  // would otherwise wreck the subproblem's numeric range.
  sp.s_unit = P.noise_user_w;
  // geometric middle of the relay noise floor and the radiated power cap
  sp.u_unit = std::pow(P.noise_relay_w * P.pmax_relay_w.maxCoeff(), 0.25);
  sp.q.resize(ns);
  sp.r.resize(ns);
  sp.v.resize(ns);
  sp.s.resize(ns);
  for (int st = 0; st < ns; ++st) {
    double qlb = 1.0 / ctx.pmax[st];
    double qub = kInf;
    if (cfg.fix_user_power) qub = qlb;
    sp.q[st] = M.add_var(pt.q[st], qlb, qub);
    sp.r[st] = M.add_var(pt.r[st], kVarFloor);
    sp.v[st] = M.add_var(pt.v[st], kVarFloor);
    sp.s[st] = M.add_var(pt.s[st] / sp.s_unit, 0.5);  // >= 1 at any feasible point
  }
  sp.w_re.resize(Lr);
  sp.w_im.resize(Lr);
  for (int l = 0; l < Lr; ++l) {
    sp.w_re[l] = M.add_var(pt.w[l].real());
    sp.w_im[l] = M.add_var(pt.w[l].imag());
  }
  double tt_lb = 1.0 + kVarFloor, tt_ub = kTauTildeCap;
  if (cfg.fixed_tau) {
    double tt = (1.0 + *cfg.fixed_tau) / (1.0 - *cfg.fixed_tau);
    tt_lb = tt_ub = tt;
  }
  sp.tau_tilde = M.add_var(pt.tau_tilde, tt_lb, tt_ub);
  sp.eta = M.add_var(pt.eta, 1e-12);
  sp.u.resize(L);
  sp.t.resize(L);
  for (int l = 0; l < L; ++l) {
    sp.u[l] = M.add_var(pt.u[l] / sp.u_unit, kVarFloor);
    sp.t[l] = M.add_var(pt.t[l], kVarFloor);
  }
  sp.z.resize(K);
  for (int k = 0; k < K; ++k) sp.z[k] = M.add_var(pt.z[k], kVarFloor);

  auto evar = [&](int idx) { return Expr::var(idx); };
  Expr tau_e = evar(sp.tau_tilde);
  Expr eta_e = evar(sp.eta);

  // Complex weight expressions in reduced coordinates.
  auto wexpr = [&](const Eigen::RowVectorXcd& row) -> std::pair<Expr, Expr> {
    Expr re, im;
    for (int m = 0; m < Lr; ++m) {
      double a = row[m].real(), b = row[m].imag();
      if (a != 0.0) {
        re += Expr::var(sp.w_re[m], a);
        im += Expr::var(sp.w_im[m], a);
      }
      if (b != 0.0) {
        re += Expr::var(sp.w_im[m], -b);
        im += Expr::var(sp.w_re[m], b);
      }
    }
    return {re, im};
  };
  // |w_l|^2 in full coordinates: tail expressions of the physical weight.
  auto wl_expr = [&](int l) { return wexpr(ctx.space.basis.row(l)); };

  // Rate bounds r_st <= log(1 + v_partner), linearized through the concave
  // square-root lower bound of the logarithm in cone form.
  for (int st = 0; st < ns; ++st) {
    int rs = partner_stream(ctx.mode, st);
    double xp = 1.0 + pt.v[rs];
    double logxp = std::log(xp);
    int xi = M.add_var(std::sqrt(xp), 0.0);
    M.add_norm2_le({evar(xi)}, Expr(1.0) + evar(sp.v[rs]));
    Expr head = Expr(logxp + 2.0) - evar(sp.r[st]) + evar(xi);
    M.add_soc(head, {Expr(2.0 * std::pow(xp, 0.25)), Expr(logxp + 2.0) - evar(sp.r[st]), evar(xi)});
  }

  // Disturbance bounds in noise units: interference quotients plus amplified
  // relay noise plus the unit receiver-noise floor.
  const double inv_sn = 1.0 / std::sqrt(sp.s_unit);
  for (int rs = 0; rs < ns; ++rs) {
    Expr total(1.0);
    for (size_t idx = 0; idx < ctx.interf_rows[rs].size(); ++idx) {
      int tq = ctx.interf_q[rs][idx];
      auto [re, im] = wexpr(ctx.interf_rows[rs][idx]);
      double hint = std::norm((ctx.interf_rows[rs][idx] * pt.w)(0, 0)) / (pt.q[tq] * sp.s_unit);
      int ip = M.add_var(hint, 0.0);
      M.add_quad_over_lin_le({inv_sn * re, inv_sn * im}, evar(sp.q[tq]), evar(ip));
      total += evar(ip);
    }
    double nq_hint = (ctx.noise_rows[rs] * pt.w).squaredNorm() / sp.s_unit;
    int nq = M.add_var(nq_hint, 0.0);
    std::vector<Expr> ntail;
    for (int l = 0; l < L; ++l) {
      auto [re, im] = wexpr(ctx.noise_rows[rs].row(l));
      ntail.push_back(inv_sn * re);
      ntail.push_back(inv_sn * im);
    }
    M.add_norm2_le(ntail, evar(nq));
    total += evar(nq);
    M.add_le(total - evar(sp.s[rs]), 0.0);
  }

  // SINR products: bilinear upper bound of s*v against the linearized
  // desired-signal quotient (all in noise units).
  for (int rs = 0; rs < ns; ++rs) {
    int tq = partner_stream(ctx.mode, rs);
    int k = ctx.pair_of(rs);
    double shat = pt.s[rs] / sp.s_unit;
    double lambda = approx::bilinear_lambda(shat, pt.v[rs]);
    auto [re, im] = wexpr(ctx.desired_rows.row(k));
    std::complex<double> phi = (ctx.desired_rows.row(k) * pt.w)(0, 0);
    double qp = pt.q[tq];
    // (2 Re(phi* (h w))/q' - |phi|^2 q/q'^2) / noise
    Expr rhs = (2.0 / (qp * sp.s_unit)) * (phi.real() * re + phi.imag() * im) -
               (std::norm(phi) / (qp * qp * sp.s_unit)) * evar(sp.q[tq]);
    M.add_rsoc(rhs, Expr(1.0),
               {std::sqrt(lambda) * evar(sp.s[rs]), (1.0 / std::sqrt(lambda)) * evar(sp.v[rs])});
  }

  // Relay collection slacks in u_unit^2 power units: per-(stream, relay)
  // epigraphs shared by the radiated power budget and the harvester chain.
  const double nr = P.noise_relay_w;
  const double upow = sp.u_unit * sp.u_unit;
  const double inv_un = 1.0 / sp.u_unit;
  std::vector<std::vector<int>> rp(ns, std::vector<int>(L));
  for (int l = 0; l < L; ++l) {
    auto [re, im] = wl_expr(l);
    double wl2 = std::norm((ctx.space.basis.row(l) * pt.w)(0, 0));
    for (int st = 0; st < ns; ++st) {
      double b = ctx.b_gain(st, l);
      double hint = b * wl2 / (pt.q[st] * upow);
      rp[st][l] = M.add_var(hint, 0.0);
      double sb = std::sqrt(b) * inv_un;
      M.add_quad_over_lin_le({sb * re, sb * im}, evar(sp.q[st]), evar(rp[st][l]));
    }
  }
  for (int l = 0; l < L; ++l) {
    auto [re, im] = wl_expr(l);
    Expr usum;  // collected signal power in u_unit^2 units
    for (int st = 0; st < ns; ++st) usum += evar(rp[st][l]);
    // radiated budget: noise_relay |w_l|^2 + collected <= pmax_relay
    double sn = std::sqrt(nr);
    M.add_norm2_le({sn * re, sn * im}, Expr(P.pmax_relay_w[l]) - upow * usum);
    // u_l^2 upper bound, linearized at u'
    double up = pt.u[l] / sp.u_unit;
    M.add_le(usum - 2.0 * up * evar(sp.u[l]), -up * up);
  }

  // Harvester chain. The PA draw tail squares to eps^2 * radiated power:
  // eps^2 (noise|w|^2 + u_unit^2 u^^2).
  for (int l = 0; l < L; ++l) {
    auto [re, im] = wl_expr(l);
    double sn = std::sqrt(P.noise_relay_w);
    std::vector<Expr> pa_tail = {ctx.eps_relay[l] * sn * re, ctx.eps_relay[l] * sn * im,
                                 ctx.eps_relay[l] * sp.u_unit * evar(sp.u[l])};
    if (ctx.variant.eh == ModelVariant::EhModel::Sigmoid) {
      // log(tau_tilde - t - 1) >= log-upper(alpha t) + sum c b (1/q lower bound)
      double tp = pt.t[l];
      double c = P.eh_c_per_w[l];
      Expr rhs(std::log(ctx.alpha_eh[l] * tp) - 1.0);
      rhs += (1.0 / tp) * evar(sp.t[l]);
      for (int st = 0; st < ns; ++st) {
        double cb = c * ctx.b_gain(st, l);
        if (cb == 0.0) continue;
        double qp = pt.q[st];
        rhs += Expr(-2.0 * cb / qp) + (cb / (qp * qp)) * evar(sp.q[st]);
      }
      double xp = pt.tau_tilde - tp - 1.0;
      double logxp = std::log(xp);
      Expr xarg = tau_e - evar(sp.t[l]) - Expr(1.0);
      M.add_le(Expr(kVarFloor) - xarg, 0.0);
      int xi = M.add_var(std::sqrt(xp), 0.0);
      M.add_norm2_le({evar(xi)}, xarg);
      Expr head = Expr(logxp + 2.0) - rhs + evar(xi);
      M.add_soc(head, {Expr(2.0 * std::pow(xp, 0.25)), Expr(logxp + 2.0) - rhs, evar(xi)});
      Expr budget = ctx.beta_hat[l] * evar(sp.t[l]) - ctx.beta_bar[l] * tau_e +
                    Expr(ctx.beta_check[l]);
      M.add_soc(budget, pa_tail);
    } else {
      // Linear harvester: eff * (tau-1 ratioed) * RF with a concave product
      // lower bound; t carries the RF-power bound.
      double eff = ctx.variant.linear_eh_efficiency;
      Expr rf_lb;
      for (int st = 0; st < ns; ++st) {
        double b = ctx.b_gain(st, l);
        if (b == 0.0) continue;
        double qp = pt.q[st];
        rf_lb += Expr(2.0 * b / qp) - (b / (qp * qp)) * evar(sp.q[st]);
      }
      M.add_le(evar(sp.t[l]) - rf_lb, 0.0);
      double x1p = pt.tau_tilde - 1.0, x2p = pt.t[l];
      double sum_p = x1p + x2p;
      int qsq = M.add_var(x1p * x1p + x2p * x2p, 0.0);
      M.add_norm2_le({tau_e - Expr(1.0), evar(sp.t[l])}, evar(qsq));
      Expr prod_lb = sum_p * (tau_e - Expr(1.0) + evar(sp.t[l])) - Expr(0.5 * sum_p * sum_p) -
                     0.5 * evar(qsq);
      Expr budget = eff * prod_lb - P.relay_const_j[l] * (tau_e + Expr(1.0));
      M.add_soc(budget, pa_tail);
    }
  }

  // Efficiency chain per pair.
  std::vector<int> invr(K), zsq(K);
  for (int k = 0; k < K; ++k) {
    Expr rsum_e;
    double rsum = 0.0;
    if (ctx.mode == Mode::OneWay) {
      rsum_e = evar(sp.r[k]);
      rsum = pt.r[k];
    } else {
      int s1 = stream_index(ctx.mode, 1, k), s2 = stream_index(ctx.mode, 2, k);
      rsum_e = evar(sp.r[s1]) + evar(sp.r[s2]);
      rsum = pt.r[s1] + pt.r[s2];
    }
    invr[k] = M.add_var(1.0 / rsum, 0.0);
    M.add_recip_le(rsum_e, evar(invr[k]));
    zsq[k] = M.add_var(pt.z[k] * pt.z[k], 0.0);
    M.add_norm2_le({evar(sp.z[k])}, evar(zsq[k]));

    // time-per-rate: 1/rsum + linearized(-z^2/tau_tilde) <= 0
    double zp = pt.z[k], ttp = pt.tau_tilde;
    Expr ybound = (2.0 * zp / ttp) * evar(sp.z[k]) - (zp * zp / (ttp * ttp)) * tau_e;
    M.add_recip_le(rsum_e, ybound);

    // PA terms: z^2 / sqrt(q) (or z^2 / q for the fixed-efficiency variant)
    Expr pa_sum;
    auto streams_of_pair = [&]() {
      std::vector<int> out;
      if (ctx.mode == Mode::OneWay) {
        out.push_back(k);
      } else {
        out.push_back(stream_index(ctx.mode, 1, k));
        out.push_back(stream_index(ctx.mode, 2, k));
      }
      return out;
    };
    for (int st : streams_of_pair()) {
      if (ctx.variant.pa == ModelVariant::PaModel::FixedEfficiency) {
        int kap = M.add_var(pt.z[k] * pt.z[k] / pt.q[st], 0.0);
        M.add_quad_over_lin_le({evar(sp.z[k])}, evar(sp.q[st]), evar(kap));
        pa_sum += Expr::var(kap, ctx.pa_coef_v[st]);
      } else {
        double vhint = std::sqrt(pt.q[st]);
        int vaux = M.add_var(vhint, 0.0);
        int kap = M.add_var(pt.z[k] * pt.z[k] / vhint, 0.0);
        // z^2/sqrt(q) <= kap as two cones: z^2 <= kap*vaux and vaux^2 <= q
        M.add_soc(evar(kap) + evar(vaux),
                  {2.0 * evar(sp.z[k]), evar(kap) - evar(vaux)});
        M.add_soc(evar(sp.q[st]) + Expr(1.0), {2.0 * evar(vaux), evar(sp.q[st]) - Expr(1.0)});
        pa_sum += Expr::var(kap, ctx.pa_coef_v[st]);
      }
    }

    if (ctx.mode == Mode::OneWay) {
      Expr lhs = Expr(ctx.rho_sp[k]) + ctx.p_prime[k] * evar(invr[k]) + pa_sum +
                 ctx.p_dprime[k] * evar(zsq[k]);
      M.add_le(lhs - eta_e, 0.0);
    } else {
      int s1 = stream_index(ctx.mode, 1, k), s2 = stream_index(ctx.mode, 2, k);
      Expr lhs = ctx.e_cir[k] * (evar(invr[k]) + evar(zsq[k])) + pa_sum;
      double xp = ctx.rho_sp[s1] * pt.r[s1] + ctx.rho_sp[s2] * pt.r[s2];
      if (xp > 0.0) {
        // rate-weighted processing share via the ratio bound in cone form
        double lambda = approx::ratio_lambda(xp, rsum);
        Expr xe = ctx.rho_sp[s1] * evar(sp.r[s1]) + ctx.rho_sp[s2] * evar(sp.r[s2]);
        int fr = M.add_var(xp / rsum, 0.0);
        M.add_rsoc(evar(fr), Expr(1.0),
                   {std::sqrt(lambda) * xe, (1.0 / std::sqrt(lambda)) * evar(invr[k])});
        lhs += evar(fr);
      }
      M.add_le(lhs - eta_e, 0.0);
    }
  }

  // Quality-of-service: hard in the descent phase, hinge-penalized while
  // searching for a feasible point.
  Expr objective = eta_e;
  if (phase == Phase::Descent) {
    for (int st = 0; st < ns; ++st) {
      if (ctx.qos[st] <= 0.0) continue;
      M.add_le(ctx.qos[st] * tau_e - evar(sp.r[st]), -ctx.qos[st]);
    }
    sp.penalty.resize(0);
  } else {
    std::vector<int> pen;
    for (int st = 0; st < ns; ++st) {
      if (ctx.qos[st] <= 0.0) continue;
      double hint = std::max(0.0, (1.0 + pt.tau_tilde) * ctx.qos[st] - pt.r[st]);
      int zeta = M.add_var(hint, 0.0);
      M.add_le(ctx.qos[st] * tau_e - evar(sp.r[st]) - evar(zeta), -ctx.qos[st]);
      objective += cfg.penalty_weight * evar(zeta);
      pen.push_back(zeta);
    }
    sp.penalty.resize(static_cast<int>(pen.size()));
    for (size_t i = 0; i < pen.size(); ++i) sp.penalty[static_cast<int>(i)] = pen[i];
  }

  if (cfg.proximal_weight > 0.0) {
    std::vector<Expr> dev;
    auto push = [&](int var, double hint) { dev.push_back(evar(var) - Expr(hint)); };
    for (int st = 0; st < ns; ++st) {
      push(sp.q[st], pt.q[st]);
      push(sp.r[st], pt.r[st]);
      push(sp.v[st], pt.v[st]);
      push(sp.s[st], pt.s[st]);
    }
    for (int l = 0; l < Lr; ++l) {
      push(sp.w_re[l], pt.w[l].real());
      push(sp.w_im[l], pt.w[l].imag());
    }
    push(sp.tau_tilde, pt.tau_tilde);
    push(sp.eta, pt.eta);
    for (int l = 0; l < L; ++l) {
      push(sp.u[l], pt.u[l]);
      push(sp.t[l], pt.t[l]);
    }
    for (int k = 0; k < K; ++k) push(sp.z[k], pt.z[k]);
    sp.prox = M.add_var(0.0, 0.0);
    M.add_norm2_le(dev, evar(sp.prox));
    objective += cfg.proximal_weight * evar(sp.prox);
  }

  M.minimize(objective);
  sp.expansion = M.hint_vector();
  sp.cone_count = M.num_cones();
  sp.real_vars = M.problem().num_vars;
  sp.problem = std::move(M.problem());
  return sp;
}

}  // namespace engine_detail

inline TransformedPoint lift(const SystemParams& params, const ChannelRealization& ch,
                             const DesignPoint& design, const ModelVariant& variant) {
  design.validate(params.num_pairs, params.num_relays);
  engine_detail::Context ctx;
  ctx.init(params, ch, design.mode, variant,
           engine_detail::WeightSpace::identity(params.num_relays));
  return engine_detail::lift_in_space(ctx, design.p, design.w, design.r, design.tau);
}

// Build the convex subproblem around `point` for the unrestricted design.
inline Subproblem build_subproblem(const TransformedPoint& point, const SystemParams& params,
                                   const ChannelRealization& ch, const IaConfig& config,
                                   Phase phase) {
  engine_detail::Context ctx;
  ctx.init(params, ch, point.mode, config.variant,
           engine_detail::WeightSpace::identity(params.num_relays));
  return engine_detail::build(point, ctx, config, phase);
}

namespace engine_detail {

// Initial point: random charging fraction and powers, random weights scaled
// into the relay power and harvesting budgets, rates set to the supported
// maxima.
inline std::optional<TransformedPoint> sample_initial_point(const Context& ctx,
                                                            const IaConfig& cfg, Rng& rng) {
  const SystemParams& P = *ctx.P;
  int ns = ctx.ns, L = ctx.L, Lr = ctx.Lr;
  const double tau_ladder[] = {0.5, 0.7, 0.85, 0.95, 0.99};
  std::optional<TransformedPoint> best;
  int found = 0;
  for (int attempt = 0; attempt < cfg.init_attempts; ++attempt) {
    double tau = cfg.fixed_tau ? *cfg.fixed_tau
                               : (attempt % 3 == 2 ? tau_ladder[(attempt / 3) % 5]
                                                   : rng.uniform(0.05, 0.95));
    Eigen::VectorXd p(ns);
    for (int st = 0; st < ns; ++st)
      p[st] = cfg.fix_user_power || attempt % 2 == 1
                  ? ctx.pmax[st]
                  : ctx.pmax[st] * rng.uniform(0.1, 1.0);
    // harvest must cover the fixed relay draw even with silent weights
    bool ok = true;
    for (int l = 0; l < L && ok; ++l)
      if (ctx.harvested(tau, ctx.rf_power(p, l), l) <= P.relay_const_j[l] * (1.0 + 1e-9))
        ok = false;
    if (!ok) continue;

    Eigen::VectorXcd wr(Lr);
    for (int m = 0; m < Lr; ++m) wr[m] = rng.cnormal();
    // scale into the radiated power budget
    double scale = kInf;
    for (int l = 0; l < L; ++l) {
      double prad = ctx.radiated(wr, p, l);
      if (prad > 0) scale = std::min(scale, std::sqrt(P.pmax_relay_w[l] / prad));
    }
    if (!std::isfinite(scale)) scale = 1.0;
    scale *= 0.99;
    // scale into the harvesting budget (analytic: the PA draw is linear in |w|)
    for (int l = 0; l < L; ++l) {
      double eeh = ctx.harvested(tau, ctx.rf_power(p, l), l);
      double margin = eeh - P.relay_const_j[l];
      double prad = ctx.radiated(wr, p, l) * scale * scale;
      double draw = 0.5 * (1.0 - tau) * ctx.eps_relay[l] * std::sqrt(prad);
      if (draw > margin) scale *= 0.999 * margin / draw;
    }
    if (!(scale > 0) || !std::isfinite(scale)) continue;
    wr *= scale;

    Eigen::VectorXd r(ns);
    bool rates_ok = true;
    for (int st = 0; st < ns; ++st) {
      int rs = partner_stream(ctx.mode, st);
      double gamma = ctx.desired_power(wr, p, rs) / ctx.disturbance(wr, p, rs);
      r[st] = std::log1p(gamma);
      if (!(r[st] > 1e-6)) rates_ok = false;
    }
    if (!rates_ok) continue;
    try {
      TransformedPoint cand = lift_in_space(ctx, p, wr, r, tau);
      if (!best || cand.eta < best->eta) best = std::move(cand);
      if (++found >= 8) break;  // keep the best of a handful of starts
    } catch (const ArgumentError&) {
      continue;
    }
  }
  return best;
}

inline IaResult run(const SystemParams& params, const ChannelRealization& ch, Mode mode,
                    const IaConfig& cfg, WeightSpace space) {
  params.validate();
  ch.validate();
  Context ctx;
  ctx.init(params, ch, mode, cfg.variant, std::move(space));
  IaResult res;
  res.design.mode = mode;

  // Necessary harvest check: even a full-length charge at maximum power must
  // cover the fixed relay draw.
  {
    Eigen::VectorXd pmaxv = ctx.pmax;
    double tau_hi = cfg.fixed_tau ? *cfg.fixed_tau : 1.0;
    for (int l = 0; l < ctx.L; ++l) {
      if (ctx.harvested(tau_hi, ctx.rf_power(pmaxv, l), l) <= params.relay_const_j[l]) {
        res.status = IaStatus::Infeasible;
        res.message = "relay " + std::to_string(l) + " cannot harvest its fixed draw";
        return res;
      }
    }
  }

  Rng rng(cfg.seed);
  auto maybe = sample_initial_point(ctx, cfg, rng);
  if (!maybe) {
    res.status = IaStatus::Infeasible;
    res.message = "no feasible starting point found";
    return res;
  }
  TransformedPoint pt = *maybe;

  conic::SolverOptions sopt;
  sopt.feas_tol = cfg.solver_feas_tol;
  sopt.gap_abs_tol = cfg.solver_gap_tol;
  sopt.gap_rel_tol = cfg.solver_gap_tol;
  sopt.max_iterations = cfg.solver_max_iterations;
  // The feasibility search only needs descent on the hinge penalty.
  conic::SolverOptions sopt_feas = sopt;
  sopt_feas.feas_tol = std::max(cfg.solver_feas_tol, 1e-8);
  sopt_feas.gap_abs_tol = std::max(cfg.solver_gap_tol, 1e-8);
  sopt_feas.gap_rel_tol = 1e-7;

  IaConfig work = cfg;
  if (work.penalty_weight <= 0.0) work.penalty_weight = 1e3 * std::max(1.0, pt.eta);

  int global_iter = 0;
  struct StepOut {
    TransformedPoint point;
    double eta_solved = kInf;
    bool optimal = false;
  };
  auto solve_step = [&](Phase phase, IterRecord& rec) -> std::optional<StepOut> {
    Subproblem sub = build(pt, ctx, work, phase);
    if (cfg.check_expansion_feasible) {
      double viol = conic::max_violation(sub.problem, sub.expansion);
      if (viol > cfg.expansion_check_tol)
        throw std::logic_error("inner-approximation property violated: " + std::to_string(viol));
    }
    auto t0 = std::chrono::steady_clock::now();
    conic::ConicSolution sol =
        conic::solve(sub.problem, phase == Phase::FeasibilitySearch ? sopt_feas : sopt);
    rec.solve_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    rec.solver_iters = sol.iterations;
    double pres_ok = phase == Phase::FeasibilitySearch ? 1e-6 : 1e-7;
    bool usable = sol.status == conic::SolveStatus::Optimal ||
                  ((sol.status == conic::SolveStatus::MaxIterations ||
                    sol.status == conic::SolveStatus::NumericalFailure) &&
                   sol.x.size() == sub.problem.num_vars && sol.x.allFinite() &&
                   std::isfinite(sol.objective) && sol.primal_residual < pres_ok);
    if (!usable) {
      char buf[160];
      std::snprintf(buf, sizeof(buf), "subproblem solve failed: %s (pres=%.2e dres=%.2e gap=%.2e)",
                    conic::to_string(sol.status), sol.primal_residual, sol.dual_residual,
                    sol.duality_gap);
      res.message = buf;
      return std::nullopt;
    }
    StepOut out;
    out.optimal = sol.status == conic::SolveStatus::Optimal;
    TransformedPoint nxt = sub.extract(sol.x, mode);
    out.eta_solved = nxt.eta;
    rec.eta = nxt.eta;
    if (phase == Phase::FeasibilitySearch) {
      double pen = 0.0;
      for (int i = 0; i < sub.penalty.size(); ++i) pen += std::max(0.0, sol.x[sub.penalty[i]]);
      rec.penalty = pen;
    }
    // numerical guards at the variable floors; frozen quantities are snapped
    for (int st = 0; st < ctx.ns; ++st) {
      nxt.q[st] = cfg.fix_user_power ? 1.0 / ctx.pmax[st] : std::max(nxt.q[st], 1.0 / ctx.pmax[st]);
      nxt.r[st] = std::max(nxt.r[st], kVarFloor);
      nxt.v[st] = std::max(nxt.v[st], kVarFloor);
      nxt.s[st] = std::max(nxt.s[st], std::min(kVarFloor, 0.5 * params.noise_user_w));
    }
    nxt.tau_tilde = std::clamp(nxt.tau_tilde, 1.0 + kVarFloor, kTauTildeCap);
    if (cfg.fixed_tau) nxt.tau_tilde = (1.0 + *cfg.fixed_tau) / (1.0 - *cfg.fixed_tau);
    for (int l = 0; l < ctx.L; ++l) {
      nxt.u[l] = std::max(nxt.u[l], kVarFloor);
      nxt.t[l] = std::max(nxt.t[l], kVarFloor);
    }
    for (int k = 0; k < ctx.K; ++k) nxt.z[k] = std::max(nxt.z[k], kVarFloor);

    // Re-tighten the slack chain at the accepted iterate: the surrogate
    // constraints are inner, so the solution supports exact re-lifting (after
    // shrinking away solver-tolerance budget overshoots); this keeps every
    // expansion point exactly feasible for the next subproblem.
    out.point = nxt;
    try {
      double tau = (nxt.tau_tilde - 1.0) / (nxt.tau_tilde + 1.0);
      Eigen::VectorXd p = nxt.q.cwiseInverse();
      if (cfg.fix_user_power) p = ctx.pmax;
      out.point = sanitize_and_lift(ctx, p, nxt.w, nxt.r, tau, !cfg.fixed_tau.has_value());
      if (cfg.fixed_tau) out.point.tau_tilde = (1.0 + *cfg.fixed_tau) / (1.0 - *cfg.fixed_tau);
    } catch (const ArgumentError&) {
      // keep the raw solver iterate
    }
    return out;
  };

  // Phase 1: drive the QoS hinge to zero.
  auto qos_gap = [&](const TransformedPoint& x) {
    double g = 0.0;
    for (int st = 0; st < ctx.ns; ++st)
      g += std::max(0.0, (1.0 + x.tau_tilde) * ctx.qos[st] - x.r[st]);
    return g;
  };

  double best_pen = qos_gap(pt);
  int stall = 0, boost_stall = 0;
  while (best_pen > 1e-8) {
    if (res.phase1_iters >= cfg.max_phase1_iterations) {
      res.status = IaStatus::Infeasible;
      res.message = "feasibility search hit the iteration cap";
      return res;
    }
    IterRecord rec;
    rec.iteration = ++global_iter;
    rec.phase = 1;
    auto nxt = solve_step(Phase::FeasibilitySearch, rec);
    if (!nxt) {
      res.status = IaStatus::SolverFailure;
      res.failed_iteration = global_iter;
      return res;
    }
    pt = nxt->point;
    res.phase1_iters++;
    res.trace.iters.push_back(rec);
    double pen = qos_gap(pt);
    if (pen < best_pen * (1.0 - 1e-6) - 1e-15) {
      best_pen = pen;
      stall = 0;
      boost_stall = 0;
    } else {
      ++stall;
      ++boost_stall;
      if (boost_stall >= cfg.penalty_boost_iterations) {
        work.penalty_weight *= 2.0;
        boost_stall = 0;
      }
      if (stall >= cfg.penalty_stall_iterations) {
        res.status = IaStatus::Infeasible;
        res.message = "quality-of-service targets unreachable";
        return res;
      }
    }
    best_pen = std::min(best_pen, pen);
  }

  // Phase 2: monotone descent of eta.
  double prev_eta = pt.eta;
  double last_solved = pt.eta;
  bool converged = false;
  for (int it = 0; it < cfg.max_outer_iterations; ++it) {
    IterRecord rec;
    rec.iteration = ++global_iter;
    rec.phase = 2;
    auto nxt = solve_step(Phase::Descent, rec);
    if (!nxt) {
      res.status = IaStatus::SolverFailure;
      res.failed_iteration = global_iter;
      return res;
    }
    if (!nxt->optimal && nxt->eta_solved > prev_eta + 1e-9) {
      res.message = "descent stalled on an inexact subproblem solve";
      break;
    }
    pt = nxt->point;
    last_solved = nxt->eta_solved;
    res.phase2_iters++;
    res.trace.iters.push_back(rec);
    if (std::abs(prev_eta - nxt->eta_solved) < cfg.objective_tolerance) {
      converged = true;
      break;
    }
    prev_eta = nxt->eta_solved;
  }

  res.status = converged ? IaStatus::Converged : IaStatus::MaxIterations;
  res.point = pt;
  res.eta = last_solved;
  res.design = project(pt);
  res.design.w = ctx.space.expand(pt.w);
  if (cfg.fix_user_power) res.design.p = ctx.pmax;
  return res;
}

}  // namespace engine_detail

// Full joint design: rates, user powers, relay weights and charging time.
inline IaResult run_ia(const SystemParams& params, const ChannelRealization& ch, Mode mode,
                       const IaConfig& config = {}) {
  return engine_detail::run(params, ch, mode, config,
                            engine_detail::WeightSpace::identity(params.num_relays));
}

enum class Scheme { FullOneWay, FullTwoWay, ZfOneWay, ZfTwoWay };

struct ComplexityCount {
  int real_vars = 0;
  int cones = 0;
};

// Closed-form size of the per-iteration cone program for each scheme.
inline ComplexityCount complexity_estimate(int pairs, int relays, Scheme scheme) {
  if (pairs < 1 || relays < 1) throw ArgumentError("complexity_estimate: need pairs, relays >= 1");
  int K = pairs, L = relays;
  switch (scheme) {
    case Scheme::FullOneWay: return {10 * K + 6 * L + 2, 10 * K + 5 * L};
    case Scheme::FullTwoWay: return {19 * K + 6 * L + 2, 16 * K + 5 * L};
    case Scheme::ZfOneWay: return {10 * K + 5 * L + 2 - 2 * K * K, 9 * K + 5 * L};
    case Scheme::ZfTwoWay: return {19 * K + 5 * L + 2 - 2 * K * K, 14 * K + 5 * L};
  }
  throw ArgumentError("complexity_estimate: unknown scheme");
}

}  // namespace eef
