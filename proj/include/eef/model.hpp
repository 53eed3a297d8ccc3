#pragma once

#include <Eigen/Dense>
#include <utility>
#include <vector>

#include "eef/channel.hpp"
#include "eef/common.hpp"
#include "eef/params.hpp"

namespace eef {

// Model substitutions used by the simplified baseline schemes. The realistic
// model is the default everywhere; reported efficiencies are always
// re-evaluated under the realistic model.
struct ModelVariant {
  enum class PaModel { SqrtEfficiency, FixedEfficiency };
  enum class EhModel { Sigmoid, LinearFixed };
  PaModel pa = PaModel::SqrtEfficiency;
  EhModel eh = EhModel::Sigmoid;
  bool zero_sp_power = false;
  double linear_eh_efficiency = 0.8;

  bool realistic() const {
    return pa == PaModel::SqrtEfficiency && eh == EhModel::Sigmoid && !zero_sp_power;
  }
};

// One transmit configuration: user powers, relay weights, rates and the
// charging-time fraction. p and r have one entry per stream: K entries (pair
// order) one-way, 2K entries (user_index order) two-way.
struct DesignPoint {
  Mode mode = Mode::OneWay;
  Eigen::VectorXd p;   // W
  Eigen::VectorXcd w;  // unitless relay weights, length L
  Eigen::VectorXd r;   // nats/s/Hz
  double tau = 0.0;    // charging fraction of the block, in (0,1)

  void validate(int pairs, int relays) const {
    int ns = mode == Mode::OneWay ? pairs : 2 * pairs;
    if (p.size() != ns || r.size() != ns) throw ArgumentError("DesignPoint: bad p/r length");
    if (w.size() != relays) throw ArgumentError("DesignPoint: bad w length");
    if (!(tau > 0.0 && tau < 1.0)) throw ArgumentError("DesignPoint: tau must lie in (0,1)");
    if ((p.array() <= 0.0).any()) throw ArgumentError("DesignPoint: powers must be positive");
    if ((r.array() < 0.0).any()) throw ArgumentError("DesignPoint: rates must be nonnegative");
  }
};

// Stream s -> transmitting user (i,k).
inline std::pair<int, int> stream_user(Mode mode, int s) {
  if (mode == Mode::OneWay) return {1, s};
  return {s % 2 + 1, s / 2};
}

inline int stream_index(Mode mode, int i, int k) {
  return mode == Mode::OneWay ? k : SystemParams::user_index(i, k);
}

// Effective channel row for the two-hop link relayed toward receiver (i,k)
// from transmitter (ihat,j): entrywise product of the two user rows.
inline Eigen::RowVectorXcd relay_path_row(const ChannelRealization& ch, int i, int k, int ihat,
                                          int j) {
  return ch.user_row(i, k).cwiseProduct(ch.user_row(ihat, j));
}

// Plain (unconjugated) product row . w.
inline std::complex<double> path_gain(const Eigen::RowVectorXcd& row, const Eigen::VectorXcd& w) {
  return row.cwiseProduct(w.transpose()).sum();
}

// RF power collected at the input of relay l during the charging phase.
inline double rf_input_power(const SystemParams& params, const ChannelRealization& ch,
                             const Eigen::VectorXd& p, Mode mode, int l) {
  int ns = params.num_streams(mode);
  if (p.size() != ns) throw ArgumentError("rf_input_power: p has wrong length for mode");
  if (l < 0 || l >= params.num_relays) throw ArgumentError("rf_input_power: bad relay index");
  double acc = 0.0;
  for (int s = 0; s < ns; ++s) {
    auto [i, k] = stream_user(mode, s);
    acc += p[s] * std::norm(ch.f(i, k, l));
  }
  return acc;
}

// Saturating harvester: tau * Pdc/(1-beta) * (sigmoid(c (p_rf - d)) - beta).
// Zero at zero input, bounded by tau * Pdc. tau = 1 evaluates the full-block
// limit; the linear variant replaces the whole curve by tau * eff * p_rf.
inline double harvested_energy(const SystemParams& params, double tau, double p_rf, int l,
                               const ModelVariant& variant = {}) {
  if (!(tau > 0.0 && tau <= 1.0)) throw ArgumentError("harvested_energy: tau must lie in (0,1]");
  if (p_rf < 0.0) throw ArgumentError("harvested_energy: RF power must be nonnegative");
  if (l < 0 || l >= params.num_relays) throw ArgumentError("harvested_energy: bad relay index");
  if (variant.eh == ModelVariant::EhModel::LinearFixed)
    return tau * variant.linear_eh_efficiency * p_rf;
  double beta = params.eh_beta(l);
  double sig = 1.0 / (1.0 + std::exp(-params.eh_c_per_w[l] * (p_rf - params.eh_d_w[l])));
  return tau * params.eh_max_w[l] / (1.0 - beta) * (sig - beta);
}

namespace model_detail {

// Desired and disturbance powers at receiver (i,k); shared by sinr() and the
// feasibility report.
struct SinrParts {
  double desired = 0.0;
  double interference = 0.0;
  double relay_noise = 0.0;
};

inline SinrParts sinr_parts(const SystemParams& params, const ChannelRealization& ch,
                            const Eigen::VectorXcd& w, const Eigen::VectorXd& p, Mode mode,
                            int i, int k) {
  SinrParts out;
  int K = params.num_pairs;
  int ibar = 3 - i;
  double p_tx = mode == Mode::OneWay ? p[k] : p[stream_index(mode, ibar, k)];
  out.desired = p_tx * std::norm(path_gain(relay_path_row(ch, i, k, ibar, k), w));
  for (int j = 0; j < K; ++j) {
    if (j == k) continue;
    if (mode == Mode::OneWay) {
      out.interference += p[j] * std::norm(path_gain(relay_path_row(ch, i, k, 1, j), w));
    } else {
      for (int ihat = 1; ihat <= 2; ++ihat)
        out.interference += p[stream_index(mode, ihat, j)] *
                            std::norm(path_gain(relay_path_row(ch, i, k, ihat, j), w));
    }
  }
  out.relay_noise =
      params.noise_relay_w * ch.user_row(i, k).cwiseProduct(w.transpose()).squaredNorm();
  return out;
}

}  // namespace model_detail

// SINR at receiver (i,k). One-way receivers are U_2k (pass i = 2).
inline double sinr(const SystemParams& params, const ChannelRealization& ch,
                   const Eigen::VectorXcd& w, const Eigen::VectorXd& p, Mode mode, int i, int k) {
  int ns = params.num_streams(mode);
  if (p.size() != ns) throw ArgumentError("sinr: p has wrong length for mode");
  if (w.size() != params.num_relays) throw ArgumentError("sinr: w has wrong length");
  if (k < 0 || k >= params.num_pairs || (i != 1 && i != 2)) throw ArgumentError("sinr: bad receiver");
  if (mode == Mode::OneWay && i != 2) throw ArgumentError("sinr: one-way receivers are U_2k");
  auto parts = model_detail::sinr_parts(params, ch, w, p, mode, i, k);
  return parts.desired / (parts.interference + parts.relay_noise + params.noise_user_w);
}

// PA consumption of user (i,k) at transmit power p: sqrt(pmax)/eff * sqrt(p).
inline double pa_power(const SystemParams& params, double p, int i, int k,
                       const ModelVariant& variant = {}) {
  if (p <= 0.0) throw ArgumentError("pa_power: transmit power must be positive");
  if (variant.pa == ModelVariant::PaModel::FixedEfficiency) return p / params.pa_eff(i, k);
  return params.pa_coef(i, k) * std::sqrt(p);
}

// Energy drawn by pair k over one block.
inline double pair_energy(const SystemParams& params, double tau, const Eigen::VectorXd& p,
                          const Eigen::VectorXd& r, int k, Mode mode,
                          const ModelVariant& variant = {}) {
  if (k < 0 || k >= params.num_pairs) throw ArgumentError("pair_energy: bad pair index");
  int ns = params.num_streams(mode);
  if (p.size() != ns || r.size() != ns) throw ArgumentError("pair_energy: bad p/r length");
  if (mode == Mode::OneWay) {
    double sp = variant.zero_sp_power ? 0.0 : params.sp_rate_coef(1, k) * r[k];
    double p_prime = params.idle(1, k) + params.active_circuit(2, k);
    double p_dprime = params.idle(2, k) + params.active_circuit(1, k);
    return 0.5 * (1.0 - tau) * (sp + p_prime) +
           0.5 * (1.0 + tau) * (pa_power(params, p[k], 1, k, variant) + p_dprime);
  }
  double cir = params.active_circuit(1, k) + params.active_circuit(2, k);
  double pa = 0.0, sp = 0.0;
  for (int i = 1; i <= 2; ++i) {
    int s = stream_index(mode, i, k);
    pa += pa_power(params, p[s], i, k, variant);
    if (!variant.zero_sp_power) sp += params.sp_rate_coef(i, k) * r[s];
  }
  return cir + 0.5 * (1.0 + tau) * pa + 0.5 * (1.0 - tau) * sp;
}

// Power radiated by relay l: |w_l|^2 * (input noise + collected RF power).
inline double radiated_power(const SystemParams& params, const ChannelRealization& ch,
                             const Eigen::VectorXd& p, const Eigen::VectorXcd& w, Mode mode,
                             int l) {
  return std::norm(w[l]) * (params.noise_relay_w + rf_input_power(params, ch, p, mode, l));
}

// Energy drawn by relay l over one block: PA draw during the forwarding slot
// plus the fixed activation energy.
inline double relay_energy(const SystemParams& params, const ChannelRealization& ch, double tau,
                           const Eigen::VectorXd& p, const Eigen::VectorXcd& w, int l, Mode mode) {
  if (l < 0 || l >= params.num_relays) throw ArgumentError("relay_energy: bad relay index");
  double prad = radiated_power(params, ch, p, w, mode, l);
  return 0.5 * (1.0 - tau) * std::sqrt(params.pmax_relay_w[l] * prad) / params.pa_eff_relay[l] +
         params.relay_const_j[l];
}

// Energy efficiency of pair k in nats per joule: effective delivered
// information (rate x bandwidth over the data fraction of the block) divided
// by the pair's energy.
inline double pair_ee(const SystemParams& params, double tau, const Eigen::VectorXd& p,
                      const Eigen::VectorXd& r, int k, Mode mode,
                      const ModelVariant& variant = {}) {
  if (k < 0 || k >= params.num_pairs) throw ArgumentError("pair_ee: bad pair index");
  double sum_rate = mode == Mode::OneWay ? r[k]
                                         : r[stream_index(mode, 1, k)] + r[stream_index(mode, 2, k)];
  if (sum_rate <= 0.0) throw UndefinedValueError("pair_ee: zero rate");
  double nats = 0.5 * (1.0 - tau) * sum_rate * params.bandwidth_hz;
  return nats / pair_energy(params, tau, p, r, k, mode, variant);
}

// Same quantity normalized per Hz of bandwidth.
inline double pair_ee_per_hz(const SystemParams& params, double tau, const Eigen::VectorXd& p,
                             const Eigen::VectorXd& r, int k, Mode mode,
                             const ModelVariant& variant = {}) {
  return pair_ee(params, tau, p, r, k, mode, variant) / params.bandwidth_hz;
}

// Slack-by-slack constraint evaluation. A design is feasible when every slack
// is >= -tolerance; infeasibility is an outcome, not an error.
struct FeasibilityReport {
  double tolerance = 1e-6;
  bool feasible = false;
  Eigen::VectorXd rate_slack;         // per stream: log(1+sinr) - r
  Eigen::VectorXd harvest_slack;      // per relay: harvested - consumed
  Eigen::VectorXd relay_power_slack;  // per relay: pmax_relay - radiated
  Eigen::VectorXd qos_slack;          // per stream: (1-tau)/2 r - Q
  Eigen::VectorXd user_power_slack;   // per stream: min(pmax - p, p)

  double min_slack() const {
    double m = kInf;
    for (const auto* v : {&rate_slack, &harvest_slack, &relay_power_slack, &qos_slack, &user_power_slack})
      if (v->size() > 0) m = std::min(m, v->minCoeff());
    return m;
  }
};

inline FeasibilityReport check_feasibility(const SystemParams& params, const ChannelRealization& ch,
                                           const DesignPoint& design, double tolerance = 1e-6,
                                           const ModelVariant& variant = {}) {
  design.validate(params.num_pairs, params.num_relays);
  Mode mode = design.mode;
  int ns = params.num_streams(mode);
  int L = params.num_relays;
  FeasibilityReport rep;
  rep.tolerance = tolerance;
  rep.rate_slack.resize(ns);
  rep.qos_slack.resize(ns);
  rep.user_power_slack.resize(ns);
  for (int s = 0; s < ns; ++s) {
    auto [i, k] = stream_user(mode, s);
    int irecv = mode == Mode::OneWay ? 2 : 3 - i;
    double g = sinr(params, ch, design.w, design.p, mode, irecv, k);
    rep.rate_slack[s] = std::log1p(g) - design.r[s];
    rep.qos_slack[s] = 0.5 * (1.0 - design.tau) * design.r[s] - params.qos(i, k);
    rep.user_power_slack[s] = std::min(params.pmax_user(i, k) - design.p[s], design.p[s]);
  }
  rep.harvest_slack.resize(L);
  rep.relay_power_slack.resize(L);
  for (int l = 0; l < L; ++l) {
    double p_rf = rf_input_power(params, ch, design.p, mode, l);
    rep.harvest_slack[l] = harvested_energy(params, design.tau, p_rf, l, variant) -
                           relay_energy(params, ch, design.tau, design.p, design.w, l, mode);
    rep.relay_power_slack[l] =
        params.pmax_relay_w[l] - radiated_power(params, ch, design.p, design.w, mode, l);
  }
  rep.feasible = rep.min_slack() >= -tolerance;
  return rep;
}

}  // namespace eef
