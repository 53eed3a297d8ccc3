#pragma once

#include <Eigen/Dense>
#include <json.hpp>

#include "eef/common.hpp"

namespace eef {

enum class Mode { OneWay, TwoWay };

inline const char* to_string(Mode m) { return m == Mode::OneWay ? "ow" : "tw"; }

// Physical constants of a K-pair, L-relay network.
//
// Per-user quantities are vectors of length 2K indexed user_index(i, k) with
// i in {1, 2} and pair k in 0..K-1. Per-relay quantities have length L.
// Powers are stored in watts (dBm conversion happens at config load), signal
// processing coefficients in W/(Gnats/s), energies in joules per unit block
// (block time T = 1 s, so a constant power of x W contributes x J).
struct SystemParams {
  int num_pairs = 0;   // K
  int num_relays = 0;  // L
  double bandwidth_hz = 250e3;
  double noise_user_w = 1e-12;   // receiver noise power
  double noise_relay_w = 1e-12;  // relay input noise power

  Eigen::VectorXd qos_nats;                // 2K, min effective rate, nats/s/Hz
  Eigen::VectorXd pmax_user_w;             // 2K
  Eigen::VectorXd pa_eff_user;             // 2K, peak PA efficiency in (0,1)
  Eigen::VectorXd idle_w;                  // 2K
  Eigen::VectorXd active_circuit_w;        // 2K
  Eigen::VectorXd sp_encode_w_per_gnats;   // 2K
  Eigen::VectorXd sp_decode_w_per_gnats;   // 2K

  Eigen::VectorXd pmax_relay_w;   // L
  Eigen::VectorXd pa_eff_relay;   // L, in (0,1)
  Eigen::VectorXd eh_max_w;       // L, harvest saturation power
  Eigen::VectorXd eh_c_per_w;     // L, harvester steepness, 1/W
  Eigen::VectorXd eh_d_w;         // L, harvester turn-on point, W
  Eigen::VectorXd relay_const_j;  // L, fixed relay energy per block

  static int user_index(int i, int k) { return 2 * k + (i - 1); }

  double qos(int i, int k) const { return qos_nats[user_index(i, k)]; }
  double pmax_user(int i, int k) const { return pmax_user_w[user_index(i, k)]; }
  double pa_eff(int i, int k) const { return pa_eff_user[user_index(i, k)]; }
  double idle(int i, int k) const { return idle_w[user_index(i, k)]; }
  double active_circuit(int i, int k) const { return active_circuit_w[user_index(i, k)]; }
  double sp_encode(int i, int k) const { return sp_encode_w_per_gnats[user_index(i, k)]; }
  double sp_decode(int i, int k) const { return sp_decode_w_per_gnats[user_index(i, k)]; }

  // Fraction of the saturation sigmoid below the turn-on point.
  double eh_beta(int l) const { return 1.0 / (1.0 + std::exp(eh_c_per_w[l] * eh_d_w[l])); }

  // PA consumption coefficient: consumption = pa_coef * sqrt(p).
  double pa_coef(int i, int k) const {
    return std::sqrt(pmax_user(i, k)) / pa_eff(i, k);
  }

  // W consumed per unit (nats/s/Hz) of rate, encoder at U_ik plus decoder at
  // the pair partner. The table coefficients are per Gnats/s, hence the 1e-9.
  double sp_rate_coef(int i, int k) const {
    int ibar = 3 - i;
    return (sp_encode(i, k) + sp_decode(ibar, k)) * 1e-9 * bandwidth_hz;
  }

  int num_streams(Mode mode) const { return mode == Mode::OneWay ? num_pairs : 2 * num_pairs; }

  // Defaults match the reference simulation setup at 33 dBm user power.
  static SystemParams defaults(int pairs, int relays, double pmax_w = dbm_to_watt(33.0)) {
    SystemParams p;
    p.num_pairs = pairs;
    p.num_relays = relays;
    int nu = 2 * pairs;
    p.qos_nats = Eigen::VectorXd::Constant(nu, 0.5);
    p.pmax_user_w = Eigen::VectorXd::Constant(nu, pmax_w);
    p.pa_eff_user = Eigen::VectorXd::Constant(nu, 0.35);
    p.idle_w = Eigen::VectorXd::Constant(nu, 1e-4);
    p.active_circuit_w = Eigen::VectorXd::Constant(nu, 1e-3);
    p.sp_encode_w_per_gnats = Eigen::VectorXd::Constant(nu, 0.05);
    p.sp_decode_w_per_gnats = Eigen::VectorXd::Constant(nu, 0.05);
    p.pmax_relay_w = Eigen::VectorXd::Constant(relays, dbm_to_watt(33.0));
    p.pa_eff_relay = Eigen::VectorXd::Constant(relays, 0.35);
    p.eh_max_w = Eigen::VectorXd::Constant(relays, 24e-3);
    p.eh_c_per_w = Eigen::VectorXd::Constant(relays, 150.0);
    p.eh_d_w = Eigen::VectorXd::Constant(relays, 0.014);
    p.relay_const_j = Eigen::VectorXd::Constant(relays, 1e-3);
    return p;
  }

  void validate() const {
    if (num_pairs < 1 || num_relays < 1)
      throw ArgumentError("SystemParams: need at least one pair and one relay");
    int nu = 2 * num_pairs;
    auto expect = [](const Eigen::VectorXd& v, int n, const char* name) {
      if (v.size() != n) throw ArgumentError(std::string("SystemParams: bad length for ") + name);
    };
    expect(qos_nats, nu, "qos_nats");
    expect(pmax_user_w, nu, "pmax_user_w");
    expect(pa_eff_user, nu, "pa_eff_user");
    expect(idle_w, nu, "idle_w");
    expect(active_circuit_w, nu, "active_circuit_w");
    expect(sp_encode_w_per_gnats, nu, "sp_encode_w_per_gnats");
    expect(sp_decode_w_per_gnats, nu, "sp_decode_w_per_gnats");
    expect(pmax_relay_w, num_relays, "pmax_relay_w");
    expect(pa_eff_relay, num_relays, "pa_eff_relay");
    expect(eh_max_w, num_relays, "eh_max_w");
    expect(eh_c_per_w, num_relays, "eh_c_per_w");
    expect(eh_d_w, num_relays, "eh_d_w");
    expect(relay_const_j, num_relays, "relay_const_j");
    if (bandwidth_hz <= 0 || noise_user_w <= 0 || noise_relay_w <= 0)
      throw ArgumentError("SystemParams: bandwidth and noise powers must be positive");
    auto positive = [](const Eigen::VectorXd& v, const char* name) {
      if ((v.array() <= 0.0).any()) throw ArgumentError(std::string("SystemParams: ") + name + " must be positive");
    };
    positive(pmax_user_w, "pmax_user_w");
    positive(pmax_relay_w, "pmax_relay_w");
    positive(eh_max_w, "eh_max_w");
    positive(eh_c_per_w, "eh_c_per_w");
    positive(eh_d_w, "eh_d_w");
    positive(idle_w, "idle_w");
    positive(active_circuit_w, "active_circuit_w");
    positive(relay_const_j, "relay_const_j");
    if ((qos_nats.array() < 0.0).any()) throw ArgumentError("SystemParams: qos must be nonnegative");
    if ((sp_encode_w_per_gnats.array() < 0.0).any() || (sp_decode_w_per_gnats.array() < 0.0).any())
      throw ArgumentError("SystemParams: signal processing coefficients must be nonnegative");
    auto in01 = [](const Eigen::VectorXd& v, const char* name) {
      if ((v.array() <= 0.0).any() || (v.array() >= 1.0).any())
        throw ArgumentError(std::string("SystemParams: ") + name + " must lie in (0,1)");
    };
    in01(pa_eff_user, "pa_eff_user");
    in01(pa_eff_relay, "pa_eff_relay");
    for (int l = 0; l < num_relays; ++l) {
      double b = eh_beta(l);
      if (!(b > 0.0 && b < 1.0)) throw ArgumentError("SystemParams: harvester beta out of (0,1)");
    }
  }

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["pairs"] = num_pairs;
    j["relays"] = num_relays;
    j["bandwidth_hz"] = bandwidth_hz;
    j["noise_user_dbm"] = watt_to_dbm(noise_user_w);
    j["noise_relay_dbm"] = watt_to_dbm(noise_relay_w);
    auto vec = [](const Eigen::VectorXd& v) {
      return std::vector<double>(v.data(), v.data() + v.size());
    };
    j["qos_nats"] = vec(qos_nats);
    j["pmax_user_dbm"] = vec(pmax_user_w.unaryExpr([](double w) { return watt_to_dbm(w); }));
    j["pa_eff_user"] = vec(pa_eff_user);
    j["idle_w"] = vec(idle_w);
    j["active_circuit_w"] = vec(active_circuit_w);
    j["sp_encode_w_per_gnats"] = vec(sp_encode_w_per_gnats);
    j["sp_decode_w_per_gnats"] = vec(sp_decode_w_per_gnats);
    j["pmax_relay_dbm"] = vec(pmax_relay_w.unaryExpr([](double w) { return watt_to_dbm(w); }));
    j["pa_eff_relay"] = vec(pa_eff_relay);
    j["eh_max_w"] = vec(eh_max_w);
    j["eh_c_per_w"] = vec(eh_c_per_w);
    j["eh_d_w"] = vec(eh_d_w);
    j["relay_const_j"] = vec(relay_const_j);
    return j;
  }

  // Accepts scalars (broadcast) or arrays for every per-user / per-relay
  // field. Power levels suffixed _dbm are converted to watts here.
  static SystemParams from_json(const nlohmann::json& j) {
    int pairs = j.at("pairs").get<int>();
    int relays = j.at("relays").get<int>();
    SystemParams p = defaults(pairs, relays);
    auto load = [&](const char* key, Eigen::VectorXd& dst, bool dbm) {
      if (!j.contains(key)) return;
      const auto& v = j.at(key);
      auto conv = [&](double x) { return dbm ? dbm_to_watt(x) : x; };
      if (v.is_number()) {
        dst.setConstant(conv(v.get<double>()));
      } else {
        auto arr = v.get<std::vector<double>>();
        if (static_cast<int>(arr.size()) != dst.size())
          throw ArgumentError(std::string("config: bad array length for ") + key);
        for (int idx = 0; idx < dst.size(); ++idx) dst[idx] = conv(arr[idx]);
      }
    };
    if (j.contains("bandwidth_hz")) p.bandwidth_hz = j.at("bandwidth_hz").get<double>();
    if (j.contains("noise_user_dbm")) p.noise_user_w = dbm_to_watt(j.at("noise_user_dbm").get<double>());
    if (j.contains("noise_relay_dbm")) p.noise_relay_w = dbm_to_watt(j.at("noise_relay_dbm").get<double>());
    load("qos_nats", p.qos_nats, false);
    load("pmax_user_dbm", p.pmax_user_w, true);
    load("pa_eff_user", p.pa_eff_user, false);
    load("idle_w", p.idle_w, false);
    load("active_circuit_w", p.active_circuit_w, false);
    load("sp_encode_w_per_gnats", p.sp_encode_w_per_gnats, false);
    load("sp_decode_w_per_gnats", p.sp_decode_w_per_gnats, false);
    load("pmax_relay_dbm", p.pmax_relay_w, true);
    load("pa_eff_relay", p.pa_eff_relay, false);
    load("eh_max_w", p.eh_max_w, false);
    load("eh_c_per_w", p.eh_c_per_w, false);
    load("eh_d_w", p.eh_d_w, false);
    load("relay_const_j", p.relay_const_j, false);
    p.validate();
    return p;
  }
};

}  // namespace eef
