#pragma once

#include <Eigen/Dense>
#include <json.hpp>

#include "eef/common.hpp"
#include "eef/params.hpp"

namespace eef {

// Network layout generator. U_1k sits at (0, spacing*(k-1)), U_2k across at
// (pair_separation_m, spacing*(k-1)) with spacing = pair_separation_m; relays
// fall uniformly inside the bounding rectangle of all users.
struct GeometryConfig {
  double pair_separation_m = 10.0;
  double pathloss_exponent = 3.5;
  double pathloss_ref_distance_m = 1.0;
  std::uint64_t seed = 0;

  void validate() const {
    if (pair_separation_m <= 0) throw ArgumentError("GeometryConfig: separation must be positive");
    if (pathloss_exponent <= 2.0) throw ArgumentError("GeometryConfig: pathloss exponent must exceed 2");
    if (pathloss_ref_distance_m <= 0) throw ArgumentError("GeometryConfig: reference distance must be positive");
  }

  // Unit gain at the reference distance, d^-alpha beyond it.
  double pathloss(double distance_m) const {
    double d = std::max(distance_m, pathloss_ref_distance_m);
    return std::pow(d / pathloss_ref_distance_m, -pathloss_exponent);
  }

  nlohmann::json to_json() const {
    return {{"pair_separation_m", pair_separation_m},
            {"pathloss_exponent", pathloss_exponent},
            {"pathloss_ref_distance_m", pathloss_ref_distance_m},
            {"seed", seed}};
  }

  static GeometryConfig from_json(const nlohmann::json& j) {
    GeometryConfig g;
    if (j.contains("pair_separation_m")) g.pair_separation_m = j.at("pair_separation_m").get<double>();
    if (j.contains("pathloss_exponent")) g.pathloss_exponent = j.at("pathloss_exponent").get<double>();
    if (j.contains("pathloss_ref_distance_m"))
      g.pathloss_ref_distance_m = j.at("pathloss_ref_distance_m").get<double>();
    if (j.contains("seed")) g.seed = j.at("seed").get<std::uint64_t>();
    g.validate();
    return g;
  }
};

struct NodeLayout {
  Eigen::MatrixX2d user_pos;   // 2K rows, row SystemParams::user_index(i,k)
  Eigen::MatrixX2d relay_pos;  // L rows

  double user_relay_distance(int i, int k, int l) const {
    return (user_pos.row(SystemParams::user_index(i, k)) - relay_pos.row(l)).norm();
  }
};

// Complex amplitude gains for every user-relay link, plus the geometry that
// produced them. gains has 2K rows (user_index(i,k)) and L columns; channel
// reciprocity holds because each link is drawn once.
struct ChannelRealization {
  int num_pairs = 0;
  int num_relays = 0;
  Eigen::MatrixXcd gains;  // 2K x L
  NodeLayout layout;
  std::uint64_t seed = 0;

  std::complex<double> f(int i, int k, int l) const {
    return gains(SystemParams::user_index(i, k), l);
  }

  // Row vector of gains seen by user (i,k) across all relays.
  Eigen::RowVectorXcd user_row(int i, int k) const {
    return gains.row(SystemParams::user_index(i, k));
  }

  void validate() const {
    if (gains.rows() != 2 * num_pairs || gains.cols() != num_relays)
      throw ArgumentError("ChannelRealization: gains must be (2K) x L");
    if (!gains.allFinite()) throw ArgumentError("ChannelRealization: gains must be finite");
  }

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["pairs"] = num_pairs;
    j["relays"] = num_relays;
    j["seed"] = seed;
    nlohmann::json g = nlohmann::json::array();
    for (int i = 1; i <= 2; ++i) {
      nlohmann::json gi = nlohmann::json::array();
      for (int k = 0; k < num_pairs; ++k) {
        nlohmann::json gk = nlohmann::json::array();
        for (int l = 0; l < num_relays; ++l) {
          auto c = f(i, k, l);
          gk.push_back({c.real(), c.imag()});
        }
        gi.push_back(gk);
      }
      g.push_back(gi);
    }
    j["gains"] = g;
    nlohmann::json up = nlohmann::json::array(), rp = nlohmann::json::array();
    for (int r = 0; r < layout.user_pos.rows(); ++r)
      up.push_back({layout.user_pos(r, 0), layout.user_pos(r, 1)});
    for (int r = 0; r < layout.relay_pos.rows(); ++r)
      rp.push_back({layout.relay_pos(r, 0), layout.relay_pos(r, 1)});
    j["user_positions_m"] = up;
    j["relay_positions_m"] = rp;
    return j;
  }

  static ChannelRealization from_json(const nlohmann::json& j) {
    ChannelRealization ch;
    ch.num_pairs = j.at("pairs").get<int>();
    ch.num_relays = j.at("relays").get<int>();
    ch.seed = j.value("seed", std::uint64_t{0});
    ch.gains.resize(2 * ch.num_pairs, ch.num_relays);
    const auto& g = j.at("gains");
    for (int i = 1; i <= 2; ++i)
      for (int k = 0; k < ch.num_pairs; ++k)
        for (int l = 0; l < ch.num_relays; ++l) {
          const auto& c = g.at(i - 1).at(k).at(l);
          ch.gains(SystemParams::user_index(i, k), l) = {c.at(0).get<double>(), c.at(1).get<double>()};
        }
    const auto& up = j.at("user_positions_m");
    const auto& rp = j.at("relay_positions_m");
    ch.layout.user_pos.resize(up.size(), 2);
    for (size_t r = 0; r < up.size(); ++r) {
      ch.layout.user_pos(r, 0) = up.at(r).at(0).get<double>();
      ch.layout.user_pos(r, 1) = up.at(r).at(1).get<double>();
    }
    ch.layout.relay_pos.resize(rp.size(), 2);
    for (size_t r = 0; r < rp.size(); ++r) {
      ch.layout.relay_pos(r, 0) = rp.at(r).at(0).get<double>();
      ch.layout.relay_pos(r, 1) = rp.at(r).at(1).get<double>();
    }
    ch.validate();
    return ch;
  }
};

namespace detail {
inline NodeLayout place_nodes_with_rng(const GeometryConfig& geometry, int pairs, int relays,
                                       Rng& rng) {
  geometry.validate();
  if (pairs < 1 || relays < 1) throw ArgumentError("place_nodes: need pairs >= 1 and relays >= 1");
  NodeLayout layout;
  layout.user_pos.resize(2 * pairs, 2);
  double sep = geometry.pair_separation_m;
  for (int k = 0; k < pairs; ++k) {
    layout.user_pos.row(SystemParams::user_index(1, k)) << 0.0, sep * k;
    layout.user_pos.row(SystemParams::user_index(2, k)) << sep, sep * k;
  }
  double height = sep * (pairs - 1);
  layout.relay_pos.resize(relays, 2);
  for (int l = 0; l < relays; ++l) {
    layout.relay_pos(l, 0) = rng.uniform() * sep;
    layout.relay_pos(l, 1) = rng.uniform() * height;
  }
  return layout;
}
}  // namespace detail

inline NodeLayout place_nodes(const GeometryConfig& geometry, int pairs, int relays) {
  Rng rng(geometry.seed);
  return detail::place_nodes_with_rng(geometry, pairs, relays, rng);
}

// Rayleigh-fading draw: f = sqrt(PL(d)) * g with g ~ CN(0,1). Node placement
// and fading both derive from `seed`, so equal seeds give bit-identical
// realizations.
inline ChannelRealization sample_channels(const GeometryConfig& geometry, const SystemParams& params,
                                          std::uint64_t seed) {
  params.validate();
  Rng rng(seed);
  ChannelRealization ch;
  ch.num_pairs = params.num_pairs;
  ch.num_relays = params.num_relays;
  ch.seed = seed;
  ch.layout = detail::place_nodes_with_rng(geometry, params.num_pairs, params.num_relays, rng);
  ch.gains.resize(2 * params.num_pairs, params.num_relays);
  for (int i = 1; i <= 2; ++i)
    for (int k = 0; k < params.num_pairs; ++k)
      for (int l = 0; l < params.num_relays; ++l) {
        double d = ch.layout.user_relay_distance(i, k, l);
        double amp = std::sqrt(geometry.pathloss(d));
        ch.gains(SystemParams::user_index(i, k), l) = amp * rng.cnormal();
      }
  return ch;
}

}  // namespace eef
