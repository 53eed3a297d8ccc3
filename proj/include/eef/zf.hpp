#pragma once

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "eef/channel.hpp"
#include "eef/common.hpp"
#include "eef/ia.hpp"
#include "eef/model.hpp"

namespace eef {

// Orthonormal basis of the null space of the stacked cross-pair relay paths.
// Restricting the relay weights to this basis cancels all inter-pair
// interference by construction.
struct ZfBasis {
  Mode mode = Mode::OneWay;
  Eigen::MatrixXcd stacked;  // cross-pair path rows (one per nulled link)
  Eigen::MatrixXcd basis;    // L x reduced_dim, basis^H basis = I

  int reduced_dim() const { return static_cast<int>(basis.cols()); }
};

inline ZfBasis zf_basis(const ChannelRealization& ch, int pairs, int relays, Mode mode) {
  if (pairs < 1 || relays < 1) throw ArgumentError("zf_basis: need pairs, relays >= 1");
  int needed = mode == Mode::OneWay ? pairs * (pairs - 1) : 2 * pairs * (pairs - 1);
  if (relays <= needed)
    throw ZfUnavailableError("zf_basis: need more relays than nulled cross-pair links (" +
                             std::to_string(needed) + ")");
  ZfBasis out;
  out.mode = mode;
  if (pairs == 1) {
    out.stacked.resize(0, relays);
    out.basis = Eigen::MatrixXcd::Identity(relays, relays);
    return out;
  }
  std::vector<Eigen::RowVectorXcd> rows;
  if (mode == Mode::OneWay) {
    for (int k = 0; k < pairs; ++k)
      for (int j = 0; j < pairs; ++j) {
        if (j == k) continue;
        rows.push_back(relay_path_row(ch, 2, k, 1, j));
      }
  } else {
    // unordered cross-pair links (the path rows are symmetric in their ends)
    for (int k = 0; k < pairs; ++k)
      for (int j = k + 1; j < pairs; ++j)
        for (int i = 1; i <= 2; ++i)
          for (int ih = 1; ih <= 2; ++ih) rows.push_back(relay_path_row(ch, i, k, ih, j));
  }
  out.stacked.resize(static_cast<int>(rows.size()), relays);
  for (size_t r = 0; r < rows.size(); ++r) out.stacked.row(static_cast<int>(r)) = rows[r];

  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(out.stacked, Eigen::ComputeFullV);
  double smax = svd.singularValues().size() > 0 ? svd.singularValues()[0] : 0.0;
  int rank = 0;
  for (int i = 0; i < svd.singularValues().size(); ++i)
    if (svd.singularValues()[i] > 1e-10 * smax) ++rank;
  out.basis = svd.matrixV().rightCols(relays - rank);
  return out;
}

// Joint design restricted to interference-nulling relay weights; the returned
// design carries full-coordinate weights and satisfies the unrestricted
// constraints.
inline IaResult solve_zf(const SystemParams& params, const ChannelRealization& ch, Mode mode,
                         const IaConfig& config = {}) {
  ZfBasis zf = zf_basis(ch, params.num_pairs, params.num_relays, mode);
  engine_detail::WeightSpace space;
  space.basis = zf.basis;
  space.interference_free = true;
  return engine_detail::run(params, ch, mode, config, std::move(space));
}

}  // namespace eef
