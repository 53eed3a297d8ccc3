#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <atomic>
#include <chrono>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>
#include <json.hpp>

#include "eef/channel.hpp"
#include "eef/common.hpp"
#include "eef/ia.hpp"
#include "eef/model.hpp"
#include "eef/params.hpp"
#include "eef/zf.hpp"

// Monte Carlo experiment driver: sweeps a system parameter over seeded
// channel realizations, runs the selected design scheme on each, and reports
// per-run records plus aggregates. Infeasible channels count as zero
// efficiency and are never dropped.
namespace eef {

// Fairness index in [0,1]; 1 iff all entries are equal.
inline double jain_index(const Eigen::VectorXd& ee) {
  if (ee.size() == 0 || (ee.array() < 0.0).any())
    throw ArgumentError("jain_index: needs a nonnegative vector");
  double sum = ee.sum();
  double sq_sum = ee.squaredNorm();
  if (sq_sum == 0.0) throw UndefinedValueError("jain_index: undefined for the zero vector");
  return sum * sum / (ee.size() * sq_sum);
}

enum class DesignScheme { Alg, Zf, B1, B2, B3, B4, B5, B6 };

inline const char* to_string(DesignScheme s) {
  switch (s) {
    case DesignScheme::Alg: return "alg";
    case DesignScheme::Zf: return "zf";
    case DesignScheme::B1: return "b1";
    case DesignScheme::B2: return "b2";
    case DesignScheme::B3: return "b3";
    case DesignScheme::B4: return "b4";
    case DesignScheme::B5: return "b5";
    case DesignScheme::B6: return "b6";
  }
  return "unknown";
}

inline DesignScheme scheme_from_string(const std::string& s) {
  for (DesignScheme d : {DesignScheme::Alg, DesignScheme::Zf, DesignScheme::B1, DesignScheme::B2,
                         DesignScheme::B3, DesignScheme::B4, DesignScheme::B5, DesignScheme::B6})
    if (s == to_string(d)) return d;
  throw ArgumentError("unknown scheme: " + s);
}

struct RunRecord {
  int channel_index = 0;
  std::uint64_t seed = 0;
  std::string scheme;
  std::string mode;
  std::string sweep_name;
  double sweep_value = 0.0;
  std::string status;           // converged | max_iterations | infeasible | solver_failure
  double min_ee = 0.0;          // nats per joule; 0 when infeasible/failed
  Eigen::VectorXd per_pair_ee;  // zeros when infeasible/failed
  double jain = 0.0;            // 0 when undefined
  int phase1_iters = 0;
  int phase2_iters = 0;
  double wall_time_s = 0.0;     // reported in the summary only
};

// IaConfig with the scheme's restrictions applied.
inline IaConfig scheme_config(DesignScheme scheme, const IaConfig& base) {
  IaConfig cfg = base;
  switch (scheme) {
    case DesignScheme::B1: cfg.fix_user_power = true; break;
    case DesignScheme::B2: cfg.fixed_tau = 1.0 / 3.0; break;
    case DesignScheme::B3:
      cfg.fix_user_power = true;
      cfg.fixed_tau = 1.0 / 3.0;
      break;
    case DesignScheme::B4: cfg.variant.pa = ModelVariant::PaModel::FixedEfficiency; break;
    case DesignScheme::B5: cfg.variant.eh = ModelVariant::EhModel::LinearFixed; break;
    case DesignScheme::B6: cfg.variant.zero_sp_power = true; break;
    default: break;
  }
  return cfg;
}

struct RunOutcome {
  IaResult ia;
  RunRecord record;
};

// Evaluate a finished run under the realistic models; any design that fails
// the realistic feasibility recheck is recorded as infeasible with zero
// efficiency.
inline void evaluate_record(const SystemParams& params, const ChannelRealization& ch,
                            const IaResult& ia, RunRecord& rec) {
  int K = params.num_pairs;
  rec.per_pair_ee = Eigen::VectorXd::Zero(K);
  rec.phase1_iters = ia.phase1_iters;
  rec.phase2_iters = ia.phase2_iters;
  rec.status = to_string(ia.status);
  rec.min_ee = 0.0;
  rec.jain = 0.0;
  if (ia.status != IaStatus::Converged && ia.status != IaStatus::MaxIterations) return;
  FeasibilityReport rep = check_feasibility(params, ch, ia.design);
  if (!rep.feasible) {
    rec.status = "infeasible";
    return;
  }
  for (int k = 0; k < K; ++k)
    rec.per_pair_ee[k] = pair_ee(params, ia.design.tau, ia.design.p, ia.design.r, k, ia.design.mode);
  rec.min_ee = rec.per_pair_ee.minCoeff();
  rec.jain = jain_index(rec.per_pair_ee);
}

// Baselines 1-3 rerun the joint design with the stated variables frozen;
// baselines 4-6 optimize under a simplified model and are then re-scored
// under the realistic one.
inline RunOutcome run_baseline(const SystemParams& params, const ChannelRealization& ch, int which,
                               Mode mode, const IaConfig& base = {}) {
  if (which < 1 || which > 6) throw ArgumentError("run_baseline: index must lie in 1..6");
  DesignScheme scheme = static_cast<DesignScheme>(static_cast<int>(DesignScheme::B1) + which - 1);
  RunOutcome out;
  out.ia = run_ia(params, ch, mode, scheme_config(scheme, base));
  out.record.scheme = to_string(scheme);
  out.record.mode = to_string(mode);
  evaluate_record(params, ch, out.ia, out.record);
  return out;
}

inline RunOutcome run_scheme(const SystemParams& params, const ChannelRealization& ch,
                             DesignScheme scheme, Mode mode, const IaConfig& base = {}) {
  if (scheme >= DesignScheme::B1)
    return run_baseline(params, ch, static_cast<int>(scheme) - static_cast<int>(DesignScheme::B1) + 1,
                        mode, base);
  RunOutcome out;
  auto t0 = std::chrono::steady_clock::now();
  out.ia = scheme == DesignScheme::Zf ? solve_zf(params, ch, mode, base)
                                      : run_ia(params, ch, mode, base);
  out.record.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  out.record.scheme = to_string(scheme);
  out.record.mode = to_string(mode);
  evaluate_record(params, ch, out.ia, out.record);
  return out;
}

enum class SweepVariable { PmaxDbm, RhoBar, Relays };

inline const char* to_string(SweepVariable v) {
  switch (v) {
    case SweepVariable::PmaxDbm: return "pmax_dbm";
    case SweepVariable::RhoBar: return "rho_w_per_gnats";
    case SweepVariable::Relays: return "relays";
  }
  return "unknown";
}

struct ExperimentConfig {
  Mode mode = Mode::OneWay;
  DesignScheme scheme = DesignScheme::Alg;
  SystemParams base_params;  // pairs/relays and constants before the sweep
  GeometryConfig geometry;
  SweepVariable sweep = SweepVariable::PmaxDbm;
  std::vector<double> sweep_values = {33.0};
  int channels = 50;
  std::uint64_t master_seed = 1;
  IaConfig ia;
  int threads = 0;  // 0: hardware concurrency
  std::string out_csv = "results.csv";
  std::string summary_json = "summary.json";
  std::string trace_dir;  // empty: no per-run traces

  SystemParams params_at(double value) const {
    SystemParams p = base_params;
    switch (sweep) {
      case SweepVariable::PmaxDbm:
        p.pmax_user_w.setConstant(dbm_to_watt(value));
        break;
      case SweepVariable::RhoBar:
        // processing coefficients grow with the pair index
        for (int k = 0; k < p.num_pairs; ++k)
          for (int i = 1; i <= 2; ++i) {
            int u = SystemParams::user_index(i, k);
            p.sp_encode_w_per_gnats[u] = (k + 1) * value;
            p.sp_decode_w_per_gnats[u] = (k + 1) * value;
          }
        break;
      case SweepVariable::Relays: {
        int L = static_cast<int>(value);
        SystemParams q = SystemParams::defaults(p.num_pairs, L);
        // keep the per-user table, resize the relay side
        q.bandwidth_hz = p.bandwidth_hz;
        q.noise_user_w = p.noise_user_w;
        q.noise_relay_w = p.noise_relay_w;
        q.qos_nats = p.qos_nats;
        q.pmax_user_w = p.pmax_user_w;
        q.pa_eff_user = p.pa_eff_user;
        q.idle_w = p.idle_w;
        q.active_circuit_w = p.active_circuit_w;
        q.sp_encode_w_per_gnats = p.sp_encode_w_per_gnats;
        q.sp_decode_w_per_gnats = p.sp_decode_w_per_gnats;
        p = q;
        break;
      }
    }
    p.validate();
    return p;
  }
};

struct ExperimentResult {
  std::vector<RunRecord> records;  // ordered by (sweep index, channel index)
  nlohmann::json summary;
  int failed_runs = 0;
};

namespace harness_detail {

inline std::string csv_escape(const std::string& s) {
  bool quote = s.find_first_of(",\"\n") != std::string::npos;
  if (!quote) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

inline std::string fmt_double(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

}  // namespace harness_detail

inline void write_records_csv(const std::string& path, const std::vector<RunRecord>& records) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ArgumentError("cannot open output file: " + path);
  os << "channel,seed,scheme,mode,sweep_name,sweep_value,status,min_ee_nats_per_joule,"
        "per_pair_ee,jain,phase1_iters,phase2_iters\n";
  for (const auto& r : records) {
    std::string pp;
    for (int k = 0; k < r.per_pair_ee.size(); ++k) {
      if (k) pp += ';';
      pp += harness_detail::fmt_double(r.per_pair_ee[k]);
    }
    os << r.channel_index << ',' << r.seed << ',' << harness_detail::csv_escape(r.scheme) << ','
       << r.mode << ',' << r.sweep_name << ',' << harness_detail::fmt_double(r.sweep_value) << ','
       << r.status << ',' << harness_detail::fmt_double(r.min_ee) << ','
       << harness_detail::csv_escape(pp) << ',' << harness_detail::fmt_double(r.jain) << ','
       << r.phase1_iters << ',' << r.phase2_iters << '\n';
  }
}

inline ExperimentResult run_montecarlo(const ExperimentConfig& exp) {
  if (exp.channels < 1) throw ArgumentError("run_montecarlo: need at least one channel");
  for (double v : exp.sweep_values)
    if (!std::isfinite(v)) throw ArgumentError("run_montecarlo: sweep values must be finite");

  struct Task {
    int sweep_idx;
    int channel;
  };
  std::vector<Task> tasks;
  for (int sidx = 0; sidx < static_cast<int>(exp.sweep_values.size()); ++sidx)
    for (int c = 0; c < exp.channels; ++c) tasks.push_back({sidx, c});

  ExperimentResult result;
  result.records.resize(tasks.size());
  std::atomic<size_t> next{0};
  std::mutex io_mutex;

  auto worker = [&]() {
    while (true) {
      size_t idx = next.fetch_add(1);
      if (idx >= tasks.size()) break;
      const Task& task = tasks[idx];
      double value = exp.sweep_values[task.sweep_idx];
      RunRecord rec;
      rec.channel_index = task.channel;
      rec.sweep_name = to_string(exp.sweep);
      rec.sweep_value = value;
      rec.scheme = to_string(exp.scheme);
      rec.mode = to_string(exp.mode);
      try {
        SystemParams params = exp.params_at(value);
        std::uint64_t ch_seed = derive_seed(exp.master_seed, task.channel);
        rec.seed = ch_seed;
        ChannelRealization ch = sample_channels(exp.geometry, params, ch_seed);
        IaConfig cfg = exp.ia;
        cfg.seed = derive_seed(derive_seed(exp.master_seed, 0xA11C0DE),
                               static_cast<std::uint64_t>(task.sweep_idx) * 1000003ULL +
                                   static_cast<std::uint64_t>(task.channel));
        RunOutcome out = run_scheme(params, ch, exp.scheme, exp.mode, cfg);
        out.record.channel_index = task.channel;
        out.record.seed = ch_seed;
        out.record.sweep_name = rec.sweep_name;
        out.record.sweep_value = value;
        rec = out.record;
        if (!exp.trace_dir.empty()) {
          std::ostringstream name;
          name << exp.trace_dir << "/trace_" << rec.scheme << "_" << to_string(exp.mode) << "_s"
               << task.sweep_idx << "_c" << task.channel << ".csv";
          std::lock_guard<std::mutex> lock(io_mutex);
          out.ia.trace.write_csv(name.str());
        }
      } catch (const std::exception& e) {
        rec.status = std::string("solver_failure");
        rec.per_pair_ee = Eigen::VectorXd::Zero(exp.base_params.num_pairs);
        std::lock_guard<std::mutex> lock(io_mutex);
        // keep going; the record carries the failure
      }
      result.records[idx] = std::move(rec);
    }
  };

  int nthreads = exp.threads > 0 ? exp.threads
                                 : std::max(1u, std::thread::hardware_concurrency());
  nthreads = std::min<int>(nthreads, static_cast<int>(tasks.size()));
  if (nthreads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(nthreads);
    for (int i = 0; i < nthreads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  // Aggregates per sweep value.
  nlohmann::json sweeps = nlohmann::json::array();
  for (int sidx = 0; sidx < static_cast<int>(exp.sweep_values.size()); ++sidx) {
    std::vector<const RunRecord*> recs;
    for (size_t i = 0; i < tasks.size(); ++i)
      if (tasks[i].sweep_idx == sidx) recs.push_back(&result.records[i]);
    double mean_min = 0.0, wall = 0.0;
    std::map<std::string, int> statuses;
    std::vector<double> jains, iters;
    Eigen::VectorXd pair_mean = Eigen::VectorXd::Zero(exp.base_params.num_pairs);
    for (const auto* r : recs) {
      mean_min += r->min_ee;
      wall += r->wall_time_s;
      statuses[r->status]++;
      if (r->status == "converged") {
        jains.push_back(r->jain);
        iters.push_back(r->phase2_iters);
      }
      if (r->per_pair_ee.size() == pair_mean.size()) pair_mean += r->per_pair_ee;
    }
    mean_min /= recs.size();
    pair_mean /= recs.size();
    std::sort(jains.begin(), jains.end());
    std::sort(iters.begin(), iters.end());
    nlohmann::json j;
    j["sweep_value"] = exp.sweep_values[sidx];
    j["runs"] = recs.size();
    j["mean_min_ee_nats_per_joule"] = mean_min;
    j["statuses"] = statuses;
    j["jain_cdf_converged"] = jains;
    j["phase2_iterations_cdf_converged"] = iters;
    j["per_pair_mean_ee"] = std::vector<double>(pair_mean.data(), pair_mean.data() + pair_mean.size());
    j["total_wall_time_s"] = wall;
    sweeps.push_back(std::move(j));
  }
  result.summary["scheme"] = to_string(exp.scheme);
  result.summary["mode"] = to_string(exp.mode);
  result.summary["sweep_name"] = to_string(exp.sweep);
  result.summary["channels"] = exp.channels;
  result.summary["master_seed"] = exp.master_seed;
  result.summary["sweeps"] = std::move(sweeps);

  for (const auto& r : result.records)
    if (r.status == "infeasible" || r.status == "solver_failure") result.failed_runs++;
  return result;
}

}  // namespace eef
