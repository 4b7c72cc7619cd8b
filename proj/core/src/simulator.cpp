// SPDX-License-Identifier: Apache-2.0
//
// fdjcas: full-duplex DMA joint communications and sensing simulator
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#include "fdjcas/simulator.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <thread>

namespace fdjcas {

ArrayLayout ScenarioConfig::layout(PanelSide side) const {
  const double lam = lambda();
  return {n_rf, n_e, d_e_wavelengths * lam, d_rf_wavelengths * lam, d_pl / 2.0, side};
}

void ScenarioConfig::validate() const {
  if (!(carrier_hz > 0.0) || !(bandwidth_hz > 0.0)) {
    throw ConfigError("scenario: carrier and bandwidth must be positive");
  }
  layout(PanelSide::kTx).validate();
  if (k_targets < 1) throw ConfigError("scenario: K must be >= 1");
  if (u_served < 1 || u_served > k_targets) throw ConfigError("scenario: need 1 <= U <= K");
  if (l_antennas < 1) throw ConfigError("scenario: L must be >= 1");
  if (u_served * l_antennas > n_rf) {
    throw ConfigError("scenario: U*L = " + std::to_string(u_served * l_antennas) +
                      " exceeds N_RF = " + std::to_string(n_rf));
  }
  if (k_targets >= n_rf) throw ConfigError("scenario: K must be below N_RF for MUSIC");
  if (!(p_max_w > 0.0) || !(gamma_w > 0.0)) throw ConfigError("scenario: powers must be positive");
  if (t_init < 1 || t_track < 1 || n_blocks < 0) throw ConfigError("scenario: bad TTI counts");
  if (!(forget > 0.0) || forget > 1.0) throw ConfigError("scenario: forget must be in (0, 1]");
  if (search.coarse_r < 2 || search.coarse_theta < 2 || search.refine < 2) {
    throw ConfigError("scenario: search grids need at least 2 points per axis");
  }
  if (!(search.r_min > 0.0) || !(search.r_max > search.r_min) ||
      !(search.theta_max > search.theta_min)) {
    throw ConfigError("scenario: search window is empty");
  }
  if (!(place_r_min > 0.0) || place_r_max < place_r_min || place_theta_max < place_theta_min) {
    throw ConfigError("scenario: placement window is empty");
  }
  if (mobility.d_r < 0.0 || mobility.d_theta < 0.0) {
    throw ConfigError("scenario: mobility deviations must be >= 0");
  }
  PropagationParams p = propagation();
  p.validate();
}

CVector gen_symbols(int u, int l, std::mt19937_64& rng) {
  return complex_noise(static_cast<Eigen::Index>(u) * l, 1.0, rng);
}

CVector complex_noise(Eigen::Index size, double var, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, std::sqrt(var / 2.0));
  CVector v(size);
  for (Eigen::Index k = 0; k < size; ++k) {
    const double re = g(rng);
    const double im = g(rng);
    v(k) = cd(re, im);
  }
  return v;
}

CVector ue_rx(const CMatrix& h_dl_u, const PropagationMatrix& p_tx, const AnalogBfMatrix& w_tx,
              const CMatrix& v, const CVector& s, double noise_var, std::mt19937_64& rng) {
  CVector y = h_dl_u * (p_tx * (w_tx.entries * (v * s)));
  if (noise_var > 0.0) y += complex_noise(y.size(), noise_var, rng);
  return y;
}

CVector fd_rx(const CMatrix& h_r, const CMatrix& h_si, const PropagationMatrix& p_tx,
              const PropagationMatrix& p_rx, const AnalogBfMatrix& w_tx,
              const AnalogBfMatrix& w_rx, const CMatrix& v, const CMatrix& d, const CVector& s,
              double noise_var, std::mt19937_64& rng) {
  const CMatrix combiner = rx_combiner(p_rx, w_rx);
  const CVector vs = v * s;
  const CVector x = p_tx * (w_tx.entries * vs);
  CVector y = combiner * (h_r * x);
  y += (analog_si_map(h_si, p_rx, w_rx, p_tx, w_tx) + d) * vs;
  if (noise_var > 0.0) y += combiner * complex_noise(h_r.rows(), noise_var, rng);
  return y;
}

double sum_rate(const std::vector<CMatrix>& h_dl_all, const PropagationMatrix& p_tx,
                const AnalogBfMatrix& w_tx, const CMatrix& v, int streams_per_ue,
                const std::vector<double>& noise_vars, bool with_interference) {
  const int users = static_cast<int>(h_dl_all.size());
  if (v.cols() != static_cast<Eigen::Index>(users) * streams_per_ue) {
    throw ConfigError("sum_rate: precoder columns do not match U*L");
  }
  if (static_cast<int>(noise_vars.size()) != users) {
    throw ConfigError("sum_rate: one noise variance per UE required");
  }
  const CMatrix t_all = p_tx * (w_tx.entries * v);
  double total = 0.0;
  for (int u = 0; u < users; ++u) {
    const CMatrix& h = h_dl_all[static_cast<std::size_t>(u)];
    const Eigen::Index l = h.rows();
    CMatrix q = noise_vars[static_cast<std::size_t>(u)] * CMatrix::Identity(l, l);
    CMatrix signal;
    for (int up = 0; up < users; ++up) {
      const CMatrix ht = h * t_all.middleCols(static_cast<Eigen::Index>(up) * streams_per_ue,
                                              streams_per_ue);
      if (up == u) {
        signal = ht * ht.adjoint();
      } else if (with_interference) {
        q += ht * ht.adjoint();
      }
    }
    const CMatrix total_cov = q + signal;
    Eigen::LLT<CMatrix> llt_q(0.5 * (q + q.adjoint()));
    Eigen::LLT<CMatrix> llt_t(0.5 * (total_cov + total_cov.adjoint()));
    if (llt_q.info() != Eigen::Success || llt_t.info() != Eigen::Success) {
      throw NumericalError("sum_rate: interference-plus-noise covariance is not positive definite");
    }
    // log det(I + Q^-1 S) = log det(Q + S) - log det(Q)
    const double logdet_t = 2.0 * llt_t.matrixL().toDenseMatrix().diagonal().real().array().log().sum();
    const double logdet_q = 2.0 * llt_q.matrixL().toDenseMatrix().diagonal().real().array().log().sum();
    total += std::max(0.0, logdet_t - logdet_q) / std::log(2.0);
  }
  return total;
}

SphericalState mobility_step(const SphericalState& state, const MobilityParams& params,
                             std::mt19937_64& rng) {
  const auto draw = [&](double mu, double d) {
    if (d == 0.0) return mu;
    std::uniform_real_distribution<double> u(mu - d, mu + d);
    return u(rng);
  };
  SphericalState next = state;
  next.r = std::clamp(state.r + draw(params.mu_r, params.d_r), params.r_lo, params.r_hi);
  next.theta = std::clamp(state.theta + draw(params.mu_theta, params.d_theta), params.theta_lo,
                          params.theta_hi);
  return next;
}

MobilityParams recenter_drift(const MobilityParams& params, const SphericalState& state) {
  MobilityParams out = params;
  const double r_mid = 0.5 * (params.r_lo + params.r_hi);
  const double t_mid = 0.5 * (params.theta_lo + params.theta_hi);
  out.mu_r = std::copysign(std::abs(params.mu_r), r_mid - state.r);
  out.mu_theta = std::copysign(std::abs(params.mu_theta), t_mid - state.theta);
  return out;
}

namespace {

template <typename F>
double mean_of(const std::vector<BlockMetrics>& blocks, F f) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& b : blocks) {
    if (b.design_failed) continue;
    sum += f(b);
    ++n;
  }
  return n == 0 ? 0.0 : sum / static_cast<double>(n);
}

}  // namespace

double RunMetrics::mean_rmse_m() const {
  double sum = initial_rmse_m;
  for (const auto& b : blocks) sum += b.rmse_m;
  return sum / static_cast<double>(blocks.size() + 1);
}

double RunMetrics::mean_rmse_served_m() const {
  double sum = initial_rmse_served_m;
  for (const auto& b : blocks) sum += b.rmse_served_m;
  return sum / static_cast<double>(blocks.size() + 1);
}

double RunMetrics::mean_sum_rate_bps_hz() const {
  return mean_of(blocks, [](const BlockMetrics& b) { return b.sum_rate_bps_hz; });
}

double RunMetrics::mean_sum_rate_no_interference_bps_hz() const {
  return mean_of(blocks, [](const BlockMetrics& b) { return b.sum_rate_no_interference_bps_hz; });
}

double RunMetrics::mean_residual_si_w() const {
  return mean_of(blocks, [](const BlockMetrics& b) {
    return b.residual_si_per_strip_w.empty()
               ? 0.0
               : *std::max_element(b.residual_si_per_strip_w.begin(),
                                   b.residual_si_per_strip_w.end());
  });
}

double RunMetrics::si_violation_fraction() const {
  if (blocks.empty()) return 0.0;
  const auto bad = std::count_if(blocks.begin(), blocks.end(),
                                 [](const BlockMetrics& b) { return !b.si_satisfied; });
  return static_cast<double>(bad) / static_cast<double>(blocks.size());
}

namespace {

constexpr std::int64_t kMaxCachedEntries = std::int64_t{1} << 22;

CMatrix coarse_responses(const ScenarioConfig& cfg, const ArrayLayout& rx,
                         const PropagationParams& params) {
  const SteeringFn raw = [&](double r, double theta, double phi) -> CVector {
    return array_response({r, theta, phi}, rx, params, cfg.estimate_model());
  };
  // The raw table's normalization is irrelevant: columns are renormalized
  // after the combiner is applied.
  return make_steering_table(cfg.search, raw).vectors;
}

}  // namespace

Simulator::Simulator(ScenarioConfig config) : config_(std::move(config)) {
  config_.validate();
  tx_ = config_.layout(PanelSide::kTx);
  rx_ = config_.layout(PanelSide::kRx);
  params_ = config_.propagation();
  strips_tx_ = uniform_microstrips(tx_, params_.lambda, config_.strip_alpha, config_.guided_ratio);
  strips_rx_ = uniform_microstrips(rx_, params_.lambda, config_.strip_alpha, config_.guided_ratio);
  p_tx_ = propagation_matrix(strips_tx_, tx_);
  p_rx_ = propagation_matrix(strips_rx_, rx_);
  h_si_ = si_channel(tx_, rx_, params_).entries;
  h_si_est_ = config_.si_estimate_error == 0.0 ? h_si_ : (1.0 + config_.si_estimate_error) * h_si_;
  const SearchGrid& g = config_.search;
  codebook_ = build_codebook(tx_, params_, config_.codebook_bits, g.r_min, g.r_max, g.theta_min,
                             g.theta_max, g.phi);
  if (static_cast<std::int64_t>(rx_.total()) * g.coarse_r * g.coarse_theta <= kMaxCachedEntries) {
    coarse_responses_ = coarse_responses(config_, rx_, params_);
  }
}

namespace {

// Effective N_RF x N_RF maps of one transmit configuration, so each TTI costs
// only the noise draw and a few small products.
struct LinkMaps {
  CMatrix reflection;  // W_RX^H P_RX^H H_R P_TX W_TX
  CMatrix si;          // W_RX^H P_RX^H H_SI P_TX W_TX
  CMatrix d;
  CMatrix v;
  CMatrix radiated;    // P_TX W_TX V
};

LinkMaps make_maps(const CMatrix& combiner, const CMatrix& h_r, const CMatrix& si_front,
                   const PropagationMatrix& p_tx, const AnalogBfMatrix& w_tx, const CMatrix& v,
                   const CMatrix& d) {
  LinkMaps m;
  const CMatrix ptw = p_tx * w_tx.entries;
  m.reflection = combiner * (h_r * ptw);
  m.si = si_front * w_tx.entries;
  m.d = d;
  m.v = v;
  m.radiated = ptw * v;
  return m;
}

struct TtiOutput {
  CVector y;
  double tx_power;
  double si_pre;
  double si_post;
};

TtiOutput run_tti(const LinkMaps& m, const CMatrix& combiner, Eigen::Index n_elements,
                  double noise_w, std::mt19937_64& rng) {
  const CVector s = complex_noise(m.v.cols(), 1.0, rng);
  const CVector vs = m.v * s;
  const CVector si_pre = m.si * vs;
  const CVector si_post = (m.si + m.d) * vs;
  TtiOutput out;
  out.y = m.reflection * vs + si_post + combiner * complex_noise(n_elements, noise_w, rng);
  out.tx_power = (m.radiated * s).squaredNorm();
  out.si_pre = si_pre.squaredNorm();
  out.si_post = si_post.squaredNorm();
  return out;
}

}  // namespace

RunMetrics Simulator::run(std::uint64_t seed) const {
  const ScenarioConfig& cfg = config_;
  std::mt19937_64 rng(seed);
  RunMetrics metrics;
  metrics.seed = seed;
  Diagnostics& diag = metrics.diagnostics;

  const int k = cfg.k_targets;
  const int u_count = cfg.u_served;
  const int l = cfg.l_antennas;
  const double noise = cfg.noise_w();
  const double d_ue = cfg.d_ue_wavelengths * params_.lambda;
  const GeometryModel est_model = cfg.estimate_model();

  // Scene.
  TargetSet truth;
  {
    std::uniform_real_distribution<double> ur(cfg.place_r_min, cfg.place_r_max);
    std::uniform_real_distribution<double> ut(cfg.place_theta_min, cfg.place_theta_max);
    std::uniform_real_distribution<double> uphase(0.0, 2.0 * kPi);
    for (int t = 0; t < k; ++t) {
      const double r = ur(rng);
      const double th = ut(rng);
      truth.states.push_back({r, th, cfg.search.phi});
      truth.reflectivity.push_back(std::polar(cfg.reflectivity_magnitude, uphase(rng)));
      truth.served_mask.push_back(t < u_count);
    }
  }
  const AnalogBfMatrix w_rx = wide_rx_combiner(rx_, rng);
  const CMatrix combiner = rx_combiner(p_rx_, w_rx);
  const CMatrix si_front = combiner * h_si_ * p_tx_;
  const CMatrix si_front_est = config_.si_estimate_error == 0.0 ? si_front
                                                                : combiner * h_si_est_ * p_tx_;
  // Sensing runs on whitened RF-chain outputs.
  const CMatrix whitener = whitening_matrix(combiner * combiner.adjoint());
  const CMatrix sensing_front = whitener * combiner;
  const SteeringFn steering = [&](double r, double theta, double phi) -> CVector {
    return sensing_front * array_response({r, theta, phi}, rx_, params_, est_model);
  };
  SteeringTable table;
  if (coarse_responses_.size() != 0) {
    table = {coarse_r_axis(cfg.search), coarse_theta_axis(cfg.search), cfg.search.phi,
             sensing_front * coarse_responses_};
    for (Eigen::Index c = 0; c < table.vectors.cols(); ++c) {
      const double nrm = table.vectors.col(c).norm();
      if (nrm > 0.0) {
        table.vectors.col(c) /= nrm;
      } else {
        ++diag.zero_steering;
      }
    }
  } else {
    table = make_steering_table(cfg.search, steering, &diag);
  }
  const Eigen::Index n_elements = tx_.total();

  // Phase A: wide transmit illumination, batch MUSIC.
  const AnalogBfMatrix w_broad = cfg.initial_beam == ScenarioConfig::InitialBeam::kWideRandom
                                     ? wide_tx_beam(tx_, rng)
                                     : broad_tx_beam(tx_);
  // No UE is served yet, so every RF chain carries an independent probe
  // stream; U * L streams would leave the source covariance rank-deficient.
  CMatrix v_broad = CMatrix::Identity(cfg.n_rf, cfg.n_rf);
  v_broad *= std::sqrt(cfg.p_max_w / (p_tx_ * (w_broad.entries * v_broad)).squaredNorm());
  CMatrix h_r = reflection_channel(truth, tx_, rx_, params_, GeometryModel::exact(), &diag).entries;
  LinkMaps maps = make_maps(combiner, h_r, si_front, p_tx_, w_broad, v_broad,
                            -(si_front_est * w_broad.entries));

  CMatrix snapshots(cfg.n_rf, cfg.t_init);
  for (int t = 0; t < cfg.t_init; ++t) {
    TtiOutput o = run_tti(maps, combiner, n_elements, noise, rng);
    snapshots.col(t) = whitener * o.y;
    metrics.tti_tx_power_w.push_back(o.tx_power);
    metrics.tti_si_pre_d_w.push_back(o.si_pre);
    metrics.tti_si_post_d_w.push_back(o.si_post);
  }
  SubspaceState subspace = music_init(sample_covariance(snapshots), k, cfg.forget, cfg.reorth_period);

  std::vector<SphericalState> estimates(static_cast<std::size_t>(k));
  const auto refresh_estimates = [&]() {
    const auto found = locate_targets(subspace, cfg.search, k, steering, &diag, &table);
    const AssociationResult assoc = associate_and_rmse(found, truth.states);
    for (int t = 0; t < k; ++t) {
      const auto& track = assoc.tracks[static_cast<std::size_t>(t)];
      if (track.truth_index >= 0) estimates[static_cast<std::size_t>(t)] = track.estimate;
    }
    return std::pair{assoc.rmse, rmse_over(assoc, truth.served_mask)};
  };
  std::tie(metrics.initial_rmse_m, metrics.initial_rmse_served_m) = refresh_estimates();

  // Phase B: per-block design and PASTd tracking.
  std::vector<MobilityParams> mobility(static_cast<std::size_t>(u_count), cfg.mobility);
  for (auto& m : mobility) {
    m.r_lo = cfg.search.r_min;
    m.r_hi = cfg.search.r_max;
    m.theta_lo = cfg.search.theta_min;
    m.theta_hi = cfg.search.theta_max;
  }
  TxDesignProblem problem{tx_, rx_, params_, strips_tx_, strips_rx_, est_model, {}, {},
                          h_si_est_, {}, w_rx};
  problem.budget.p_max = cfg.p_max_w;
  problem.budget.gamma = cfg.gamma_w;
  problem.budget.sigma_sq_ue.assign(static_cast<std::size_t>(u_count), noise);
  problem.budget.sigma_sq_rx = noise;

  TxDesign design;
  bool have_design = false;
  for (int b = 0; b < cfg.n_blocks; ++b) {
    BlockMetrics bm;
    bm.block = b;
    for (int u = 0; u < u_count; ++u) {
      auto& m = mobility[static_cast<std::size_t>(u)];
      auto& st = truth.states[static_cast<std::size_t>(u)];
      if (m.reset_period_blocks > 0 && b % m.reset_period_blocks == 0) m = recenter_drift(m, st);
      st = mobility_step(st, m, rng);
    }
    h_r = reflection_channel(truth, tx_, rx_, params_, GeometryModel::exact(), &diag).entries;
    std::vector<CMatrix> h_dl_true;
    for (int u = 0; u < u_count; ++u) {
      h_dl_true.push_back(
          dl_channel({truth.states[static_cast<std::size_t>(u)], l, d_ue}, tx_, params_).entries);
    }

    problem.ue_estimates.clear();
    for (int u = 0; u < u_count; ++u) {
      problem.ue_estimates.push_back({estimates[static_cast<std::size_t>(u)], l, d_ue});
    }
    problem.target_estimates.states = estimates;
    problem.target_estimates.reflectivity.assign(static_cast<std::size_t>(k), cd(1.0, 0.0));
    problem.target_estimates.served_mask = truth.served_mask;
    try {
      design = design_tx(problem, codebook_);
      have_design = true;
    } catch (const SingularChannelError&) {
      bm.design_failed = true;
    }

    if (have_design) {
      maps = make_maps(combiner, h_r, si_front, p_tx_, design.w_tx, design.v, design.d);
      bm.chosen_codeword = design.chosen_codeword;
      bm.candidates_evaluated = design.candidates_evaluated;
      bm.residual_si_per_strip_w = design.residual_si_per_strip;
      bm.si_satisfied = design.si_satisfied;
      bm.tx_power_w = design.tx_power;
    } else {
      maps = make_maps(combiner, h_r, si_front, p_tx_, w_broad, v_broad,
                       -(si_front_est * w_broad.entries));
    }

    for (int t = 0; t < cfg.t_track; ++t) {
      TtiOutput o = run_tti(maps, combiner, n_elements, noise, rng);
      subspace = pastd_update(subspace, whitener * o.y, &diag);
      metrics.tti_tx_power_w.push_back(o.tx_power);
      metrics.tti_si_pre_d_w.push_back(o.si_pre);
      metrics.tti_si_post_d_w.push_back(o.si_post);
      bm.residual_si_post_d_w = std::max(bm.residual_si_post_d_w, o.si_post);
    }
    std::tie(bm.rmse_m, bm.rmse_served_m) = refresh_estimates();

    if (have_design && !bm.design_failed) {
      const std::vector<double> noise_vars(static_cast<std::size_t>(u_count), noise);
      bm.sum_rate_bps_hz = sum_rate(h_dl_true, p_tx_, design.w_tx, design.v, l, noise_vars, true);
      bm.sum_rate_no_interference_bps_hz =
          sum_rate(h_dl_true, p_tx_, design.w_tx, design.v, l, noise_vars, false);
    }
    metrics.blocks.push_back(std::move(bm));
  }
  return metrics;
}

RunMetrics run_experiment(const ScenarioConfig& config, std::uint64_t seed) {
  return Simulator(config).run(seed);
}

std::vector<RunOutcome> run_monte_carlo_outcomes(const Simulator& sim,
                                                 const std::vector<std::uint64_t>& seeds,
                                                 int workers) {
  std::vector<RunOutcome> out(seeds.size());
  const auto one = [&](std::size_t i) {
    out[i].seed = seeds[i];
    try {
      out[i].metrics = sim.run(seeds[i]);
    } catch (const std::exception& e) {
      out[i].error = e.what();
    } catch (...) {
      out[i].error = "unknown error";
    }
  };
  const int n_threads = std::max(1, std::min<int>(workers, static_cast<int>(seeds.size())));
  if (n_threads == 1) {
    for (std::size_t i = 0; i < seeds.size(); ++i) one(i);
    return out;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (int w = 0; w < n_threads; ++w) {
    pool.emplace_back([&]() {
      for (std::size_t i = next++; i < seeds.size(); i = next++) one(i);
    });
  }
  for (auto& t : pool) t.join();
  return out;
}

std::vector<RunMetrics> run_monte_carlo(const Simulator& sim,
                                        const std::vector<std::uint64_t>& seeds, int workers) {
  std::vector<RunMetrics> out(seeds.size());
  const int n_threads = std::max(1, std::min<int>(workers, static_cast<int>(seeds.size())));
  if (n_threads == 1) {
    for (std::size_t i = 0; i < seeds.size(); ++i) out[i] = sim.run(seeds[i]);
    return out;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(seeds.size());
  std::vector<std::thread> pool;
  for (int w = 0; w < n_threads; ++w) {
    pool.emplace_back([&]() {
      for (std::size_t i = next++; i < seeds.size(); i = next++) {
        try {
          out[i] = sim.run(seeds[i]);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

std::vector<std::uint64_t> derive_seeds(std::uint64_t base, std::size_t n) {
  std::vector<std::uint64_t> out(n);
  std::uint64_t x = base;
  for (auto& s : out) {
    x += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = x;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    s = z ^ (z >> 31);
  }
  return out;
}

}  // namespace fdjcas
