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

#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "fdjcas/channel.hpp"
#include "fdjcas/dma.hpp"
#include "fdjcas/geometry.hpp"
#include "fdjcas/sensing.hpp"
#include "fdjcas/txdesign.hpp"
#include "fdjcas/types.hpp"

namespace fdjcas {

/// Per-block UE motion: r and theta each move by a uniform draw on
/// [mu - d, mu + d]. Angles in radians.
struct MobilityParams {
  double mu_r = 2.0;
  double mu_theta = deg2rad(2.0);
  double d_r = 2.0;
  double d_theta = deg2rad(5.0);
  int reset_period_blocks = 10;
  // Clamp window; the simulator sets it to the search grid.
  double r_lo = 0.5;
  double r_hi = 25.0;
  double theta_lo = 0.0;
  double theta_hi = kPi / 2.0;
};

/// One simulation scenario in internal units (meters, radians, watts).
struct ScenarioConfig {
  double carrier_hz = 120e9;
  double bandwidth_hz = 150e3;
  int n_rf = 4;
  int n_e = 512;
  double d_e_wavelengths = 0.2;
  double d_rf_wavelengths = 0.5;
  double d_pl = 0.04;  // TX/RX panel separation, 2 d_P

  int k_targets = 3;
  int u_served = 1;
  int l_antennas = 2;
  double d_ue_wavelengths = 0.5;

  double p_max_w = 1.0;
  double gamma_w = 1.0;

  int t_init = 200;
  int t_track = 100;
  int n_blocks = 100;

  double kappa_abs = 0.0033;
  double b_gain = 2.0;
  double strip_alpha = 0.6;
  double guided_ratio = 0.8;  // guided wavelength / free-space wavelength

  double forget = 0.98;
  int reorth_period = 50;
  int codebook_bits = 10;
  SearchGrid search;

  // Targets are dropped uniformly on [place_r_min, place_r_max] x
  // [place_theta_min, place_theta_max] at azimuth search.phi.
  double place_r_min = 1.0;
  double place_r_max = 20.0;
  double place_theta_min = 0.0;
  double place_theta_max = kPi / 2.0;
  double reflectivity_magnitude = 1.0;

  double si_estimate_error = 0.0;  // H_SI_est = (1 + eps) H_SI
  FresnelForm fresnel_form = FresnelForm::kTaylor;
  bool estimate_with_fresnel = true;

  MobilityParams mobility;

  // Phase A illumination. kAllZero is the phi = 0 profile everywhere, whose
  // radiation stays in the guided slow wave.
  enum class InitialBeam { kWideRandom, kAllZero };
  InitialBeam initial_beam = InitialBeam::kWideRandom;

  [[nodiscard]] double lambda() const { return kSpeedOfLight / carrier_hz; }
  [[nodiscard]] ArrayLayout layout(PanelSide side) const;
  [[nodiscard]] PropagationParams propagation() const {
    return {lambda(), kappa_abs, b_gain};
  }
  /// -174 dBm/Hz over the bandwidth, in watts (sigma^2 and sigma_u^2).
  [[nodiscard]] double noise_w() const { return dbm_to_watt(thermal_noise_dbm(bandwidth_hz)); }
  [[nodiscard]] GeometryModel estimate_model() const {
    return estimate_with_fresnel ? GeometryModel::fresnel(fresnel_form) : GeometryModel::exact();
  }
  void validate() const;
};

/// Zero-mean unit-variance circularly-symmetric Gaussian symbols.
CVector gen_symbols(int u, int l, std::mt19937_64& rng);

/// Circularly-symmetric Gaussian vector with per-entry variance `var`.
CVector complex_noise(Eigen::Index size, double var, std::mt19937_64& rng);

/// H_DL,u P_TX W_TX V s + n_u.
CVector ue_rx(const CMatrix& h_dl_u, const PropagationMatrix& p_tx, const AnalogBfMatrix& w_tx,
              const CMatrix& v, const CVector& s, double noise_var, std::mt19937_64& rng);

/// RF-chain outputs of the full-duplex receiver:
/// W_RX^H P_RX^H H_R P_TX W_TX V s + (W_RX^H P_RX^H H_SI P_TX W_TX + D) V s + W_RX^H P_RX^H n,
/// with n an N-element per-metamaterial noise vector of variance noise_var.
CVector fd_rx(const CMatrix& h_r, const CMatrix& h_si, const PropagationMatrix& p_tx,
              const PropagationMatrix& p_rx, const AnalogBfMatrix& w_tx,
              const AnalogBfMatrix& w_rx, const CMatrix& v, const CMatrix& d, const CVector& s,
              double noise_var, std::mt19937_64& rng);

/// Achievable DL sum rate in bits/s/Hz with inter-user interference.
/// V holds streams_per_ue columns per UE, in the order of h_dl_all.
double sum_rate(const std::vector<CMatrix>& h_dl_all, const PropagationMatrix& p_tx,
                const AnalogBfMatrix& w_tx, const CMatrix& v, int streams_per_ue,
                const std::vector<double>& noise_vars, bool with_interference = true);

/// One block of UE motion, clamped to the mobility window.
SphericalState mobility_step(const SphericalState& state, const MobilityParams& params,
                             std::mt19937_64& rng);

/// Points the drift means towards the centre of the clamp window from the
/// current position, keeping their magnitudes.
MobilityParams recenter_drift(const MobilityParams& params, const SphericalState& state);

struct BlockMetrics {
  int block = 0;
  double rmse_m = 0.0;         // all K targets
  double rmse_served_m = 0.0;  // served UEs only
  double sum_rate_bps_hz = 0.0;
  double sum_rate_no_interference_bps_hz = 0.0;
  std::vector<double> residual_si_per_strip_w;  // before D
  double residual_si_post_d_w = 0.0;            // largest per-TTI power after D
  int chosen_codeword = -1;
  int candidates_evaluated = 0;
  double tx_power_w = 0.0;
  bool si_satisfied = true;
  bool design_failed = false;
};

struct RunMetrics {
  std::uint64_t seed = 0;
  double initial_rmse_m = 0.0;
  double initial_rmse_served_m = 0.0;
  std::vector<BlockMetrics> blocks;
  // Per TTI, Phase A followed by every tracking block.
  std::vector<double> tti_tx_power_w;
  std::vector<double> tti_si_pre_d_w;
  std::vector<double> tti_si_post_d_w;
  Diagnostics diagnostics;

  /// Mean all-target RMSE over the initial estimate and every block.
  [[nodiscard]] double mean_rmse_m() const;
  [[nodiscard]] double mean_rmse_served_m() const;
  [[nodiscard]] double mean_sum_rate_bps_hz() const;
  [[nodiscard]] double mean_sum_rate_no_interference_bps_hz() const;
  [[nodiscard]] double mean_residual_si_w() const;
  [[nodiscard]] double si_violation_fraction() const;
};

/// Immutable per-scenario state shared by all Monte-Carlo runs (layouts,
/// codebook, SI channel). run() is const and safe to call concurrently.
class Simulator {
 public:
  explicit Simulator(ScenarioConfig config);

  [[nodiscard]] RunMetrics run(std::uint64_t seed) const;

  [[nodiscard]] const ScenarioConfig& config() const { return config_; }
  [[nodiscard]] const BeamCodebook& codebook() const { return codebook_; }
  [[nodiscard]] const CMatrix& si_channel_matrix() const { return h_si_; }

 private:
  ScenarioConfig config_;
  ArrayLayout tx_;
  ArrayLayout rx_;
  PropagationParams params_;
  std::vector<MicrostripParams> strips_tx_;
  std::vector<MicrostripParams> strips_rx_;
  PropagationMatrix p_tx_;
  PropagationMatrix p_rx_;
  CMatrix h_si_;
  CMatrix h_si_est_;
  BeamCodebook codebook_;
  // Coarse-grid RX array responses under the estimate model, N x (r * theta);
  // empty when too large to keep, in which case each run recomputes them.
  CMatrix coarse_responses_;
};

/// Convenience wrapper: Simulator(config).run(seed).
RunMetrics run_experiment(const ScenarioConfig& config, std::uint64_t seed);

/// Runs seeds[i] on up to `workers` threads; results are in seed order.
/// The first failing run's exception is rethrown after all runs finish.
std::vector<RunMetrics> run_monte_carlo(const Simulator& sim,
                                        const std::vector<std::uint64_t>& seeds, int workers);

struct RunOutcome {
  std::uint64_t seed = 0;
  std::optional<RunMetrics> metrics;  // empty when the run threw
  std::string error;
};

/// As run_monte_carlo, but failures are captured per run instead of thrown.
std::vector<RunOutcome> run_monte_carlo_outcomes(const Simulator& sim,
                                                 const std::vector<std::uint64_t>& seeds,
                                                 int workers);

/// n well-mixed run seeds derived from one base seed (splitmix64 stream).
std::vector<std::uint64_t> derive_seeds(std::uint64_t base, std::size_t n);

}  // namespace fdjcas
