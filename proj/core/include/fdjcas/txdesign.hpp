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
#include <random>
#include <vector>

#include "fdjcas/channel.hpp"
#include "fdjcas/dma.hpp"
#include "fdjcas/geometry.hpp"
#include "fdjcas/types.hpp"

namespace fdjcas {

class SingularChannelError : public NumericalError {
 public:
  SingularChannelError(const std::string& what, std::vector<int> ues)
      : NumericalError(what), offending_ues(std::move(ues)) {}
  std::vector<int> offending_ues;
};

/// Near-field focusing codebook. Entry p has element phases
/// exp(-j 2 pi r_{p,i,n} / lambda) towards focus point p at azimuth `phi`.
struct BeamCodebook {
  CMatrix entries;  // N x 2^bits, unit-modulus columns
  std::vector<std::pair<double, double>> focus_points;  // (r, theta)
  int bits = 0;
  double phi = kPi / 2.0;

  [[nodiscard]] int size() const { return static_cast<int>(entries.cols()); }
};

std::vector<double> linspace(double first, double last, int count);

/// Focus points are the r-major product of r_grid x theta_grid.
BeamCodebook build_codebook(const ArrayLayout& layout_tx, const PropagationParams& params,
                            int bits, const std::vector<double>& r_grid,
                            const std::vector<double>& theta_grid, double phi = kPi / 2.0);

/// Splits `bits` between range and elevation (range gets the extra bit) over
/// uniform grids on [r_min, r_max] x [theta_min, theta_max].
BeamCodebook build_codebook(const ArrayLayout& layout_tx, const PropagationParams& params,
                            int bits, double r_min, double r_max, double theta_min,
                            double theta_max, double phi = kPi / 2.0);

/// Places an N-element codeword into the block pattern of an N x N_RF matrix.
CMatrix place_codeword(const CVector& codeword, const ArrayLayout& layout);

/// ||H W~(entry)||_F^2 for every codebook entry.
RVector op1_objectives(const CMatrix& h_r_est, const BeamCodebook& codebook,
                       const ArrayLayout& layout);

struct Op1Result {
  int index = 0;
  CMatrix w_tilde;
  double objective = 0.0;
};

/// Exhaustive codebook search maximizing ||H_R W~||_F^2; ties go to the
/// lowest index.
Op1Result op1_search(const ChannelMatrix& h_r_est, const BeamCodebook& codebook,
                     const ArrayLayout& layout);

/// Element-wise map_unconstrained over the nonzero block pattern of w_tilde.
AnalogBfMatrix finalize_tx_weights(const CMatrix& w_tilde,
                                   const std::vector<MicrostripParams>& strips,
                                   const ArrayLayout& layout);

struct PowerBudget {
  double p_max = 1.0;
  double gamma = 1.0;
  std::vector<double> sigma_sq_ue;
  double sigma_sq_rx = 1.0;

  void validate() const;
};

/// Zero-forcing precoder H^H (H H^H)^{-1}, scaled so ||P_TX W_TX V||_F^2 = p_max.
/// Throws SingularChannelError naming the UEs whose streams are dependent.
CMatrix zf_precoder(const CMatrix& h_eff, int streams_per_ue, const PropagationMatrix& p_tx,
                    const AnalogBfMatrix& w_tx, double p_max);

/// W_RX^H P_RX^H: maps N element signals to N_RF chain outputs.
CMatrix rx_combiner(const PropagationMatrix& p_rx, const AnalogBfMatrix& w_rx);

/// W_RX^H P_RX^H H_SI P_TX W_TX, the N_RF x N_RF analog SI map.
CMatrix analog_si_map(const CMatrix& h_si, const PropagationMatrix& p_rx,
                      const AnalogBfMatrix& w_rx, const PropagationMatrix& p_tx,
                      const AnalogBfMatrix& w_tx);

/// D = -W_RX^H P_RX^H H_SI_est P_TX W_TX.
CMatrix digital_canceller(const CMatrix& h_si_est, const PropagationMatrix& p_rx,
                          const AnalogBfMatrix& w_rx, const PropagationMatrix& p_tx,
                          const AnalogBfMatrix& w_tx);

struct SiCheck {
  std::vector<double> residual_per_strip;
  std::vector<bool> strip_pass;
  bool pass = true;
};

/// Row powers of the pre-cancellation SI term W_RX^H P_RX^H H_SI P_TX W_TX V.
SiCheck si_constraint_check(const CMatrix& h_si, const PropagationMatrix& p_rx,
                            const AnalogBfMatrix& w_rx, const PropagationMatrix& p_tx,
                            const AnalogBfMatrix& w_tx, const CMatrix& v, double gamma);

/// Same check on a precomputed analog SI map.
SiCheck si_constraint_check(const CMatrix& si_map, const CMatrix& v, double gamma);

/// All-phi=0 TX weights used before any target estimate exists.
AnalogBfMatrix broad_tx_beam(const ArrayLayout& layout);

/// Wide TX illumination: every weight's phi drawn uniformly on [-pi/2, pi/2].
/// Unlike the all-zero profile, this one couples out of the guided wave.
AnalogBfMatrix wide_tx_beam(const ArrayLayout& layout, std::mt19937_64& rng);

/// Fixed wide RX combiner: every weight's phi drawn uniformly on [-pi/2, pi/2].
AnalogBfMatrix wide_rx_combiner(const ArrayLayout& layout, std::mt19937_64& rng);

struct TxDesign {
  AnalogBfMatrix w_tx;
  AnalogBfMatrix w_rx;
  CMatrix v;  // N_RF x (U*L), blocks of L columns per UE
  CMatrix d;  // N_RF x N_RF
  int chosen_codeword = 0;
  std::vector<double> residual_si_per_strip;
  double tx_power = 0.0;
  bool si_satisfied = true;
  int candidates_evaluated = 0;
};

/// Everything the transmit-side design needs for one communication block.
struct TxDesignProblem {
  ArrayLayout layout_tx;
  ArrayLayout layout_rx;
  PropagationParams params;
  std::vector<MicrostripParams> strips_tx;
  std::vector<MicrostripParams> strips_rx;
  GeometryModel estimate_model = GeometryModel::fresnel();
  std::vector<UeGeometry> ue_estimates;  // served UEs, in UE order
  TargetSet target_estimates;            // all K targets, for H_R
  CMatrix h_si_est;
  PowerBudget budget;
  AnalogBfMatrix w_rx;
};

/// OP1 search with gamma filtering, then weight mapping, ZF precoding and SI
/// cancellation. Candidates are tried in decreasing OP1 objective; the first
/// one meeting the SI budget wins, else the best feasible one is kept with
/// si_satisfied = false.
TxDesign design_tx(const TxDesignProblem& problem, const BeamCodebook& codebook);

}  // namespace fdjcas
