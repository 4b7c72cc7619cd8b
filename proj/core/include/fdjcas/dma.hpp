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

#include <vector>

#include "fdjcas/geometry.hpp"
#include "fdjcas/types.hpp"

namespace fdjcas {

/// Waveguide constants of one microstrip.
struct MicrostripParams {
  double alpha = 0.6;          // attenuation, 1/m
  double beta = 0.0;           // guided wavenumber, rad/m
  std::vector<double> rho;     // element positions along the strip, m

  void validate() const;
};

/// Identical strips with rho_n = n * d_e and beta = 2 pi / (guided_ratio * lambda).
std::vector<MicrostripParams> uniform_microstrips(const ArrayLayout& layout, double lambda,
                                                  double alpha = 0.6,
                                                  double guided_ratio = 0.8);

/// Diagonal of the N x N intra-microstrip propagation matrix.
using PropagationMatrix = Eigen::DiagonalMatrix<cd, Eigen::Dynamic>;

PropagationMatrix propagation_matrix(const std::vector<MicrostripParams>& strips,
                                     const ArrayLayout& layout);

/// A weight on the Lorentzian circle 0.5 (j + e^{j phi}).
struct LorentzianWeight {
  cd value{0.0, 0.0};
  double phase_param = 0.0;
};

/// Lorentzian weight for `phi`; angles outside [-pi/2, pi/2] are reflected
/// back into the interval and counted in diag->phase_wraps.
LorentzianWeight lorentzian(double phi, Diagnostics* diag = nullptr);

/// Distance of `w` from the Lorentzian circle (|w - j/2| - 1/2).
inline double lorentzian_circle_error(cd w) { return std::abs(std::abs(w - 0.5 * kJ) - 0.5); }

enum class BeamRole { kTx, kRx };

/// Block-sparse N x N_RF analog beamformer: column i is nonzero only on the
/// rows of microstrip i.
struct AnalogBfMatrix {
  CMatrix entries;
  BeamRole role = BeamRole::kTx;
};

/// `weights` is n_rf x n_e; row i feeds microstrip i.
AnalogBfMatrix assemble_analog(const CMatrix& weights, BeamRole role);

/// Lorentzian weight realizing the unit-modulus `w_tilde` after compensating
/// the microstrip phase rho * beta: (j + w_tilde e^{j rho beta}) / 2.
/// phase_param is arg(w_tilde e^{j rho beta}) and may leave [-pi/2, pi/2].
LorentzianWeight map_unconstrained(cd w_tilde, double rho, double beta);

}  // namespace fdjcas
