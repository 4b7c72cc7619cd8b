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

#include "fdjcas/dma.hpp"

#include <cmath>
#include <string>

namespace fdjcas {

void MicrostripParams::validate() const {
  if (alpha < 0.0) throw ConfigError("MicrostripParams: alpha must be >= 0");
  if (!(beta > 0.0)) throw ConfigError("MicrostripParams: beta must be positive");
  for (std::size_t n = 0; n < rho.size(); ++n) {
    if (rho[n] < 0.0 || (n > 0 && !(rho[n] > rho[n - 1]))) {
      throw ConfigError("MicrostripParams: rho must be non-negative and increasing");
    }
  }
}

std::vector<MicrostripParams> uniform_microstrips(const ArrayLayout& layout, double lambda,
                                                  double alpha, double guided_ratio) {
  MicrostripParams strip;
  strip.alpha = alpha;
  strip.beta = 2.0 * kPi / (guided_ratio * lambda);
  strip.rho.resize(static_cast<std::size_t>(layout.n_e));
  for (int n = 0; n < layout.n_e; ++n) strip.rho[n] = static_cast<double>(n) * layout.d_e;
  return std::vector<MicrostripParams>(static_cast<std::size_t>(layout.n_rf), strip);
}

PropagationMatrix propagation_matrix(const std::vector<MicrostripParams>& strips,
                                     const ArrayLayout& layout) {
  if (static_cast<int>(strips.size()) != layout.n_rf) {
    throw ConfigError("propagation_matrix: expected " + std::to_string(layout.n_rf) +
                      " microstrips, got " + std::to_string(strips.size()));
  }
  PropagationMatrix p(layout.total());
  for (int i = 0; i < layout.n_rf; ++i) {
    const auto& s = strips[static_cast<std::size_t>(i)];
    if (static_cast<int>(s.rho.size()) != layout.n_e) {
      throw ConfigError("propagation_matrix: microstrip rho length mismatch");
    }
    for (int n = 0; n < layout.n_e; ++n) {
      p.diagonal()(layout.flat_index(i, n)) = std::exp(-s.rho[n] * cd(s.alpha, s.beta));
    }
  }
  return p;
}

LorentzianWeight lorentzian(double phi, Diagnostics* diag) {
  double p = phi;
  if (p < -kPi / 2.0 || p > kPi / 2.0) {
    p = std::remainder(p, 2.0 * kPi);  // (-pi, pi]
    if (p > kPi / 2.0) p = kPi - p;
    if (p < -kPi / 2.0) p = -kPi - p;
    if (diag != nullptr) ++diag->phase_wraps;
  }
  return {0.5 * (kJ + std::polar(1.0, p)), p};
}

AnalogBfMatrix assemble_analog(const CMatrix& weights, BeamRole role) {
  const Eigen::Index n_rf = weights.rows();
  const Eigen::Index n_e = weights.cols();
  AnalogBfMatrix w{CMatrix::Zero(n_rf * n_e, n_rf), role};
  for (Eigen::Index i = 0; i < n_rf; ++i) {
    w.entries.block(i * n_e, i, n_e, 1) = weights.row(i).transpose();
  }
  return w;
}

LorentzianWeight map_unconstrained(cd w_tilde, double rho, double beta) {
  if (std::abs(std::abs(w_tilde) - 1.0) > 1e-9) {
    throw ConfigError("map_unconstrained: w_tilde must have unit modulus");
  }
  const cd rotated = w_tilde * std::polar(1.0, rho * beta);
  return {(kJ + rotated) / 2.0, std::arg(rotated)};
}

}  // namespace fdjcas
