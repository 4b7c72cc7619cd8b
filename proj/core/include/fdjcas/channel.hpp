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

struct PropagationParams {
  double lambda = kSpeedOfLight / 120e9;
  double kappa_abs = 0.0033;  // 1/m
  double b = 2.0;             // boresight gain exponent

  static PropagationParams at_carrier(double carrier_hz, double kappa_abs = 0.0033,
                                      double b = 2.0) {
    return {kSpeedOfLight / carrier_hz, kappa_abs, b};
  }
  void validate() const;
};

/// K point targets; the U served UEs are flagged in served_mask.
struct TargetSet {
  std::vector<SphericalState> states;
  std::vector<cd> reflectivity;
  std::vector<bool> served_mask;

  [[nodiscard]] int size() const { return static_cast<int>(states.size()); }
  [[nodiscard]] int served_count() const;
  void validate() const;
};

enum class ChannelKind { kDownlink, kReflection, kSelfInterference };

struct ChannelMatrix {
  CMatrix entries;
  ChannelKind kind = ChannelKind::kDownlink;

  [[nodiscard]] Eigen::Index rows() const { return entries.rows(); }
  [[nodiscard]] Eigen::Index cols() const { return entries.cols(); }
};

/// Exact spherical geometry for true channels; Fresnel geometry when composing
/// channel estimates from estimated coordinates.
struct GeometryModel {
  enum class Kind { kExact, kFresnel };
  Kind kind = Kind::kExact;
  FresnelForm form = FresnelForm::kTaylor;

  static GeometryModel exact() { return {}; }
  static GeometryModel fresnel(FresnelForm f = FresnelForm::kTaylor) {
    return {Kind::kFresnel, f};
  }
};

/// Element-level radiation gain 2(b+1)cos^b(theta) inside [-pi/2, pi/2], else 0.
double radiation_profile(double theta, double b);

/// Amplitude sqrt(F(theta)) * lambda/(4 pi r) * exp(-kappa_abs r / 2).
double attenuation(double r, double theta, const PropagationParams& params);

/// Distance and element-local elevation for the link between a point and element (i, n).
struct ElementLink {
  double distance = 0.0;
  double elevation = 0.0;
};
ElementLink element_link(const SphericalState& point, int i, int n, const ArrayLayout& layout,
                         const GeometryModel& model, Diagnostics* diag = nullptr);

/// L x N downlink channel of one UE. Row ell holds alpha * exp(j 2 pi r / lambda).
ChannelMatrix dl_channel(const UeGeometry& ue, const ArrayLayout& layout_tx,
                         const PropagationParams& params,
                         const GeometryModel& model = GeometryModel::exact(),
                         Diagnostics* diag = nullptr);

/// N-element response of `layout` to a point source at `target`.
CVector array_response(const SphericalState& target, const ArrayLayout& layout,
                       const PropagationParams& params,
                       const GeometryModel& model = GeometryModel::exact(),
                       Diagnostics* diag = nullptr);

/// Per-target TX/RX responses stacked as columns; H_R = A_rx diag(beta) A_tx^T.
struct ReflectionFactors {
  CMatrix a_rx;  // N x K
  CMatrix a_tx;  // N x K
  CVector beta;  // K

  [[nodiscard]] CMatrix assemble() const;
};

ReflectionFactors reflection_factors(const TargetSet& targets, const ArrayLayout& layout_tx,
                                     const ArrayLayout& layout_rx,
                                     const PropagationParams& params,
                                     const GeometryModel& model = GeometryModel::exact(),
                                     Diagnostics* diag = nullptr);

/// N x N single-bounce reflection channel sum_k beta_k a_rx(k) a_tx(k)^T.
/// An empty target set yields the zero matrix and bumps diag->empty_target_sets.
ChannelMatrix reflection_channel(const TargetSet& targets, const ArrayLayout& layout_tx,
                                 const ArrayLayout& layout_rx, const PropagationParams& params,
                                 const GeometryModel& model = GeometryModel::exact(),
                                 Diagnostics* diag = nullptr);

/// N x N near-field coupling from TX element (column) to RX element (row).
ChannelMatrix si_channel(const ArrayLayout& layout_tx, const ArrayLayout& layout_rx,
                         const PropagationParams& params);

}  // namespace fdjcas
