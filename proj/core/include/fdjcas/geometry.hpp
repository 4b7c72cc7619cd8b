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

#include <cstddef>

#include <Eigen/Dense>

#include "fdjcas/types.hpp"

namespace fdjcas {

enum class PanelSide { kTx, kRx };

/// Geometry of one DMA panel in the xz-plane.
///
/// Microstrips run along +z and are stacked along x. Element (i, n) of the
/// TX panel sits at x = -(d_p/2 + i*d_rf), z = n*d_e; the RX panel mirrors it
/// to +x. Indices are zero-based.
struct ArrayLayout {
  int n_rf = 4;
  int n_e = 512;
  double d_e = 0.0;
  double d_rf = 0.0;
  double d_p = 0.0;
  PanelSide side = PanelSide::kTx;

  [[nodiscard]] int total() const { return n_rf * n_e; }
  [[nodiscard]] int flat_index(int i, int n) const { return i * n_e + n; }
  /// +1 for TX (distance uses +d_p/2 + i*d_rf), -1 for RX.
  [[nodiscard]] double sign() const { return side == PanelSide::kTx ? 1.0 : -1.0; }
  [[nodiscard]] ArrayLayout with_side(PanelSide s) const {
    ArrayLayout copy = *this;
    copy.side = s;
    return copy;
  }
  void validate() const;
};

/// Range, elevation (from +z) and azimuth (from +x in the xy-plane).
struct SphericalState {
  double r = 1.0;
  double theta = 0.0;
  double phi = 0.0;
};

/// Served UE with an L-element ULA along +z.
struct UeGeometry {
  SphericalState center;
  int l_antennas = 1;
  double d_ue = 0.0;
};

enum class FresnelForm {
  kTaylor,   // second-order expansion consistent with f_exact
  kPrinted,  // the six-term expression with sin(theta) in the z terms
};

Eigen::Vector3d to_cartesian(const SphericalState& s);
/// Inverse of to_cartesian; phi is wrapped into [0, 2*pi).
SphericalState to_spherical(const Eigen::Vector3d& p);

/// Cartesian position of element (i, n) on `layout`.
Eigen::Vector3d element_position(const ArrayLayout& layout, int i, int n);

/// Exact UE-antenna to TX-element distance (the "+" branch regardless of side).
double exact_distance_ue(const SphericalState& ue_antenna, int i, int n,
                         const ArrayLayout& layout);

/// Exact target to element distance; layout.side selects the x-offset sign.
double exact_distance_target(const SphericalState& target, int i, int n,
                             const ArrayLayout& layout);

/// Normalized offsets (x, z) for element (i, n) seen from range r.
struct NormalizedOffset {
  double x = 0.0;
  double z = 0.0;
};
NormalizedOffset normalized_offset(double r, int i, int n, const ArrayLayout& layout);

/// Distance scale factor F(x, z); r * F equals the exact element distance.
double f_exact(double theta, double phi, double x, double z);

/// Second-order two-offset Fresnel approximation of f_exact.
double f_fresnel(double theta, double phi, double x, double z,
                 FresnelForm form = FresnelForm::kTaylor);

struct ElevationResult {
  double radians = 0.0;
  bool clamped = false;
};

/// arcsin(|z - cos(theta)| / f_value), clamped to [0, pi/2].
ElevationResult elevation_fresnel(double theta, double x, double z, double f_value,
                                  Diagnostics* diag = nullptr);

/// Spherical coordinates of antenna `ell` (zero-based), offset by ell*d_ue along +z.
SphericalState ue_antenna_state(const UeGeometry& ue, int ell);

/// Mean/max approximation errors of the Fresnel range and elevation over
/// every (antenna, microstrip, element) triple of a UE.
struct FresnelErrorStats {
  double mean_rel_range_err = 0.0;
  double max_rel_range_err = 0.0;
  double mean_abs_elev_err_rad = 0.0;
  std::size_t samples = 0;
};

FresnelErrorStats fresnel_error(const UeGeometry& ue, const ArrayLayout& layout,
                                FresnelForm form = FresnelForm::kTaylor);

}  // namespace fdjcas
