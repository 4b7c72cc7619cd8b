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

#include "fdjcas/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace fdjcas {

namespace {

void check_index(const ArrayLayout& layout, int i, int n) {
  if (i < 0 || i >= layout.n_rf || n < 0 || n >= layout.n_e) {
    throw std::out_of_range("element index (" + std::to_string(i) + ", " + std::to_string(n) +
                            ") outside " + std::to_string(layout.n_rf) + "x" +
                            std::to_string(layout.n_e) + " panel");
  }
}

double x_offset(const ArrayLayout& layout, int i) {
  return layout.d_p / 2.0 + static_cast<double>(i) * layout.d_rf;
}

}  // namespace

void ArrayLayout::validate() const {
  if (n_rf < 1 || n_e < 1) throw ConfigError("ArrayLayout: n_rf and n_e must be >= 1");
  if (!(d_e > 0.0) || !(d_rf > 0.0) || !(d_p > 0.0)) {
    throw ConfigError("ArrayLayout: spacings must be positive");
  }
}

Eigen::Vector3d to_cartesian(const SphericalState& s) {
  const double st = std::sin(s.theta);
  return {s.r * st * std::cos(s.phi), s.r * st * std::sin(s.phi), s.r * std::cos(s.theta)};
}

SphericalState to_spherical(const Eigen::Vector3d& p) {
  SphericalState s;
  s.r = p.norm();
  s.theta = s.r > 0.0 ? std::acos(std::clamp(p.z() / s.r, -1.0, 1.0)) : 0.0;
  double phi = std::atan2(p.y(), p.x());
  if (phi < 0.0) phi += 2.0 * kPi;
  if (phi >= 2.0 * kPi) phi -= 2.0 * kPi;
  s.phi = phi;
  return s;
}

Eigen::Vector3d element_position(const ArrayLayout& layout, int i, int n) {
  check_index(layout, i, n);
  return {-layout.sign() * x_offset(layout, i), 0.0, static_cast<double>(n) * layout.d_e};
}

double exact_distance_target(const SphericalState& target, int i, int n,
                             const ArrayLayout& layout) {
  check_index(layout, i, n);
  const double st = std::sin(target.theta);
  const double dx = target.r * st * std::cos(target.phi) + layout.sign() * x_offset(layout, i);
  const double dy = target.r * st * std::sin(target.phi);
  const double dz = target.r * std::cos(target.theta) - static_cast<double>(n) * layout.d_e;
  return std::sqrt(dx * dx + dy * dy + dz * dz);
}

double exact_distance_ue(const SphericalState& ue_antenna, int i, int n,
                         const ArrayLayout& layout) {
  return exact_distance_target(ue_antenna, i, n, layout.with_side(PanelSide::kTx));
}

NormalizedOffset normalized_offset(double r, int i, int n, const ArrayLayout& layout) {
  check_index(layout, i, n);
  return {layout.sign() * x_offset(layout, i) / r, static_cast<double>(n) * layout.d_e / r};
}

double f_exact(double theta, double phi, double x, double z) {
  const double st = std::sin(theta);
  const double a = st * std::cos(phi) + x;
  const double b = st * std::sin(phi);
  const double c = std::cos(theta) - z;
  return std::sqrt(a * a + b * b + c * c);
}

double f_fresnel(double theta, double phi, double x, double z, FresnelForm form) {
  const double st = std::sin(theta);
  const double ct = std::cos(theta);
  const double cp = std::cos(phi);
  // Direction cosine multiplying z. The printed expression carries sin(theta).
  const double zdir = form == FresnelForm::kTaylor ? ct : st;

  const double f00 = f_exact(theta, phi, 0.0, 0.0);
  const double f00_3 = f00 * f00 * f00;
  const double f0z = f_exact(theta, phi, 0.0, z);
  const double fx0 = f_exact(theta, phi, x, 0.0);

  return f00 + st * cp / f0z * x - zdir / fx0 * z +
         (1.0 / f00 - st * st * cp * cp / f00_3) * x * x / 2.0 +
         (st * zdir * cp / f00_3) * x * z / 2.0 +
         (1.0 / f00 - zdir * zdir / f00_3) * z * z / 2.0;
}

ElevationResult elevation_fresnel(double theta, double /*x*/, double z, double f_value,
                                  Diagnostics* diag) {
  if (!(f_value > 0.0)) throw ConfigError("elevation_fresnel: f_value must be positive");
  double arg = std::abs(z - std::cos(theta)) / f_value;
  ElevationResult out;
  if (arg > 1.0) {
    arg = 1.0;
    out.clamped = true;
    if (diag != nullptr) ++diag->arcsin_clamps;
  }
  out.radians = std::asin(arg);
  return out;
}

SphericalState ue_antenna_state(const UeGeometry& ue, int ell) {
  if (ell < 0 || ell >= ue.l_antennas) {
    throw std::out_of_range("UE antenna index " + std::to_string(ell) + " outside [0, " +
                            std::to_string(ue.l_antennas) + ")");
  }
  if (ell == 0) return ue.center;
  Eigen::Vector3d p = to_cartesian(ue.center);
  p.z() += static_cast<double>(ell) * ue.d_ue;
  return to_spherical(p);
}

FresnelErrorStats fresnel_error(const UeGeometry& ue, const ArrayLayout& layout,
                                FresnelForm form) {
  const ArrayLayout tx = layout.with_side(PanelSide::kTx);
  FresnelErrorStats stats;
  double sum_range = 0.0;
  double sum_elev = 0.0;
  for (int ell = 0; ell < ue.l_antennas; ++ell) {
    const SphericalState s = ue_antenna_state(ue, ell);
    for (int i = 0; i < tx.n_rf; ++i) {
      for (int n = 0; n < tx.n_e; ++n) {
        const NormalizedOffset off = normalized_offset(s.r, i, n, tx);
        const double fe = f_exact(s.theta, s.phi, off.x, off.z);
        const double fa = f_fresnel(s.theta, s.phi, off.x, off.z, form);
        const double rel = std::abs(fa - fe) / fe;
        sum_range += rel;
        stats.max_rel_range_err = std::max(stats.max_rel_range_err, rel);
        const double el_e = elevation_fresnel(s.theta, off.x, off.z, fe).radians;
        const double el_a = elevation_fresnel(s.theta, off.x, off.z, fa).radians;
        sum_elev += std::abs(el_a - el_e);
        ++stats.samples;
      }
    }
  }
  if (stats.samples > 0) {
    stats.mean_rel_range_err = sum_range / static_cast<double>(stats.samples);
    stats.mean_abs_elev_err_rad = sum_elev / static_cast<double>(stats.samples);
  }
  return stats;
}

}  // namespace fdjcas
