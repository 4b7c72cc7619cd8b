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

#include "fdjcas/channel.hpp"

#include <algorithm>
#include <cmath>

namespace fdjcas {

void PropagationParams::validate() const {
  if (!(lambda > 0.0)) throw ConfigError("PropagationParams: lambda must be positive");
  if (kappa_abs < 0.0) throw ConfigError("PropagationParams: kappa_abs must be >= 0");
  if (b < 0.0) throw ConfigError("PropagationParams: b must be >= 0");
}

int TargetSet::served_count() const {
  return static_cast<int>(std::count(served_mask.begin(), served_mask.end(), true));
}

void TargetSet::validate() const {
  if (reflectivity.size() != states.size() || served_mask.size() != states.size()) {
    throw ConfigError("TargetSet: states, reflectivity and served_mask lengths differ");
  }
  for (const auto& s : states) {
    if (!(s.r > 0.0)) throw ConfigError("TargetSet: target range must be positive");
  }
}

double radiation_profile(double theta, double b) {
  if (theta < -kPi / 2.0 || theta > kPi / 2.0) return 0.0;
  const double c = std::max(std::cos(theta), 0.0);
  return 2.0 * (b + 1.0) * std::pow(c, b);
}

double attenuation(double r, double theta, const PropagationParams& params) {
  if (!(r > 0.0)) throw ConfigError("attenuation: range must be positive");
  return std::sqrt(radiation_profile(theta, params.b)) * params.lambda / (4.0 * kPi * r) *
         std::exp(-params.kappa_abs * r / 2.0);
}

ElementLink element_link(const SphericalState& point, int i, int n, const ArrayLayout& layout,
                         const GeometryModel& model, Diagnostics* diag) {
  const NormalizedOffset off = normalized_offset(point.r, i, n, layout);
  const double f = model.kind == GeometryModel::Kind::kExact
                       ? f_exact(point.theta, point.phi, off.x, off.z)
                       : f_fresnel(point.theta, point.phi, off.x, off.z, model.form);
  ElementLink link;
  link.distance = model.kind == GeometryModel::Kind::kExact
                      ? exact_distance_target(point, i, n, layout)
                      : point.r * f;
  link.elevation = elevation_fresnel(point.theta, off.x, off.z, f, diag).radians;
  return link;
}

namespace {

cd element_gain(const ElementLink& link, const PropagationParams& params) {
  const double amp = attenuation(link.distance, link.elevation, params);
  return std::polar(amp, 2.0 * kPi * link.distance / params.lambda);
}

}  // namespace

ChannelMatrix dl_channel(const UeGeometry& ue, const ArrayLayout& layout_tx,
                         const PropagationParams& params, const GeometryModel& model,
                         Diagnostics* diag) {
  const ArrayLayout tx = layout_tx.with_side(PanelSide::kTx);
  ChannelMatrix h{CMatrix(ue.l_antennas, tx.total()), ChannelKind::kDownlink};
  for (int ell = 0; ell < ue.l_antennas; ++ell) {
    const SphericalState s = ue_antenna_state(ue, ell);
    for (int i = 0; i < tx.n_rf; ++i) {
      for (int n = 0; n < tx.n_e; ++n) {
        h.entries(ell, tx.flat_index(i, n)) =
            element_gain(element_link(s, i, n, tx, model, diag), params);
      }
    }
  }
  return h;
}

CVector array_response(const SphericalState& target, const ArrayLayout& layout,
                       const PropagationParams& params, const GeometryModel& model,
                       Diagnostics* diag) {
  // Same arithmetic as element_link + element_gain with the per-point
  // trigonometry hoisted, and cos^b(arcsin q) evaluated as (1 - q^2)^(b/2).
  const double st = std::sin(target.theta);
  const double ct = std::cos(target.theta);
  const double sp = std::sin(target.phi);
  const double cp = std::cos(target.phi);
  const bool exact = model.kind == GeometryModel::Kind::kExact;
  const double zdir = model.form == FresnelForm::kTaylor ? ct : st;
  const double f00 = std::sqrt((st * cp) * (st * cp) + (st * sp) * (st * sp) + ct * ct);
  const double f00_3 = f00 * f00 * f00;
  const double cxx = 1.0 / f00 - st * st * cp * cp / f00_3;
  const double cxz = st * zdir * cp / f00_3;
  const double czz = 1.0 / f00 - zdir * zdir / f00_3;
  const double gain0 = std::sqrt(2.0 * (params.b + 1.0));
  const double k0 = 2.0 * kPi / params.lambda;
  const double r = target.r;

  CVector a(layout.total());
  for (int i = 0; i < layout.n_rf; ++i) {
    const double x = layout.sign() * (layout.d_p / 2.0 + i * layout.d_rf) / r;
    const double ax = st * cp + x;
    const double fx0 = std::sqrt(ax * ax + (st * sp) * (st * sp) + ct * ct);
    for (int n = 0; n < layout.n_e; ++n) {
      const double z = static_cast<double>(n) * layout.d_e / r;
      const double cz = ct - z;
      const double f0z = std::sqrt((st * cp) * (st * cp) + (st * sp) * (st * sp) + cz * cz);
      double f = 0.0;
      if (exact) {
        f = std::sqrt(ax * ax + (st * sp) * (st * sp) + cz * cz);
      } else {
        f = f00 + st * cp / f0z * x - zdir / fx0 * z + cxx * x * x / 2.0 + cxz * x * z / 2.0 +
            czz * z * z / 2.0;
      }
      const double dist = r * f;
      double q = std::abs(cz) / f;
      if (q > 1.0) {
        q = 1.0;
        if (diag != nullptr) ++diag->arcsin_clamps;
      }
      const double profile = gain0 * std::pow(std::max(0.0, 1.0 - q * q), params.b / 4.0);
      const double amp =
          profile * params.lambda / (4.0 * kPi * dist) * std::exp(-params.kappa_abs * dist / 2.0);
      a(layout.flat_index(i, n)) = std::polar(amp, k0 * dist);
    }
  }
  return a;
}

CMatrix ReflectionFactors::assemble() const {
  return a_rx * beta.asDiagonal() * a_tx.transpose();
}

ReflectionFactors reflection_factors(const TargetSet& targets, const ArrayLayout& layout_tx,
                                     const ArrayLayout& layout_rx,
                                     const PropagationParams& params,
                                     const GeometryModel& model, Diagnostics* diag) {
  targets.validate();
  const ArrayLayout tx = layout_tx.with_side(PanelSide::kTx);
  const ArrayLayout rx = layout_rx.with_side(PanelSide::kRx);
  const int k = targets.size();
  ReflectionFactors f{CMatrix(rx.total(), k), CMatrix(tx.total(), k), CVector(k)};
  for (int t = 0; t < k; ++t) {
    f.a_rx.col(t) = array_response(targets.states[t], rx, params, model, diag);
    f.a_tx.col(t) = array_response(targets.states[t], tx, params, model, diag);
    f.beta(t) = targets.reflectivity[t];
  }
  return f;
}

ChannelMatrix reflection_channel(const TargetSet& targets, const ArrayLayout& layout_tx,
                                 const ArrayLayout& layout_rx, const PropagationParams& params,
                                 const GeometryModel& model, Diagnostics* diag) {
  if (targets.size() == 0) {
    if (diag != nullptr) ++diag->empty_target_sets;
    return {CMatrix::Zero(layout_rx.total(), layout_tx.total()), ChannelKind::kReflection};
  }
  return {reflection_factors(targets, layout_tx, layout_rx, params, model, diag).assemble(),
          ChannelKind::kReflection};
}

ChannelMatrix si_channel(const ArrayLayout& layout_tx, const ArrayLayout& layout_rx,
                         const PropagationParams& params) {
  const ArrayLayout tx = layout_tx.with_side(PanelSide::kTx);
  const ArrayLayout rx = layout_rx.with_side(PanelSide::kRx);
  ChannelMatrix h{CMatrix(rx.total(), tx.total()), ChannelKind::kSelfInterference};
  for (int i = 0; i < rx.n_rf; ++i) {
    for (int n = 0; n < rx.n_e; ++n) {
      const Eigen::Vector3d p_rx = element_position(rx, i, n);
      for (int ip = 0; ip < tx.n_rf; ++ip) {
        for (int np = 0; np < tx.n_e; ++np) {
          const Eigen::Vector3d d = p_rx - element_position(tx, ip, np);
          const double r = d.norm();
          // Elevation off the panel plane as seen from the RX element.
          const double elev = std::asin(std::min(1.0, std::abs(d.z()) / r));
          h.entries(rx.flat_index(i, n), tx.flat_index(ip, np)) =
              element_gain({r, elev}, params);
        }
      }
    }
  }
  return h;
}

}  // namespace fdjcas
