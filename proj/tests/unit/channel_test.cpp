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

#include <cmath>
#include <random>

#include <doctest.h>

#include <Eigen/SVD>

#include "fdjcas/channel.hpp"
#include "oracles.hpp"

using namespace fdjcas;
using fdjcas::test::kLambda;
using fdjcas::test::panel;

namespace {

PropagationParams params(double kappa = 0.0033, double b = 2.0) { return {kLambda, kappa, b}; }

TargetSet three_targets() {
  TargetSet t;
  t.states = {{2.0, 0.6, kPi / 2}, {5.5, 1.1, kPi / 2}, {11.0, 0.3, 1.2}};
  t.reflectivity = {cd(1, 0), std::polar(0.7, 1.3), std::polar(1.2, -2.0)};
  t.served_mask = {true, false, false};
  return t;
}

}  // namespace

TEST_SUITE("channel") {

TEST_CASE("radiation profile examples") {
  CHECK(radiation_profile(0.0, 2.0) == doctest::Approx(6.0));
  CHECK(radiation_profile(kPi / 2, 2.0) == doctest::Approx(0.0).epsilon(1e-30));
  CHECK(radiation_profile(kPi / 3, 2.0) == doctest::Approx(1.5).epsilon(1e-14));
  CHECK(radiation_profile(-kPi / 3, 2.0) == doctest::Approx(1.5).epsilon(1e-14));
  CHECK(radiation_profile(kPi / 2 + 1e-3, 2.0) == 0.0);
  CHECK(radiation_profile(-2.0, 0.0) == 0.0);
}

TEST_CASE("attenuation at the unit-spreading range is sqrt(2)") {
  const PropagationParams p = params(0.0, 0.0);
  CHECK(attenuation(kLambda / (4 * kPi), 0.0, p) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));
}

TEST_CASE("attenuation halves when the range doubles without absorption") {
  const PropagationParams p = params(0.0, 2.0);
  for (double r : {0.5, 3.0, 17.0}) {
    CHECK(attenuation(2 * r, 0.4, p) == doctest::Approx(attenuation(r, 0.4, p) / 2).epsilon(1e-14));
  }
}

TEST_CASE("attenuation matches the term-by-term oracle") {
  const PropagationParams p = params(0.0033, 2.0);
  const double want = std::sqrt(6.0 * std::pow(std::cos(kPi / 6), 2.0)) * (kLambda / (4 * kPi * 10.0)) *
                      std::exp(-0.0033 * 10.0 / 2.0);
  CHECK(attenuation(10.0, kPi / 6, p) == doctest::Approx(want).epsilon(1e-14));
  CHECK_THROWS_AS(attenuation(0.0, 0.0, p), ConfigError);
  CHECK_THROWS_AS(attenuation(-1.0, 0.0, p), ConfigError);
}

TEST_CASE("dl_channel entry moduli are the per-element attenuation") {
  const ArrayLayout tx = panel(4, 16);
  const PropagationParams p = params();
  const UeGeometry ue{{3.0, 0.9, kPi / 2}, 2, kLambda / 2};
  const CMatrix h = dl_channel(ue, tx, p).entries;
  REQUIRE(h.rows() == 2);
  REQUIRE(h.cols() == 64);
  for (int ell = 0; ell < 2; ++ell) {
    const SphericalState s = ue_antenna_state(ue, ell);
    for (int i = 0; i < 4; ++i) {
      for (int n = 0; n < 16; ++n) {
        const ElementLink link = element_link(s, i, n, tx, GeometryModel::exact());
        CHECK(std::abs(h(ell, tx.flat_index(i, n))) ==
              doctest::Approx(attenuation(link.distance, link.elevation, p)).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("dl_channel scalar case") {
  ArrayLayout tx = panel(1, 1);
  tx.d_p = 0.0;
  const PropagationParams p = params(0.0033, 0.0);
  const double r = 4.2;
  const CMatrix h = dl_channel({{r, 0.0, kPi / 2}, 1, kLambda / 2}, tx, p).entries;
  REQUIRE(h.size() == 1);
  const cd want = std::polar(attenuation(r, 0.0, p), 2 * kPi * r / kLambda);
  CHECK(std::abs(h(0, 0) - want) <= 1e-12 * std::abs(want));
}

TEST_CASE("dl_channel matches the element loop oracle") {
  const ArrayLayout tx = panel(2, 4);
  const PropagationParams p = params();
  const UeGeometry ue{{1.7, 1.0, 1.3}, 2, kLambda / 2};
  const CMatrix h = dl_channel(ue, tx, p).entries;
  for (int ell = 0; ell < 2; ++ell) {
    const Eigen::Vector3d pos = test::point_xyz(ue.center) + Eigen::Vector3d(0, 0, ell * ue.d_ue);
    for (int i = 0; i < 2; ++i) {
      for (int n = 0; n < 4; ++n) {
        const cd want = test::path_gain(pos, test::element_xyz(tx, i, n), p);
        CHECK(std::abs(h(ell, i * 4 + n) - want) <= 1e-12 * std::abs(want));
      }
    }
  }
}

TEST_CASE("Fresnel dl_channel converges to the exact one with range") {
  const ArrayLayout tx = panel(4, 64);
  const PropagationParams p = params();
  double prev = 1e9;
  for (double r : {1.0, 4.0, 16.0, 64.0}) {
    const UeGeometry ue{{r, 0.8, kPi / 2}, 2, kLambda / 2};
    const CMatrix exact = dl_channel(ue, tx, p).entries;
    const CMatrix approx = dl_channel(ue, tx, p, GeometryModel::fresnel()).entries;
    const double dev = test::rel_diff(approx, exact);
    CAPTURE(r);
    CHECK(dev < prev);
    prev = dev;
  }
  CHECK(prev < 1e-2);
}

TEST_CASE("array_response moduli are the per-element attenuation") {
  const PropagationParams p = params();
  const SphericalState t{2.5, 0.7, kPi / 2};
  for (PanelSide side : {PanelSide::kTx, PanelSide::kRx}) {
    const ArrayLayout l = panel(4, 16, side);
    const CVector a = array_response(t, l, p);
    for (int i = 0; i < 4; ++i) {
      for (int n = 0; n < 16; ++n) {
        const ElementLink link = element_link(t, i, n, l, GeometryModel::exact());
        CHECK(std::abs(a(l.flat_index(i, n))) ==
              doctest::Approx(attenuation(link.distance, link.elevation, p)).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("responses to distinct points are not collinear") {
  const ArrayLayout l = panel(4, 64, PanelSide::kRx);
  const PropagationParams p = params();
  const CVector a = array_response({2.0, 0.6, kPi / 2}, l, p).normalized();
  const CVector b = array_response({6.0, 1.0, kPi / 2}, l, p).normalized();
  CHECK(std::abs(a.dot(b)) < 1.0 - 1e-6);
}

TEST_CASE("array_response matches the element loop oracle") {
  const PropagationParams p = params();
  const SphericalState t{1.3, 0.5, 2.0};
  for (PanelSide side : {PanelSide::kTx, PanelSide::kRx}) {
    const ArrayLayout l = panel(2, 4, side);
    const CVector a = array_response(t, l, p);
    const CVector want = test::response(t, l, p);
    for (int k = 0; k < 8; ++k) CHECK(std::abs(a(k) - want(k)) <= 1e-12 * std::abs(want(k)));
  }
}

TEST_CASE("array_response under Fresnel geometry agrees with the element-link path") {
  const ArrayLayout tx = panel(4, 32);
  const PropagationParams p = params();
  for (FresnelForm form : {FresnelForm::kTaylor, FresnelForm::kPrinted}) {
    const SphericalState t{3.0, 0.9, kPi / 2};
    const CVector fast = array_response(t, tx, p, GeometryModel::fresnel(form));
    const CMatrix slow = dl_channel({t, 1, kLambda / 2}, tx, p, GeometryModel::fresnel(form)).entries;
    CHECK(test::rel_diff(CMatrix(fast.transpose()), slow) <= 1e-12);
  }
}

TEST_CASE("single-target reflection channel is a rank-one outer product") {
  const ArrayLayout tx = panel(2, 8);
  const ArrayLayout rx = tx.with_side(PanelSide::kRx);
  const PropagationParams p = params();
  TargetSet t;
  t.states = {{3.0, 0.8, kPi / 2}};
  t.reflectivity = {cd(1, 0)};
  t.served_mask = {true};
  const CMatrix h = reflection_channel(t, tx, rx, p).entries;
  const CVector a_rx = array_response(t.states[0], rx, p);
  const CVector a_tx = array_response(t.states[0], tx, p);
  Eigen::JacobiSVD<CMatrix> svd(h);
  const RVector s = svd.singularValues();
  CHECK(s(0) == doctest::Approx(a_rx.norm() * a_tx.norm()).epsilon(1e-10));
  CHECK(s(1) <= 1e-9 * s(0));
}

TEST_CASE("empty target set gives the zero matrix and a diagnostic") {
  const ArrayLayout tx = panel(2, 4);
  Diagnostics diag;
  const ChannelMatrix h = reflection_channel({}, tx, tx.with_side(PanelSide::kRx), params(),
                                             GeometryModel::exact(), &diag);
  CHECK(h.rows() == 8);
  CHECK(h.cols() == 8);
  CHECK(h.entries.isZero(0.0));
  CHECK(diag.empty_target_sets == 1);
}

TEST_CASE("three-target reflection channel matches the outer-product sum") {
  const ArrayLayout tx = panel(2, 8);
  const ArrayLayout rx = tx.with_side(PanelSide::kRx);
  const PropagationParams p = params();
  const TargetSet t = three_targets();
  const CMatrix h = reflection_channel(t, tx, rx, p).entries;
  CMatrix want = CMatrix::Zero(16, 16);
  for (int k = 0; k < 3; ++k) {
    want += t.reflectivity[k] * test::response(t.states[k], rx, p) *
            test::response(t.states[k], tx, p).transpose();
  }
  CHECK(test::rel_diff(h, want) <= 1e-12);

  Eigen::JacobiSVD<CMatrix> svd(h);
  const RVector s = svd.singularValues();
  int rank = 0;
  for (Eigen::Index k = 0; k < s.size(); ++k) rank += s(k) > 1e-9 * s(0) ? 1 : 0;
  CHECK(rank <= 3);
}

TEST_CASE("reflection channel is linear in the reflectivities") {
  const ArrayLayout tx = panel(2, 8);
  const ArrayLayout rx = tx.with_side(PanelSide::kRx);
  TargetSet t = three_targets();
  const CMatrix h = reflection_channel(t, tx, rx, params()).entries;
  const cd c(0.3, -1.7);
  for (auto& b : t.reflectivity) b *= c;
  const CMatrix hc = reflection_channel(t, tx, rx, params()).entries;
  CHECK(test::rel_diff(hc, CMatrix(c * h)) <= 1e-14);
}

TEST_CASE("target sets are validated") {
  TargetSet t = three_targets();
  t.reflectivity.pop_back();
  CHECK_THROWS_AS(t.validate(), ConfigError);
  t = three_targets();
  t.states[1].r = 0.0;
  CHECK_THROWS_AS(t.validate(), ConfigError);
  CHECK(three_targets().served_count() == 1);
}

TEST_CASE("SI channel matches the Cartesian oracle") {
  const ArrayLayout tx = panel(2, 4);
  const ArrayLayout rx = tx.with_side(PanelSide::kRx);
  const PropagationParams p = params();
  const CMatrix h = si_channel(tx, rx, p).entries;
  REQUIRE(h.rows() == 8);
  REQUIRE(h.cols() == 8);
  for (int i = 0; i < 2; ++i) {
    for (int n = 0; n < 4; ++n) {
      for (int ip = 0; ip < 2; ++ip) {
        for (int np = 0; np < 4; ++np) {
          const cd want =
              test::path_gain(test::element_xyz(rx, i, n), test::element_xyz(tx, ip, np), p);
          CHECK(std::abs(h(i * 4 + n, ip * 4 + np) - want) <= 1e-12 * std::abs(want));
        }
      }
    }
  }
}

TEST_CASE("nearest SI element pair dominates its row") {
  // b = 0 so only the 1/r law shapes the magnitudes.
  const ArrayLayout tx = panel(4, 8);
  const ArrayLayout rx = tx.with_side(PanelSide::kRx);
  const CMatrix h = si_channel(tx, rx, params(0.0033, 0.0)).entries;
  for (int n = 0; n < 8; ++n) {
    Eigen::Index best = 0;
    h.row(rx.flat_index(0, n)).cwiseAbs().maxCoeff(&best);
    CHECK(best == tx.flat_index(0, n));
  }
}

TEST_CASE("SI magnitudes are symmetric under mirroring across the panel gap") {
  const ArrayLayout tx = panel(3, 6);
  const ArrayLayout rx = tx.with_side(PanelSide::kRx);
  const CMatrix h = si_channel(tx, rx, params()).entries;
  for (int a = 0; a < tx.total(); ++a) {
    for (int b = 0; b < tx.total(); ++b) {
      CHECK(std::abs(h(a, b)) == doctest::Approx(std::abs(h(b, a))).epsilon(1e-12));
    }
  }
}

TEST_CASE("channel entries are finite") {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> ur(0.05, 40.0), ut(0.0, kPi), up(0.0, 2 * kPi);
  const ArrayLayout tx = panel(4, 32);
  const ArrayLayout rx = tx.with_side(PanelSide::kRx);
  for (int k = 0; k < 50; ++k) {
    const SphericalState s{ur(rng), ut(rng), up(rng)};
    REQUIRE(array_response(s, rx, params()).allFinite());
    REQUIRE(array_response(s, tx, params(), GeometryModel::fresnel()).allFinite());
    REQUIRE(dl_channel({s, 2, kLambda / 2}, tx, params()).entries.allFinite());
  }
  CHECK(si_channel(tx, rx, params()).entries.allFinite());
}

}  // TEST_SUITE
