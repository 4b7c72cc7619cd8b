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
#include <stdexcept>

#include <doctest.h>

#include "fdjcas/geometry.hpp"
#include "oracles.hpp"

using namespace fdjcas;
using fdjcas::test::kLambda;
using fdjcas::test::panel;

TEST_SUITE("geometry") {

TEST_CASE("ue distance collapses to r on the panel axis") {
  ArrayLayout l = panel(4, 8);
  l.d_p = 0.0;
  CHECK(exact_distance_ue({5.0, 0.0, kPi / 2}, 0, 0, l) == doctest::Approx(5.0).epsilon(1e-15));
}

TEST_CASE("ue distance for an on-axis UE picks up the half panel offset") {
  ArrayLayout l = panel(4, 8, PanelSide::kTx, 0.04);
  CHECK(exact_distance_ue({2.0, kPi / 2, kPi / 2}, 0, 0, l) ==
        doctest::Approx(std::sqrt(0.02 * 0.02 + 4.0)).epsilon(1e-15));
}

TEST_CASE("ue distance matches the Cartesian oracle at 120 GHz spacings") {
  const ArrayLayout l = panel(4, 32);
  const SphericalState ue{1.0, kPi / 4, kPi / 2};
  const double want = test::distance(ue, l, 2, 16);
  CHECK(test::rel_diff(exact_distance_ue(ue, 2, 16, l), want) <= 1e-12);
}

TEST_CASE("target distance collapses to r on the axis for any azimuth") {
  ArrayLayout l = panel(2, 4);
  l.d_p = 0.0;
  for (double phi : {0.0, 1.0, 3.0, 5.5}) {
    CHECK(exact_distance_target({3.0, 0.0, phi}, 0, 0, l) == doctest::Approx(3.0));
  }
}

TEST_CASE("target distance sign convention: TX carries +d_p/2, RX -d_p/2") {
  const SphericalState t{2.0, kPi / 2, 0.0};
  const ArrayLayout tx = panel(2, 4, PanelSide::kTx, 0.04);
  const ArrayLayout rx = tx.with_side(PanelSide::kRx);
  const double d_tx = exact_distance_target(t, 0, 0, tx);
  const double d_rx = exact_distance_target(t, 0, 0, rx);
  CHECK(d_tx == doctest::Approx(2.02).epsilon(1e-14));
  CHECK(d_rx == doctest::Approx(1.98).epsilon(1e-14));
  // On the phi = pi side the roles swap.
  CHECK(exact_distance_target({2.0, kPi / 2, kPi}, 0, 0, tx) <
        exact_distance_target({2.0, kPi / 2, kPi}, 0, 0, rx));
}

TEST_CASE("target distance matches the Cartesian oracle for random geometry") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> ur(0.3, 30.0), ut(0.0, kPi), up(0.0, 2 * kPi);
  for (PanelSide side : {PanelSide::kTx, PanelSide::kRx}) {
    const ArrayLayout l = panel(4, 64, side);
    std::uniform_int_distribution<int> ui(0, 3), un(0, 63);
    for (int trial = 0; trial < 2000; ++trial) {
      const SphericalState s{ur(rng), ut(rng), up(rng)};
      const int i = ui(rng);
      const int n = un(rng);
      REQUIRE(test::rel_diff(exact_distance_target(s, i, n, l), test::distance(s, l, i, n)) <=
              1e-12);
    }
  }
}

TEST_CASE("element indices outside the panel are rejected") {
  const ArrayLayout l = panel(2, 4);
  const SphericalState s{1.0, 0.3, 0.2};
  CHECK_THROWS_AS(exact_distance_target(s, 2, 0, l), std::out_of_range);
  CHECK_THROWS_AS(exact_distance_target(s, 0, 4, l), std::out_of_range);
  CHECK_THROWS_AS(exact_distance_ue(s, -1, 0, l), std::out_of_range);
  CHECK_THROWS_AS(normalized_offset(1.0, 0, -1, l), std::out_of_range);
}

TEST_CASE("f_exact is one at zero offset") {
  for (double theta : {0.0, 0.4, kPi / 2, 2.5}) {
    for (double phi : {0.0, 1.0, kPi / 2, 4.0}) {
      CHECK(f_exact(theta, phi, 0.0, 0.0) == doctest::Approx(1.0).epsilon(1e-15));
    }
  }
  CHECK(f_exact(kPi / 2, kPi / 2, 0.1, 0.0) == doctest::Approx(std::sqrt(1.01)).epsilon(1e-15));
}

TEST_CASE("r * f_exact reproduces the exact distance") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> ur(0.5, 25.0), ut(0.0, kPi), up(0.0, 2 * kPi);
  for (PanelSide side : {PanelSide::kTx, PanelSide::kRx}) {
    const ArrayLayout l = panel(4, 128, side);
    for (int trial = 0; trial < 2000; ++trial) {
      const SphericalState s{ur(rng), ut(rng), up(rng)};
      const int i = trial % 4;
      const int n = (trial * 37) % 128;
      const NormalizedOffset off = normalized_offset(s.r, i, n, l);
      REQUIRE(test::rel_diff(s.r * f_exact(s.theta, s.phi, off.x, off.z),
                             exact_distance_target(s, i, n, l)) <= 1e-12);
    }
  }
}

TEST_CASE("f_fresnel is one at zero offset in both forms") {
  for (double theta : {0.1, 0.9, 1.4}) {
    CHECK(f_fresnel(theta, 0.7, 0.0, 0.0, FresnelForm::kTaylor) == doctest::Approx(1.0));
    CHECK(f_fresnel(theta, 0.7, 0.0, 0.0, FresnelForm::kPrinted) == doctest::Approx(1.0));
  }
}

TEST_CASE("f_fresnel error shrinks with the offsets") {
  const double t = kPi / 4;
  const double p = kPi / 2;
  for (FresnelForm form : {FresnelForm::kTaylor, FresnelForm::kPrinted}) {
    const double small = std::abs(f_fresnel(t, p, 1e-3, 1e-3, form) - f_exact(t, p, 1e-3, 1e-3));
    const double large = std::abs(f_fresnel(t, p, 1e-1, 1e-1, form) - f_exact(t, p, 1e-1, 1e-1));
    CHECK(small <= large);
  }
}

TEST_CASE("the printed and Taylor forms coincide at theta = pi/4") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-0.05, 0.05), up(0.0, 2 * kPi);
  for (int k = 0; k < 100; ++k) {
    const double x = u(rng);
    const double z = u(rng);
    const double phi = up(rng);
    CHECK(f_fresnel(kPi / 4, phi, x, z, FresnelForm::kPrinted) ==
          doctest::Approx(f_fresnel(kPi / 4, phi, x, z, FresnelForm::kTaylor)).epsilon(1e-14));
  }
}

TEST_CASE("Fresnel error statistics match an exhaustive sweep") {
  const ArrayLayout l = panel(4, 512);
  const UeGeometry ue{{10.0, kPi / 4, kPi / 2}, 2, kLambda / 2};
  const FresnelErrorStats stats = fresnel_error(ue, l);

  double sum = 0.0;
  double worst = 0.0;
  int count = 0;
  for (int ell = 0; ell < 2; ++ell) {
    const Eigen::Vector3d p = test::point_xyz(ue.center) + Eigen::Vector3d(0, 0, ell * ue.d_ue);
    const double r = p.norm();
    const double theta = std::acos(p.z() / r);
    const double phi = std::atan2(p.y(), p.x());
    for (int i = 0; i < 4; ++i) {
      for (int n = 0; n < 512; ++n) {
        const double exact = (p - test::element_xyz(l, i, n)).norm();
        const double x = (l.d_p / 2 + i * l.d_rf) / r;
        const double z = n * l.d_e / r;
        const double approx = r * f_fresnel(theta, phi, x, z);
        const double rel = std::abs(approx - exact) / exact;
        sum += rel;
        worst = std::max(worst, rel);
        ++count;
      }
    }
  }
  CHECK(stats.samples == static_cast<std::size_t>(count));
  CHECK(stats.mean_rel_range_err == doctest::Approx(sum / count).epsilon(1e-9));
  CHECK(stats.max_rel_range_err == doctest::Approx(worst).epsilon(1e-9));
}

TEST_CASE("Fresnel range error stays below 1e-2 over a 512-element strip from 1 m") {
  const ArrayLayout l = panel(4, 512);
  for (double r : {1.0, 2.0, 5.0, 10.0, 20.0}) {
    for (double theta : {0.2, kPi / 4, 1.2, kPi / 2}) {
      const FresnelErrorStats s = fresnel_error({{r, theta, kPi / 2}, 2, kLambda / 2}, l);
      CAPTURE(r);
      CAPTURE(theta);
      CHECK(s.max_rel_range_err < 1e-2);
    }
  }
}

TEST_CASE("Fresnel error vanishes as the offsets shrink") {
  const ArrayLayout l = panel(4, 128);
  double prev = 1.0;
  for (double r : {1.0, 4.0, 16.0, 64.0}) {
    const double e = fresnel_error({{r, 0.7, kPi / 2}, 1, kLambda / 2}, l).max_rel_range_err;
    CHECK(e < prev);
    prev = e;
  }
  CHECK(prev < 1e-6);
}

TEST_CASE("elevation_fresnel examples") {
  CHECK(elevation_fresnel(0.0, 0.0, 0.0, 1.0).radians == doctest::Approx(kPi / 2));
  CHECK(elevation_fresnel(kPi / 2, 0.0, 0.0, 1.0).radians == doctest::Approx(0.0));
}

TEST_CASE("elevation_fresnel matches the Cartesian elevation for exact F") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> ur(0.5, 20.0), ut(0.0, kPi), up(0.0, 2 * kPi);
  const ArrayLayout l = panel(4, 64);
  for (int k = 0; k < 500; ++k) {
    const SphericalState s{ur(rng), ut(rng), up(rng)};
    const int i = k % 4;
    const int n = (k * 7) % 64;
    const NormalizedOffset off = normalized_offset(s.r, i, n, l);
    const double f = f_exact(s.theta, s.phi, off.x, off.z);
    const Eigen::Vector3d d = test::point_xyz(s) - test::element_xyz(l, i, n);
    const double want = std::asin(std::abs(d.z()) / d.norm());
    CHECK(elevation_fresnel(s.theta, off.x, off.z, f).radians ==
          doctest::Approx(want).epsilon(1e-9));
  }
}

TEST_CASE("elevation_fresnel with Fresnel F stays within its error budget") {
  const ArrayLayout l = panel(4, 512);
  const UeGeometry ue{{5.0, 0.8, kPi / 2}, 1, kLambda / 2};
  CHECK(fresnel_error(ue, l).mean_abs_elev_err_rad < 1e-3);
}

TEST_CASE("elevation_fresnel clamps, flags and stays in [0, pi/2]") {
  Diagnostics diag;
  const ElevationResult e = elevation_fresnel(0.0, 0.0, -0.5, 1.0, &diag);
  CHECK(e.clamped);
  CHECK(e.radians == doctest::Approx(kPi / 2));
  CHECK(diag.arcsin_clamps == 1);
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-3.0, 3.0), uf(0.1, 3.0);
  for (int k = 0; k < 1000; ++k) {
    const double v = elevation_fresnel(u(rng), 0.0, u(rng), uf(rng)).radians;
    REQUIRE(v >= 0.0);
    REQUIRE(v <= kPi / 2);
  }
  CHECK_THROWS_AS(elevation_fresnel(0.1, 0.0, 0.0, 0.0), ConfigError);
}

TEST_CASE("ue_antenna_state offsets along +z") {
  const UeGeometry ue{{4.0, kPi / 2, kPi / 2}, 2, kLambda / 2};
  const SphericalState a0 = ue_antenna_state(ue, 0);
  CHECK(a0.r == ue.center.r);
  CHECK(a0.theta == ue.center.theta);
  CHECK(a0.phi == ue.center.phi);

  const SphericalState a1 = ue_antenna_state(ue, 1);
  const double r1 = std::sqrt(16.0 + ue.d_ue * ue.d_ue);
  CHECK(a1.r == doctest::Approx(r1).epsilon(1e-14));
  CHECK(a1.theta == doctest::Approx(std::acos(ue.d_ue / r1)).epsilon(1e-14));
  CHECK_THROWS_AS(ue_antenna_state(ue, 2), std::out_of_range);
}

TEST_CASE("ue_antenna_state matches the add-then-convert oracle") {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> ur(0.5, 20.0), ut(0.05, kPi - 0.05), up(0.0, 2 * kPi);
  for (int k = 0; k < 500; ++k) {
    const UeGeometry ue{{ur(rng), ut(rng), up(rng)}, 4, kLambda / 2};
    for (int ell = 1; ell < 4; ++ell) {
      const Eigen::Vector3d want = test::point_xyz(ue.center) + Eigen::Vector3d(0, 0, ell * ue.d_ue);
      const Eigen::Vector3d got = test::point_xyz(ue_antenna_state(ue, ell));
      REQUIRE((got - want).norm() <= 1e-12 * want.norm());
    }
  }
}

TEST_CASE("swapping the panel side mirrors x and nothing else") {
  const ArrayLayout tx = panel(4, 16);
  const ArrayLayout rx = tx.with_side(PanelSide::kRx);
  for (int i = 0; i < 4; ++i) {
    for (int n = 0; n < 16; ++n) {
      const NormalizedOffset a = normalized_offset(3.0, i, n, tx);
      const NormalizedOffset b = normalized_offset(3.0, i, n, rx);
      CHECK(a.x == -b.x);
      CHECK(a.z == b.z);
      const Eigen::Vector3d pa = element_position(tx, i, n);
      const Eigen::Vector3d pb = element_position(rx, i, n);
      CHECK(pa.x() == -pb.x());
      CHECK(pa.y() == pb.y());
      CHECK(pa.z() == pb.z());
    }
  }
  // A target mirrored through the yz-plane sees the two panels swapped.
  const SphericalState s{2.5, 0.6, 0.4};
  const SphericalState mirrored{2.5, 0.6, kPi - 0.4};
  CHECK(exact_distance_target(s, 1, 3, tx) ==
        doctest::Approx(exact_distance_target(mirrored, 1, 3, rx)).epsilon(1e-14));
}

TEST_CASE("spherical and Cartesian conversions round-trip") {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> ur(0.1, 50.0), ut(0.01, kPi - 0.01), up(0.0, 2 * kPi);
  for (int k = 0; k < 500; ++k) {
    const SphericalState s{ur(rng), ut(rng), up(rng)};
    const SphericalState back = to_spherical(to_cartesian(s));
    CHECK(back.r == doctest::Approx(s.r).epsilon(1e-12));
    CHECK(back.theta == doctest::Approx(s.theta).epsilon(1e-12));
    CHECK(back.phi == doctest::Approx(s.phi).epsilon(1e-12));
  }
}

TEST_CASE("layout validation") {
  CHECK_NOTHROW(panel(4, 8).validate());
  ArrayLayout bad = panel(4, 8);
  bad.n_e = 0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = panel(4, 8);
  bad.d_rf = 0.0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}

}  // TEST_SUITE
