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

#include "fdjcas/dma.hpp"
#include "oracles.hpp"

using namespace fdjcas;
using fdjcas::test::kLambda;
using fdjcas::test::panel;

TEST_SUITE("dma") {

TEST_CASE("zero positions give the identity propagation matrix") {
  const ArrayLayout l = panel(3, 5);
  MicrostripParams s;
  s.alpha = 0.6;
  s.beta = 2 * kPi / (0.8 * kLambda);
  s.rho.assign(5, 0.0);
  const PropagationMatrix p = propagation_matrix({s, s, s}, l);
  CHECK(CMatrix(p).isIdentity(0.0));
}

TEST_CASE("a lossless half-wave guided phase gives -1") {
  const ArrayLayout l = panel(1, 2);
  MicrostripParams s;
  s.alpha = 0.0;
  s.beta = 100.0;
  s.rho = {0.0, kPi / 100.0};
  const PropagationMatrix p = propagation_matrix({s}, l);
  CHECK(std::abs(p.diagonal()(1) - cd(-1.0, 0.0)) <= 1e-15);
}

TEST_CASE("propagation matrix matches the scalar exp oracle") {
  const ArrayLayout l = panel(4, 16);
  const auto strips = uniform_microstrips(l, kLambda, 0.6, 0.8);
  const PropagationMatrix p = propagation_matrix(strips, l);
  const double beta = 2 * kPi / (0.8 * kLambda);
  for (int i = 0; i < 4; ++i) {
    for (int n = 0; n < 16; ++n) {
      const double rho = n * l.d_e;
      const cd want = std::exp(-0.6 * rho) * cd(std::cos(rho * beta), -std::sin(rho * beta));
      CHECK(std::abs(p.diagonal()(i * 16 + n) - want) <= 1e-14);
      CHECK(std::abs(p.diagonal()(i * 16 + n)) <= 1.0);
    }
  }
  CHECK_THROWS_AS(propagation_matrix({strips[0]}, l), ConfigError);
}

TEST_CASE("microstrip validation") {
  const auto strips = uniform_microstrips(panel(2, 8), kLambda);
  CHECK_NOTHROW(strips[0].validate());
  MicrostripParams bad = strips[0];
  bad.rho[3] = bad.rho[2];
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = strips[0];
  bad.alpha = -0.1;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("Lorentzian weight examples") {
  CHECK(std::abs(lorentzian(kPi / 2).value - kJ) <= 1e-15);
  CHECK(std::abs(lorentzian(-kPi / 2).value) <= 1e-15);
  const cd w = lorentzian(0.0).value;
  CHECK(std::abs(w - cd(0.5, 0.5)) <= 1e-15);
  CHECK(std::abs(w) == doctest::Approx(std::sqrt(2.0) / 2));
}

TEST_CASE("out-of-range Lorentzian phases are reflected back with a diagnostic") {
  Diagnostics diag;
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  for (int k = 0; k < 1000; ++k) {
    const LorentzianWeight w = lorentzian(u(rng), &diag);
    REQUIRE(w.phase_param >= -kPi / 2 - 1e-15);
    REQUIRE(w.phase_param <= kPi / 2 + 1e-15);
    REQUIRE(lorentzian_circle_error(w.value) <= 1e-12);
  }
  CHECK(diag.phase_wraps > 0);
  Diagnostics quiet;
  lorentzian(0.3, &quiet);
  CHECK(quiet.phase_wraps == 0);
}

TEST_CASE("assembled matrix with all weights j") {
  const CMatrix grid = CMatrix::Constant(4, 8, kJ);
  const AnalogBfMatrix w = assemble_analog(grid, BeamRole::kTx);
  REQUIRE(w.entries.rows() == 32);
  REQUIRE(w.entries.cols() == 4);
  for (int j = 0; j < 4; ++j) {
    int nonzero = 0;
    for (int r = 0; r < 32; ++r) {
      if (w.entries(r, j) != cd(0, 0)) {
        ++nonzero;
        CHECK(w.entries(r, j) == kJ);
      }
    }
    CHECK(nonzero == 8);
  }
}

TEST_CASE("a single microstrip assembles into a dense column") {
  std::mt19937_64 rng(1);
  CMatrix grid(1, 6);
  for (int n = 0; n < 6; ++n) grid(0, n) = lorentzian(0.1 * n - 0.2).value;
  const AnalogBfMatrix w = assemble_analog(grid, BeamRole::kRx);
  CHECK(w.entries.cols() == 1);
  CHECK(w.entries.col(0) == grid.row(0).transpose());
  CHECK(w.role == BeamRole::kRx);
}

TEST_CASE("random grids keep the block pattern and values") {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-kPi / 2, kPi / 2);
  const int n_rf = 4;
  const int n_e = 10;
  CMatrix grid(n_rf, n_e);
  for (int i = 0; i < n_rf; ++i) {
    for (int n = 0; n < n_e; ++n) grid(i, n) = lorentzian(u(rng)).value;
  }
  const AnalogBfMatrix w = assemble_analog(grid, BeamRole::kTx);
  for (int i = 0; i < n_rf; ++i) {
    for (int n = 0; n < n_e; ++n) {
      for (int j = 0; j < n_rf; ++j) {
        const cd e = w.entries(i * n_e + n, j);
        if (i == j) {
          CHECK(e == grid(i, n));
        } else {
          CHECK(e == cd(0, 0));
        }
      }
    }
  }
}

TEST_CASE("map_unconstrained examples") {
  CHECK(std::abs(map_unconstrained(kJ, 0.0, 5.0).value - kJ) <= 1e-15);
  CHECK(std::abs(map_unconstrained(-kJ, 0.0, 5.0).value) <= 1e-15);
  CHECK_THROWS_AS(map_unconstrained(cd(1.1, 0.0), 0.0, 1.0), ConfigError);
}

TEST_CASE("map_unconstrained lands on the Lorentzian circle and undoes the guided phase") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-kPi, kPi), ur(0.0, 0.05);
  const double beta = 2 * kPi / (0.8 * kLambda);
  for (int k = 0; k < 10000; ++k) {
    const cd w_tilde = std::polar(1.0, u(rng));
    const double rho = ur(rng);
    const cd w = map_unconstrained(w_tilde, rho, beta).value;
    REQUIRE(lorentzian_circle_error(w) <= 1e-12);
    REQUIRE(std::abs(2.0 * w - kJ - w_tilde * std::polar(1.0, rho * beta)) <= 1e-12);
  }
}

}  // TEST_SUITE
