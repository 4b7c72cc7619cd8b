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

#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace fdjcas {

using cd = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;

inline constexpr double kPi = std::numbers::pi;
inline constexpr cd kJ{0.0, 1.0};
inline constexpr double kSpeedOfLight = 299792458.0;

/// Raised for invalid configuration or contract violations at a module boundary.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when a matrix needed for a solve is singular or indefinite.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Counters for recoverable numerical events. Functions that can clamp, wrap
// or skip take an optional pointer to one of these.
struct Diagnostics {
  std::size_t arcsin_clamps = 0;
  std::size_t phase_wraps = 0;
  std::size_t pastd_skips = 0;
  std::size_t zero_steering = 0;
  std::size_t peak_pads = 0;
  std::size_t empty_target_sets = 0;

  Diagnostics& operator+=(const Diagnostics& o) {
    arcsin_clamps += o.arcsin_clamps;
    phase_wraps += o.phase_wraps;
    pastd_skips += o.pastd_skips;
    zero_steering += o.zero_steering;
    peak_pads += o.peak_pads;
    empty_target_sets += o.empty_target_sets;
    return *this;
  }
};

inline double deg2rad(double deg) { return deg * kPi / 180.0; }
inline double rad2deg(double rad) { return rad * 180.0 / kPi; }

inline double dbm_to_watt(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }
inline double watt_to_dbm(double w) { return 10.0 * std::log10(w) + 30.0; }

/// Thermal noise power -174 dBm/Hz integrated over `bandwidth_hz`, in dBm.
inline double thermal_noise_dbm(double bandwidth_hz) {
  return -174.0 + 10.0 * std::log10(bandwidth_hz);
}

}  // namespace fdjcas
