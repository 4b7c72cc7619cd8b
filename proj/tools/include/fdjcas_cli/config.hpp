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

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>  // vendored nlohmann/json 3.11

#include "fdjcas/simulator.hpp"

namespace fdjcas::cli {

// Everything here is in external units: meters, degrees, dBm. Conversion to
// the simulator's internal units happens in to_scenario() only, so a config
// survives parse -> serialize -> parse bit for bit.

struct SearchSection {
  double r_min_m = 1.0;
  double r_max_m = 20.0;
  double theta_min_deg = 0.0;
  double theta_max_deg = 90.0;
  int coarse_r = 64;
  int coarse_theta = 64;
  int refine = 16;
  double ridge_halfwidth_cells = 2.0;
  double phi_deg = 90.0;
};

struct PlacementSection {
  double r_min_m = 1.0;
  double r_max_m = 20.0;
  double theta_min_deg = 0.0;
  double theta_max_deg = 90.0;
};

struct MobilitySection {
  double mu_r_m = 2.0;
  double mu_theta_deg = 2.0;
  double d_r_m = 2.0;
  double d_theta_deg = 5.0;
  int reset_period_blocks = 10;
};

struct ScenarioSection {
  double carrier_hz = 120e9;
  double bandwidth_hz = 150e3;
  int n_rf = 4;
  int n_e = 512;
  double d_e_wavelengths = 0.2;
  double d_rf_wavelengths = 0.5;
  double d_pl_m = 0.04;
  int k_targets = 3;
  int l_antennas = 1;  // U*L <= n_rf must hold for every swept U
  double d_ue_wavelengths = 0.5;
  double gamma_dbm = 30.0;
  int t_init = 200;
  int t_track = 100;
  int n_blocks = 100;
  double kappa_abs_per_m = 0.0033;
  double b_gain = 2.0;
  double strip_alpha_per_m = 0.6;
  double guided_ratio = 0.8;
  double forget = 0.98;
  int reorth_period = 50;
  int codebook_bits = 10;
  double reflectivity_magnitude = 1.0;
  double si_estimate_error = 0.0;
  std::string fresnel_form = "taylor";       // taylor | printed
  bool estimate_with_fresnel = true;
  std::string initial_beam = "wide_random";  // wide_random | all_zero
  SearchSection search;
  PlacementSection placement;
  MobilitySection mobility;
};

struct SweepSection {
  std::vector<double> p_max_dbm{30.0, 37.5, 45.0, 52.5, 60.0};
  std::vector<int> u_served{1, 2, 3};
  int runs = 20;
};

struct FresnelSection {
  std::vector<int> n_e{128, 512};
  std::vector<double> r_m{1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14, 15, 16, 17, 18, 19, 20};
  int l_antennas = 2;
  std::vector<double> theta_deg{45.0};
  double phi_deg = 90.0;
  std::string form = "taylor";
};

struct Config {
  std::uint64_t seed = 1;
  int workers = 1;
  ScenarioSection scenario;
  SweepSection sweep;
  FresnelSection fresnel;
};

/// Parses and checks a config document. Missing keys keep their defaults;
/// unknown keys and type mismatches throw ConfigError naming the key.
Config parse_config(const nlohmann::json& doc);
Config parse_config_text(const std::string& text);
Config load_config(const std::string& path);
std::string serialize_config(const Config& c);
nlohmann::json config_json(const Config& c);

/// Dotted paths of every settable leaf, e.g. "scenario.search.coarse_r".
std::vector<std::string> leaf_paths();

/// Copy of `c` with the leaf at `path` replaced by `value` (re-validated).
Config with_value(const Config& c, const std::string& path, const nlohmann::json& value);

/// Internal-unit scenario for one sweep point.
ScenarioConfig to_scenario(const ScenarioSection& s, double p_max_dbm, int u_served);

FresnelForm parse_fresnel_form(const std::string& name);

}  // namespace fdjcas::cli
