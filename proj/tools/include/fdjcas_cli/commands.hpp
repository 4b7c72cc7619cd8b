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
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>  // vendored nlohmann/json 3.11

#include "fdjcas_cli/config.hpp"

namespace fdjcas::cli {

struct FresnelRow {
  double r_m = 0.0;
  int n_e = 0;
  double mean_rel_range_err = 0.0;
  double mean_abs_elev_err_deg = 0.0;
};

/// Error table for every (n_e, r) pair, n_e-major, averaged over the
/// configured theta list and over all UE antennas, RF chains and elements.
std::vector<FresnelRow> fresnel_table(const Config& cfg);

struct RunRow {
  double p_max_dbm = 0.0;
  int u_served = 0;
  int run = 0;
  std::uint64_t seed = 0;
  bool ok = false;
  std::string error;
  double rmse_m = 0.0;
  double rmse_served_m = 0.0;
  double sum_rate_bps_hz = 0.0;
  double sum_rate_no_interference_bps_hz = 0.0;
  double residual_si_pre_d_w = 0.0;
  double residual_si_post_d_w = 0.0;
  double si_violation_fraction = 0.0;
  double mean_tx_power_w = 0.0;
  int design_failures = 0;
};

struct TrackRow {
  double p_max_dbm = 0.0;
  int u_served = 0;
  int runs = 0;
  int failed_runs = 0;
  double mean_rmse_m = 0.0;
  double mean_rmse_served_m = 0.0;
  double mean_sum_rate_bps_hz = 0.0;
  double mean_sum_rate_no_interference_bps_hz = 0.0;
  double mean_residual_si_pre_d_w = 0.0;
  double max_residual_si_post_d_w = 0.0;
  double si_violation_fraction = 0.0;
  double mean_tx_power_w = 0.0;
  int design_failures = 0;
};

struct TrackTable {
  std::vector<TrackRow> rows;  // p-major, then u, in config order
  std::vector<RunRow> runs;
  std::vector<std::uint64_t> seeds;
  std::vector<double> point_seconds;  // wall clock per row
  [[nodiscard]] int failed_runs() const;
};

/// All (P_max, U) points of the sweep section. Every point reuses the same
/// run seeds, so curves compare like with like.
TrackTable track_table(const Config& cfg);

/// Deterministic CSV bodies (fixed column order and number format).
std::string fresnel_csv(const std::vector<FresnelRow>& rows);
std::string track_csv(const std::vector<TrackRow>& rows, const std::string& group_column = {},
                      const std::vector<std::string>& group_values = {});
std::string runs_csv(const std::vector<RunRow>& runs, const std::string& group_column = {},
                     const std::vector<std::string>& group_values = {});

enum ExitCode : int { kExitOk = 0, kExitConfig = 1, kExitRuntime = 2 };

struct CommandResult {
  int exit_code = kExitOk;
  std::vector<std::filesystem::path> outputs;  // data files, then the manifest
  nlohmann::json manifest;
};

CommandResult cmd_validate_fresnel(const Config& cfg, const std::filesystem::path& out_dir);
CommandResult cmd_track(const Config& cfg, const std::filesystem::path& out_dir);
/// One track table per value of the leaf at `path`, stacked with a leading
/// column named after the path.
CommandResult cmd_sweep(const Config& cfg, const std::string& path,
                        const std::vector<nlohmann::json>& values,
                        const std::filesystem::path& out_dir);

std::string version_string();

}  // namespace fdjcas::cli
