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

#include "fdjcas_cli/commands.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>

namespace fdjcas::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

// Quotes a CSV field only when needed.
std::string field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (const char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

void write_file(const fs::path& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << body;
  if (!out) throw std::runtime_error("write failed for '" + path.string() + "'");
}

void prepare_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create '" + dir.string() + "': " + ec.message());
}

json base_manifest(const std::string& command, const Config& cfg) {
  return {{"tool", "fdjcas"},
          {"version", version_string()},
          {"command", command},
          {"config", config_json(cfg)}};
}

CommandResult finish(json manifest, std::vector<fs::path> outputs, const fs::path& out_dir,
                     int exit_code) {
  json files = json::array();
  for (const auto& p : outputs) files.push_back(p.filename().string());
  manifest["outputs"] = files;
  const fs::path mpath = out_dir / "manifest.json";
  write_file(mpath, manifest.dump(2) + "\n");
  outputs.push_back(mpath);
  return {exit_code, std::move(outputs), std::move(manifest)};
}

double max_or_zero(const std::vector<double>& v) {
  return v.empty() ? 0.0 : *std::max_element(v.begin(), v.end());
}

double mean_or_zero(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  double s = 0.0;
  for (const double x : v) s += x;
  return s / static_cast<double>(v.size());
}

RunRow run_row(double p_dbm, int u, int index, const RunOutcome& o) {
  RunRow r;
  r.p_max_dbm = p_dbm;
  r.u_served = u;
  r.run = index;
  r.seed = o.seed;
  r.ok = o.metrics.has_value();
  r.error = o.error;
  if (!r.ok) return r;
  const RunMetrics& m = *o.metrics;
  r.rmse_m = m.mean_rmse_m();
  r.rmse_served_m = m.mean_rmse_served_m();
  r.sum_rate_bps_hz = m.mean_sum_rate_bps_hz();
  r.sum_rate_no_interference_bps_hz = m.mean_sum_rate_no_interference_bps_hz();
  r.residual_si_pre_d_w = m.mean_residual_si_w();
  r.residual_si_post_d_w = max_or_zero(m.tti_si_post_d_w);
  r.si_violation_fraction = m.si_violation_fraction();
  r.mean_tx_power_w = mean_or_zero(m.tti_tx_power_w);
  for (const auto& b : m.blocks) r.design_failures += b.design_failed ? 1 : 0;
  return r;
}

TrackRow aggregate(double p_dbm, int u, const std::vector<RunRow>& runs) {
  TrackRow t;
  t.p_max_dbm = p_dbm;
  t.u_served = u;
  int ok = 0;
  for (const RunRow& r : runs) {
    ++t.runs;
    if (!r.ok) {
      ++t.failed_runs;
      continue;
    }
    ++ok;
    t.mean_rmse_m += r.rmse_m;
    t.mean_rmse_served_m += r.rmse_served_m;
    t.mean_sum_rate_bps_hz += r.sum_rate_bps_hz;
    t.mean_sum_rate_no_interference_bps_hz += r.sum_rate_no_interference_bps_hz;
    t.mean_residual_si_pre_d_w += r.residual_si_pre_d_w;
    t.max_residual_si_post_d_w = std::max(t.max_residual_si_post_d_w, r.residual_si_post_d_w);
    t.si_violation_fraction += r.si_violation_fraction;
    t.mean_tx_power_w += r.mean_tx_power_w;
    t.design_failures += r.design_failures;
  }
  if (ok > 0) {
    const double n = ok;
    t.mean_rmse_m /= n;
    t.mean_rmse_served_m /= n;
    t.mean_sum_rate_bps_hz /= n;
    t.mean_sum_rate_no_interference_bps_hz /= n;
    t.mean_residual_si_pre_d_w /= n;
    t.si_violation_fraction /= n;
    t.mean_tx_power_w /= n;
  }
  return t;
}

json table_summary(const TrackTable& t) {
  json errors = json::array();
  for (const RunRow& r : t.runs) {
    if (!r.ok) {
      errors.push_back({{"p_max_dbm", r.p_max_dbm},
                        {"u_served", r.u_served},
                        {"run", r.run},
                        {"seed", r.seed},
                        {"error", r.error}});
    }
  }
  return {{"seeds", t.seeds},
          {"point_seconds", t.point_seconds},
          {"failed_runs", t.failed_runs()},
          {"errors", errors}};
}

std::string group_prefix(const std::string& column, const std::vector<std::string>& values,
                         std::size_t row, std::size_t rows_per_group) {
  if (column.empty()) return {};
  return field(values.at(row / rows_per_group)) + ",";
}

}  // namespace

std::string version_string() {
#ifdef FDJCAS_VERSION
  return FDJCAS_VERSION;
#else
  return "unknown";
#endif
}

int TrackTable::failed_runs() const {
  int n = 0;
  for (const auto& r : runs) n += r.ok ? 0 : 1;
  return n;
}

std::vector<FresnelRow> fresnel_table(const Config& cfg) {
  const FresnelSection& f = cfg.fresnel;
  const FresnelForm form = parse_fresnel_form(f.form);
  std::vector<FresnelRow> rows;
  for (const int n_e : f.n_e) {
    ScenarioSection s = cfg.scenario;
    s.n_e = n_e;
    const ScenarioConfig sc = to_scenario(s, cfg.sweep.p_max_dbm.front(), 1);
    const ArrayLayout layout = sc.layout(PanelSide::kTx);
    const double d_ue = sc.d_ue_wavelengths * sc.lambda();
    for (const double r : f.r_m) {
      FresnelRow row{r, n_e, 0.0, 0.0};
      for (const double th : f.theta_deg) {
        const UeGeometry ue{{r, deg2rad(th), deg2rad(f.phi_deg)}, f.l_antennas, d_ue};
        const FresnelErrorStats e = fresnel_error(ue, layout, form);
        row.mean_rel_range_err += e.mean_rel_range_err;
        row.mean_abs_elev_err_deg += rad2deg(e.mean_abs_elev_err_rad);
      }
      row.mean_rel_range_err /= static_cast<double>(f.theta_deg.size());
      row.mean_abs_elev_err_deg /= static_cast<double>(f.theta_deg.size());
      rows.push_back(row);
    }
  }
  return rows;
}

TrackTable track_table(const Config& cfg) {
  TrackTable t;
  const SweepSection& sw = cfg.sweep;
  t.seeds = derive_seeds(cfg.seed, static_cast<std::size_t>(sw.runs));
  for (const double p : sw.p_max_dbm) {
    for (const int u : sw.u_served) {
      const auto t0 = std::chrono::steady_clock::now();
      const Simulator sim(to_scenario(cfg.scenario, p, u));
      const auto outcomes = run_monte_carlo_outcomes(sim, t.seeds, cfg.workers);
      std::vector<RunRow> runs;
      for (std::size_t i = 0; i < outcomes.size(); ++i) {
        runs.push_back(run_row(p, u, static_cast<int>(i), outcomes[i]));
      }
      t.rows.push_back(aggregate(p, u, runs));
      t.runs.insert(t.runs.end(), runs.begin(), runs.end());
      t.point_seconds.push_back(
          std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    }
  }
  return t;
}

std::string fresnel_csv(const std::vector<FresnelRow>& rows) {
  std::string out = "r_m,n_e,mean_rel_range_err,mean_abs_elev_err_deg\n";
  for (const auto& r : rows) {
    out += num(r.r_m) + "," + std::to_string(r.n_e) + "," + num(r.mean_rel_range_err) + "," +
           num(r.mean_abs_elev_err_deg) + "\n";
  }
  return out;
}

std::string track_csv(const std::vector<TrackRow>& rows, const std::string& group_column,
                      const std::vector<std::string>& group_values) {
  std::string out = group_column.empty() ? "" : field(group_column) + ",";
  out +=
      "p_max_dbm,u_served,runs,failed_runs,mean_rmse_m,mean_rmse_served_m,mean_sum_rate_bps_hz,"
      "mean_sum_rate_no_interference_bps_hz,mean_residual_si_pre_d_w,max_residual_si_post_d_w,"
      "si_violation_fraction,mean_tx_power_w,design_failures\n";
  const std::size_t per_group =
      group_values.empty() ? rows.size() : rows.size() / group_values.size();
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const TrackRow& r = rows[i];
    out += group_prefix(group_column, group_values, i, per_group) + num(r.p_max_dbm) + "," +
           std::to_string(r.u_served) + "," + std::to_string(r.runs) + "," +
           std::to_string(r.failed_runs) + "," + num(r.mean_rmse_m) + "," +
           num(r.mean_rmse_served_m) + "," + num(r.mean_sum_rate_bps_hz) + "," +
           num(r.mean_sum_rate_no_interference_bps_hz) + "," + num(r.mean_residual_si_pre_d_w) +
           "," + num(r.max_residual_si_post_d_w) + "," + num(r.si_violation_fraction) + "," +
           num(r.mean_tx_power_w) + "," + std::to_string(r.design_failures) + "\n";
  }
  return out;
}

std::string runs_csv(const std::vector<RunRow>& runs, const std::string& group_column,
                     const std::vector<std::string>& group_values) {
  std::string out = group_column.empty() ? "" : field(group_column) + ",";
  out +=
      "p_max_dbm,u_served,run,seed,status,rmse_m,rmse_served_m,sum_rate_bps_hz,"
      "sum_rate_no_interference_bps_hz,residual_si_pre_d_w,residual_si_post_d_w,"
      "si_violation_fraction,mean_tx_power_w,design_failures,error\n";
  const std::size_t per_group =
      group_values.empty() ? runs.size() : runs.size() / group_values.size();
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const RunRow& r = runs[i];
    out += group_prefix(group_column, group_values, i, per_group) + num(r.p_max_dbm) + "," +
           std::to_string(r.u_served) + "," + std::to_string(r.run) + "," +
           std::to_string(r.seed) + "," + (r.ok ? "ok" : "failed") + "," + num(r.rmse_m) + "," +
           num(r.rmse_served_m) + "," + num(r.sum_rate_bps_hz) + "," +
           num(r.sum_rate_no_interference_bps_hz) + "," + num(r.residual_si_pre_d_w) + "," +
           num(r.residual_si_post_d_w) + "," + num(r.si_violation_fraction) + "," +
           num(r.mean_tx_power_w) + "," + std::to_string(r.design_failures) + "," +
           field(r.error) + "\n";
  }
  return out;
}

CommandResult cmd_validate_fresnel(const Config& cfg, const fs::path& out_dir) {
  prepare_dir(out_dir);
  const auto t0 = std::chrono::steady_clock::now();
  const auto rows = fresnel_table(cfg);
  const fs::path csv = out_dir / "fresnel_errors.csv";
  write_file(csv, fresnel_csv(rows));
  json m = base_manifest("validate-fresnel", cfg);
  m["seeds"] = json::array();
  m["wall_seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return finish(std::move(m), {csv}, out_dir, kExitOk);
}

CommandResult cmd_track(const Config& cfg, const fs::path& out_dir) {
  prepare_dir(out_dir);
  const auto t0 = std::chrono::steady_clock::now();
  const TrackTable t = track_table(cfg);
  const fs::path csv = out_dir / "track.csv";
  const fs::path runs = out_dir / "track_runs.csv";
  write_file(csv, track_csv(t.rows));
  write_file(runs, runs_csv(t.runs));
  json m = base_manifest("track", cfg);
  m.update(table_summary(t));
  m["wall_seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return finish(std::move(m), {csv, runs}, out_dir, t.failed_runs() > 0 ? kExitRuntime : kExitOk);
}

CommandResult cmd_sweep(const Config& cfg, const std::string& path,
                        const std::vector<json>& values, const fs::path& out_dir) {
  if (values.empty()) throw ConfigError("sweep: no values given");
  // Resolve every value before running anything, so a bad value fails fast.
  std::vector<Config> configs;
  std::vector<std::string> labels;
  for (const json& v : values) {
    configs.push_back(with_value(cfg, path, v));
    labels.push_back(v.is_string() ? v.get<std::string>() : v.dump());
  }
  prepare_dir(out_dir);
  const auto t0 = std::chrono::steady_clock::now();
  std::vector<TrackRow> rows;
  std::vector<RunRow> runs;
  json groups = json::array();
  int failed = 0;
  for (std::size_t g = 0; g < configs.size(); ++g) {
    const TrackTable t = track_table(configs[g]);
    rows.insert(rows.end(), t.rows.begin(), t.rows.end());
    runs.insert(runs.end(), t.runs.begin(), t.runs.end());
    failed += t.failed_runs();
    json entry = table_summary(t);
    entry["value"] = values[g];
    entry["config"] = config_json(configs[g]);
    groups.push_back(std::move(entry));
  }
  const fs::path csv = out_dir / "sweep.csv";
  const fs::path runs_path = out_dir / "sweep_runs.csv";
  write_file(csv, track_csv(rows, path, labels));
  write_file(runs_path, runs_csv(runs, path, labels));
  json m = base_manifest("sweep", cfg);
  m["parameter"] = path;
  m["values"] = values;
  m["groups"] = groups;
  m["failed_runs"] = failed;
  m["wall_seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return finish(std::move(m), {csv, runs_path}, out_dir, failed > 0 ? kExitRuntime : kExitOk);
}

}  // namespace fdjcas::cli
