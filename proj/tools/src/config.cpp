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

#include "fdjcas_cli/config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace fdjcas::cli {

NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(SearchSection, r_min_m, r_max_m, theta_min_deg,
                                                theta_max_deg, coarse_r, coarse_theta, refine,
                                                ridge_halfwidth_cells, phi_deg)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(PlacementSection, r_min_m, r_max_m, theta_min_deg,
                                                theta_max_deg)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(MobilitySection, mu_r_m, mu_theta_deg, d_r_m,
                                                d_theta_deg, reset_period_blocks)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(
    ScenarioSection, carrier_hz, bandwidth_hz, n_rf, n_e, d_e_wavelengths, d_rf_wavelengths,
    d_pl_m, k_targets, l_antennas, d_ue_wavelengths, gamma_dbm, t_init, t_track, n_blocks,
    kappa_abs_per_m, b_gain, strip_alpha_per_m, guided_ratio, forget, reorth_period,
    codebook_bits, reflectivity_magnitude, si_estimate_error, fresnel_form,
    estimate_with_fresnel, initial_beam, search, placement, mobility)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(SweepSection, p_max_dbm, u_served, runs)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(FresnelSection, n_e, r_m, l_antennas, theta_deg,
                                                phi_deg, form)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(Config, seed, workers, scenario, sweep, fresnel)

namespace {

using nlohmann::json;

const json& reference() {
  static const json ref = Config{};
  return ref;
}

std::string join(const std::vector<std::string>& v) {
  std::string out;
  for (const auto& s : v) out += (out.empty() ? "" : ", ") + s;
  return out;
}

bool same_kind(const json& ref, const json& got) {
  if (ref.is_boolean()) return got.is_boolean();
  if (ref.is_number_integer()) return got.is_number_integer();
  if (ref.is_number()) return got.is_number();
  if (ref.is_string()) return got.is_string();
  if (ref.is_object()) return got.is_object();
  if (ref.is_array()) {
    if (!got.is_array()) return false;
    if (ref.empty()) return true;
    for (const auto& e : got) {
      if (!same_kind(ref.front(), e)) return false;
    }
    return true;
  }
  return false;
}

void check_keys(const json& ref, const json& got, const std::string& prefix) {
  if (!got.is_object()) throw ConfigError("config: '" + prefix + "' must be an object");
  for (auto it = got.begin(); it != got.end(); ++it) {
    const std::string path = prefix.empty() ? it.key() : prefix + "." + it.key();
    if (!ref.contains(it.key())) {
      std::vector<std::string> keys;
      for (auto r = ref.begin(); r != ref.end(); ++r) keys.push_back(r.key());
      throw ConfigError("config: unknown key '" + path + "' (expected one of: " + join(keys) +
                        ")");
    }
    const json& r = ref.at(it.key());
    if (!same_kind(r, it.value())) {
      throw ConfigError("config: '" + path + "' has the wrong type (expected " +
                        std::string(r.is_number_integer() ? "integer" : r.type_name()) + ")");
    }
    if (r.is_object()) check_keys(r, it.value(), path);
  }
}

void collect_leaves(const json& j, const std::string& prefix, std::vector<std::string>& out) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string path = prefix.empty() ? it.key() : prefix + "." + it.key();
    if (it.value().is_object()) {
      collect_leaves(it.value(), path, out);
    } else {
      out.push_back(path);
    }
  }
}

void validate(const Config& c) {
  if (c.workers < 1) throw ConfigError("config: workers must be >= 1");
  const SweepSection& sw = c.sweep;
  if (sw.p_max_dbm.empty()) throw ConfigError("config: sweep.p_max_dbm is empty");
  if (sw.u_served.empty()) throw ConfigError("config: sweep.u_served is empty");
  if (sw.runs < 1) throw ConfigError("config: sweep.runs must be >= 1");
  for (const int u : sw.u_served) {
    to_scenario(c.scenario, sw.p_max_dbm.front(), u).validate();
  }
  const FresnelSection& f = c.fresnel;
  if (f.n_e.empty() || f.r_m.empty() || f.theta_deg.empty()) {
    throw ConfigError("config: fresnel.n_e, fresnel.r_m and fresnel.theta_deg must be non-empty");
  }
  for (const int n : f.n_e) {
    if (n < 1) throw ConfigError("config: fresnel.n_e entries must be >= 1");
  }
  for (const double r : f.r_m) {
    if (!(r > 0.0)) throw ConfigError("config: fresnel.r_m entries must be positive");
  }
  if (f.l_antennas < 1) throw ConfigError("config: fresnel.l_antennas must be >= 1");
  parse_fresnel_form(f.form);
}

}  // namespace

FresnelForm parse_fresnel_form(const std::string& name) {
  if (name == "taylor") return FresnelForm::kTaylor;
  if (name == "printed") return FresnelForm::kPrinted;
  throw ConfigError("config: unknown Fresnel form '" + name + "' (expected taylor or printed)");
}

ScenarioConfig to_scenario(const ScenarioSection& s, double p_max_dbm, int u_served) {
  ScenarioConfig c;
  c.carrier_hz = s.carrier_hz;
  c.bandwidth_hz = s.bandwidth_hz;
  c.n_rf = s.n_rf;
  c.n_e = s.n_e;
  c.d_e_wavelengths = s.d_e_wavelengths;
  c.d_rf_wavelengths = s.d_rf_wavelengths;
  c.d_pl = s.d_pl_m;
  c.k_targets = s.k_targets;
  c.u_served = u_served;
  c.l_antennas = s.l_antennas;
  c.d_ue_wavelengths = s.d_ue_wavelengths;
  c.p_max_w = dbm_to_watt(p_max_dbm);
  c.gamma_w = dbm_to_watt(s.gamma_dbm);
  c.t_init = s.t_init;
  c.t_track = s.t_track;
  c.n_blocks = s.n_blocks;
  c.kappa_abs = s.kappa_abs_per_m;
  c.b_gain = s.b_gain;
  c.strip_alpha = s.strip_alpha_per_m;
  c.guided_ratio = s.guided_ratio;
  c.forget = s.forget;
  c.reorth_period = s.reorth_period;
  c.codebook_bits = s.codebook_bits;
  c.reflectivity_magnitude = s.reflectivity_magnitude;
  c.si_estimate_error = s.si_estimate_error;
  c.fresnel_form = parse_fresnel_form(s.fresnel_form);
  c.estimate_with_fresnel = s.estimate_with_fresnel;
  if (s.initial_beam == "wide_random") {
    c.initial_beam = ScenarioConfig::InitialBeam::kWideRandom;
  } else if (s.initial_beam == "all_zero") {
    c.initial_beam = ScenarioConfig::InitialBeam::kAllZero;
  } else {
    throw ConfigError("config: unknown initial_beam '" + s.initial_beam +
                      "' (expected wide_random or all_zero)");
  }

  c.search.r_min = s.search.r_min_m;
  c.search.r_max = s.search.r_max_m;
  c.search.theta_min = deg2rad(s.search.theta_min_deg);
  c.search.theta_max = deg2rad(s.search.theta_max_deg);
  c.search.coarse_r = s.search.coarse_r;
  c.search.coarse_theta = s.search.coarse_theta;
  c.search.refine = s.search.refine;
  c.search.ridge_halfwidth = s.search.ridge_halfwidth_cells;
  c.search.phi = deg2rad(s.search.phi_deg);

  c.place_r_min = s.placement.r_min_m;
  c.place_r_max = s.placement.r_max_m;
  c.place_theta_min = deg2rad(s.placement.theta_min_deg);
  c.place_theta_max = deg2rad(s.placement.theta_max_deg);

  c.mobility.mu_r = s.mobility.mu_r_m;
  c.mobility.mu_theta = deg2rad(s.mobility.mu_theta_deg);
  c.mobility.d_r = s.mobility.d_r_m;
  c.mobility.d_theta = deg2rad(s.mobility.d_theta_deg);
  c.mobility.reset_period_blocks = s.mobility.reset_period_blocks;
  return c;
}

Config parse_config(const nlohmann::json& doc) {
  check_keys(reference(), doc, "");
  Config c;
  try {
    c = doc.get<Config>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  validate(c);
  return c;
}

Config parse_config_text(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("config: not valid JSON: ") + e.what());
  }
  return parse_config(doc);
}

Config load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

nlohmann::json config_json(const Config& c) { return c; }

std::string serialize_config(const Config& c) { return nlohmann::json(c).dump(2) + "\n"; }

std::vector<std::string> leaf_paths() {
  std::vector<std::string> out;
  collect_leaves(reference(), "", out);
  return out;
}

Config with_value(const Config& c, const std::string& path, const nlohmann::json& value) {
  nlohmann::json doc = c;
  const auto pointer = nlohmann::json::json_pointer("/" + [&] {
    std::string p = path;
    for (auto& ch : p) {
      if (ch == '.') ch = '/';
    }
    return p;
  }());
  const auto paths = leaf_paths();
  if (path.empty() || std::find(paths.begin(), paths.end(), path) == paths.end()) {
    throw ConfigError("config: '" + path + "' is not a settable path (valid: " + join(paths) + ")");
  }
  doc[pointer] = value;
  return parse_config(doc);
}

}  // namespace fdjcas::cli
