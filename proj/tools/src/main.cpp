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

#include <cstdint>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fdjcas_cli/commands.hpp"

namespace {

using fdjcas::cli::CommandResult;
using fdjcas::cli::Config;

// "0.95,0.98,1.0" -> JSON scalars; tokens that are not JSON become strings.
std::vector<nlohmann::json> parse_values(const std::string& list) {
  std::vector<nlohmann::json> out;
  std::stringstream ss(list);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (tok.empty()) continue;
    const auto parsed = nlohmann::json::parse(tok, nullptr, false);
    out.push_back(parsed.is_discarded() ? nlohmann::json(tok) : parsed);
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fdjcas: full-duplex DMA joint communications and sensing simulator"};
  app.require_subcommand(1);
  app.set_version_flag("--version", fdjcas::cli::version_string());

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir = "out";
  std::optional<int> workers;
  const auto common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "JSON config file (defaults when omitted)");
    sub->add_option("--seed", seed, "Base seed (overrides config 'seed')");
    sub->add_option("--out", out_dir, "Output directory")->capture_default_str();
    sub->add_option("--workers", workers, "Parallel Monte-Carlo runs (overrides config)")
        ->check(CLI::PositiveNumber);
  };

  auto* fresnel = app.add_subcommand("validate-fresnel", "Fresnel approximation error table");
  auto* track = app.add_subcommand("track", "Tracking and sum rate over the P_max x U sweep");
  auto* sweep = app.add_subcommand("sweep", "Repeat 'track' for each value of one config leaf");
  common(fresnel);
  common(track);
  common(sweep);
  std::string param;
  std::string values;
  sweep->add_option("--param", param, "Dotted config path, e.g. scenario.forget")->required();
  sweep->add_option("--values", values, "Comma-separated values, e.g. 0.95,0.98")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : fdjcas::cli::kExitConfig;
  }

  Config cfg;
  try {
    if (!config_path.empty()) cfg = fdjcas::cli::load_config(config_path);
    if (seed) cfg.seed = *seed;
    if (workers) cfg.workers = *workers;
  } catch (const fdjcas::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return fdjcas::cli::kExitConfig;
  }

  try {
    CommandResult r;
    if (fresnel->parsed()) {
      r = fdjcas::cli::cmd_validate_fresnel(cfg, out_dir);
    } else if (track->parsed()) {
      r = fdjcas::cli::cmd_track(cfg, out_dir);
    } else {
      r = fdjcas::cli::cmd_sweep(cfg, param, parse_values(values), out_dir);
    }
    for (const auto& p : r.outputs) std::cout << p.string() << "\n";
    if (r.exit_code != fdjcas::cli::kExitOk) {
      std::cerr << "warning: " << r.manifest.value("failed_runs", 0)
                << " run(s) failed; see manifest.json\n";
    }
    return r.exit_code;
  } catch (const fdjcas::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return fdjcas::cli::kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return fdjcas::cli::kExitRuntime;
  }
}
