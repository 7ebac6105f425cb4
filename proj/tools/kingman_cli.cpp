//
// Copyright 2026 The kingman-condensation Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

// kingman: command line front end.
//
//   kingman <analyze|simulate|verify|sweep|genfun|conjecture>
//           --config <path> --out <dir> [--horizon N] [--seed S]
//
// Exit codes: 0 ok, 1 config or model error, 2 numeric failure,
// 3 property violation.

#include <cstdint>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "kingman/kingman.hpp"

namespace {

using Runner = std::function<kingman::CommandResult(const kingman::RunConfig&, const std::filesystem::path&)>;

int code(kingman::ExitCode c) { return static_cast<int>(c); }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Kingman mutation-selection recursion with periodic environments", "kingman"};
  app.set_version_flag("--version", std::string(kingman::kArtifactName) + " " + kingman::kArtifactVersion);
  app.require_subcommand(1);

  const std::map<std::string, std::pair<std::string, Runner>> commands = {
      {"analyze", {"critical parameter, regime and limit laws (analyze.json)", kingman::run_analyze}},
      {"simulate", {"iterate the recursion (trajectory.csv)", kingman::run_simulate}},
      {"verify", {"TV gaps of the simulation to the limit laws (verify.csv, verify.json)", kingman::run_verify}},
      {"sweep", {"spectral quantities on a z grid (sweep.csv)", kingman::run_sweep}},
      {"genfun", {"weight generating functions, series vs closed form (genfun.csv)", kingman::run_genfun}},
      {"conjecture", {"periodic selection experiment (conjecture.json)", kingman::run_conjecture}},
  };

  std::string config_path;
  std::string out_dir;
  std::optional<std::size_t> horizon;
  std::optional<std::uint64_t> seed;
  std::map<std::string, CLI::App*> subs;
  for (const auto& [name, entry] : commands) {
    CLI::App* sub = app.add_subcommand(name, entry.first);
    sub->add_option("--config", config_path, "run configuration (JSON)")->required();
    sub->add_option("--out", out_dir, "output directory")->required();
    sub->add_option("--horizon", horizon, "number of generations");
    sub->add_option("--seed", seed, "seed recorded with the run");
    subs[name] = sub;
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return code(kingman::ExitCode::config);
  }

  try {
    kingman::RunConfig cfg = kingman::load_config(config_path);
    if (horizon) cfg.params.horizon = *horizon;
    if (seed) cfg.params.seed = *seed;
    kingman::refresh(cfg);
    for (const auto& [name, sub] : subs) {
      if (!sub->parsed()) continue;
      const kingman::CommandResult r = commands.at(name).second(cfg, out_dir);
      for (const auto& f : r.files) std::cout << f.string() << '\n';
      std::cout << name << ": " << r.summary << '\n';
      return code(r.code);
    }
  } catch (const kingman::ModelError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return code(kingman::ExitCode::config);
  } catch (const kingman::NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << '\n';
    return code(kingman::ExitCode::numeric);
  } catch (const kingman::PropertyViolation& e) {
    std::cerr << "property violation: " << e.what() << '\n';
    return code(kingman::ExitCode::property);
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return code(kingman::ExitCode::config);
  }
  return code(kingman::ExitCode::config);
}
