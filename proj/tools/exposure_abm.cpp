// Copyright 2026 The Exposure ABM Authors
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


// exposure_abm: command-line entry point.

#include <cstdio>
#include <exception>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "exposure_abm/cli.hpp"

namespace {

namespace cli = exposure_abm::cli;

int Report(const std::string& command, std::string_view kind, std::string_view message,
           int code) {
  std::cerr << cli::ErrorReport(command, kind, message, code).dump() << std::endl;
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Agent-based model of health loss from PM10 exposure"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(cli::kEngineVersion));

  cli::Context ctx;
  std::string out_dir = ".";
  unsigned jobs = 1;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--out-dir,-o", out_dir, "Directory for all outputs")->capture_default_str();
    sub->add_option("--jobs,-j", jobs, "Worker threads")
        ->check(CLI::Range(1u, 1024u))
        ->capture_default_str();
  };

  std::string in_csv, district;
  auto* impute = app.add_subcommand("impute", "Fill PM10 gaps and aggregate to ticks");
  impute->add_option("input", in_csv, "Hourly CSV (timestamp,pm10)")->required();
  impute->add_option("--district", district, "District id (default: file stem)");
  add_common(impute);

  std::string config;
  auto* build_world = app.add_subcommand("build-world", "Build and summarise district worlds");
  build_world->add_option("config", config, "Run config JSON")->required();
  add_common(build_world);

  auto* synth_pop = app.add_subcommand("synth-pop", "Synthesise the agent population");
  synth_pop->add_option("config", config, "Run config JSON")->required();
  add_common(synth_pop);

  cli::RunOptions run_opt;
  auto* run = app.add_subcommand("run", "Run one simulation");
  run->add_option("config", config, "Run config JSON")->required();
  run->add_flag("--snapshot", run_opt.snapshot, "Also write final agent states");
  add_common(run);

  std::string spec;
  cli::ExperimentOptions exp_opt;
  auto add_replicates = [&](CLI::App* sub) {
    sub->add_option("--replicates", exp_opt.replicates, "Replicates per cell")
        ->check(CLI::PositiveNumber);
  };
  auto* sweep = app.add_subcommand("sweep", "Sensitivity sweep over alpha and road multiplier");
  sweep->add_option("spec", spec, "Sweep spec JSON")->required();
  add_replicates(sweep);
  add_common(sweep);

  auto* scenarios = app.add_subcommand("scenarios", "Pollution x adaptive-capacity matrix");
  scenarios->add_option("config", config, "Run config JSON")->required();
  add_replicates(scenarios);
  add_common(scenarios);

  std::string observed;
  auto* calibrate = app.add_subcommand("calibrate", "Grid-search calibration");
  calibrate->add_option("spec", spec, "Calibration spec JSON")->required();
  calibrate->add_option("observed", observed, "Observed patients CSV (age_bin,count)")
      ->required();
  add_replicates(calibrate);
  add_common(calibrate);

  std::string plot_csv, plot_name;
  auto* plot = app.add_subcommand("plot", "Render a result CSV as SVG");
  plot->add_option("csv", plot_csv, "trajectory, sweep or scenarios CSV")->required();
  plot->add_option("--name", plot_name, "Output file name (default: <csv stem>.svg)");
  add_common(plot);

  exposure_abm::fixtures::FixtureOptions fx;
  auto* fixtures = app.add_subcommand("fixtures", "Synthetic input fixtures");
  fixtures->require_subcommand(1);
  auto* generate = fixtures->add_subcommand("generate", "Write a synthetic two-district fixture");
  generate->add_option("--grid", fx.grid_size, "Cells per side")
      ->check(CLI::Range(10, 100))
      ->capture_default_str();
  generate->add_option("--agents", fx.target_agents, "Target agent count")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  generate->add_option("--seed", fx.seed, "Generator seed")->capture_default_str();
  generate->add_flag("!--no-observed", fx.write_observed,
                     "Skip the model-generated observed patients file");
  add_common(generate);

  std::string command = "exposure_abm";
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return Report(command, "usage", e.what(), cli::kExitConfig);
  }

  for (auto* sub : app.get_subcommands()) command = sub->get_name();
  if (generate->parsed()) command = "fixtures generate";

  try {
    ctx.out_dir = out_dir;
    ctx.jobs = jobs;
    ctx.seed_override = cli::SeedFromEnvironment();
    if (impute->parsed()) cli::CmdImpute(ctx, in_csv, district);
    else if (build_world->parsed()) cli::CmdBuildWorld(ctx, config);
    else if (synth_pop->parsed()) cli::CmdSynthPop(ctx, config);
    else if (run->parsed()) cli::CmdRun(ctx, config, run_opt);
    else if (sweep->parsed()) cli::CmdSweep(ctx, spec, exp_opt);
    else if (scenarios->parsed()) cli::CmdScenarios(ctx, config, exp_opt);
    else if (calibrate->parsed()) cli::CmdCalibrate(ctx, spec, observed, exp_opt);
    else if (plot->parsed()) cli::CmdPlot(ctx, plot_csv, plot_name);
    else if (generate->parsed()) cli::CmdFixturesGenerate(ctx, fx);
  } catch (const exposure_abm::Error& e) {
    return Report(command, exposure_abm::ToString(e.kind()), e.what(),
                  cli::ExitCodeFor(e.kind()));
  } catch (const std::exception& e) {
    return Report(command, "runtime", e.what(), cli::kExitRuntime);
  }
  return cli::kExitOk;
}
