// mcflab: simulate, analyze, verify and rescale mean curvature flow trajectories.
#include "mcf/pipeline.hpp"
#include "mcf/report.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <sstream>

namespace {

std::set<std::string> split_ids(const std::string& list) {
  std::set<std::string> out;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.insert(item);
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mean curvature flow experiments"};
  app.require_subcommand(1);
  // Global flags may also follow the subcommand; subcommands inherit this.
  app.fallthrough();

  std::string out;
  std::optional<std::uint64_t> seed;
  std::string profile_name = "default";
  app.add_option("--out", out, "Output directory");
  app.add_option("--seed", seed, "Override the scenario seed");
  app.add_option("--tolerance-profile", profile_name, "Tolerance profile")
      ->check(CLI::IsMember({"default", "strict"}));

  std::string scenario_path;
  auto* sim = app.add_subcommand("simulate", "Run the flow of a scenario and store the trajectory");
  sim->add_option("scenario", scenario_path, "Scenario file")->required();

  std::string traj_dir;
  auto* analyze = app.add_subcommand("analyze", "Fit the singular time and rate, monitor blowup");
  analyze->add_option("traj-dir", traj_dir, "Trajectory directory")->required();

  std::string checks;
  auto* verify = app.add_subcommand("verify", "Run the verification checks on a stored trajectory");
  verify->add_option("traj-dir", traj_dir, "Trajectory directory")->required();
  verify->add_option("--checks", checks, "Comma separated check ids");

  int levels = 0;
  auto* rescale = app.add_subcommand("rescale", "Parabolic rescaling at the crossing levels");
  rescale->add_option("traj-dir", traj_dir, "Trajectory directory")->required();
  rescale->add_option("--levels", levels, "Number of levels")->required()->check(CLI::PositiveNumber);

  std::string report_dir;
  auto* report = app.add_subcommand("report", "Summarize the reports in a directory");
  report->add_option("dir", report_dir, "Directory holding analysis/verification/rescale JSON")->required();

  std::string stages = "simulate,analyze,verify,rescale";
  auto* runp = app.add_subcommand("run", "Run several stages on a scenario");
  runp->add_option("scenario", scenario_path, "Scenario file")->required();
  runp->add_option("--stages", stages, "Comma separated stages");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : mcf::kExitRuntimeError;
  }

  try {
    const mcf::ToleranceProfile profile = mcf::tolerance_profile_from_string(profile_name);
    if (sim->parsed() || runp->parsed()) {
      mcf::ScenarioSpec spec = mcf::load_scenario(scenario_path);
      if (seed) spec.seed = *seed;
      mcf::PipelineOptions opts;
      opts.out_dir = out.empty() ? mcf::default_out_dir(spec) : out;
      opts.profile = profile;
      std::set<mcf::Stage> todo{mcf::Stage::Simulate};
      if (runp->parsed()) {
        todo.clear();
        for (const std::string& s : split_ids(stages)) todo.insert(mcf::stage_from_string(s));
      }
      const int code = mcf::run_pipeline(spec, todo, opts);
      std::cout << "wrote " << opts.out_dir << "\n";
      return code;
    }
    const std::string dest = out.empty() ? traj_dir : out;
    if (analyze->parsed()) {
      const int code = mcf::analyze_stage(traj_dir, dest);
      std::cout << "wrote " << dest << "/analysis.json\n";
      return code;
    }
    if (verify->parsed()) {
      const int code = mcf::verify_stage(traj_dir, dest, profile, split_ids(checks));
      std::cout << "wrote " << dest << "/verification.json" << (code == 0 ? "" : " (checks failed)") << "\n";
      return code;
    }
    if (rescale->parsed()) {
      const int code = mcf::rescale_stage(traj_dir, dest, levels);
      std::cout << "wrote " << dest << "/rescale.json\n";
      return code;
    }
    if (report->parsed()) {
      std::cout << mcf::report_stage(report_dir);
      return mcf::kExitPass;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return mcf::kExitRuntimeError;
  }
  return mcf::kExitRuntimeError;
}
