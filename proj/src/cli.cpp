#include <iostream>

#include "CLI11.hpp"
#include "gradflow/error.hpp"
#include "gradflow/experiment.hpp"

namespace gradflow::experiment {

namespace {

constexpr int kExitPass = 0;
constexpr int kExitAssertion = 1;
constexpr int kExitUsage = 2;
constexpr int kExitRuntime = 3;

int execute(ExperimentConfig config, const std::string& out_dir, std::optional<std::uint64_t> seed) {
  if (!out_dir.empty()) config.out_dir = out_dir;
  if (seed) config.seed = *seed;
  const Report report = run(config);
  for (const auto& r : report.json["runs"]) {
    for (const auto& a : r["analyses"]) {
      for (const auto& s : a["assertions"]) {
        std::cout << (s["passed"].get<bool>() ? "PASS " : "FAIL ") << report.id;
        if (!r["id"].get<std::string>().empty()) std::cout << "/" << r["id"].get<std::string>();
        std::cout << " " << a["label"].get<std::string>() << "." << s["name"].get<std::string>()
                  << " measured=" << s["measured"].dump() << "\n";
      }
    }
  }
  for (const auto& t : report.json["timings"]["runs"])
    if (t.contains("within_budget"))
      std::cout << (t["within_budget"].get<bool>() ? "PASS " : "FAIL ") << report.id << " runtime "
                << t["seconds"].get<double>() << "s budget=" << t["budget_seconds"].get<double>() << "s\n";
  std::cout << report.id << ": " << (report.assertions - report.failed) << "/" << report.assertions
            << " assertions passed";
  if (!config.out_dir.empty()) std::cout << " (artifacts in " << config.out_dir << ")";
  std::cout << "\n";
  return report.passed() ? kExitPass : kExitAssertion;
}

}  // namespace

int cli_main(int argc, char** argv) {
  CLI::App app{"Galerkin gradient-flow experiments: run configs or pinned presets and write CSV/JSON reports."};
  app.require_subcommand(1);

  std::string config_path, out_dir, preset_name;
  std::uint64_t seed_value = 0;

  auto* run_cmd = app.add_subcommand("run", "Run an experiment config file");
  run_cmd->add_option("--config", config_path, "Path of the JSON experiment config")->required();
  run_cmd->add_option("--out", out_dir, "Output directory (overrides output.dir)");
  auto* seed_opt = run_cmd->add_option("--seed", seed_value, "Random seed (overrides seed)");

  auto* preset_cmd = app.add_subcommand("preset", "Run a named preset");
  preset_cmd->add_option("name", preset_name, "Preset name (see list-presets)")->required();
  preset_cmd->add_option("--out", out_dir, "Output directory");

  auto* list_cmd = app.add_subcommand("list-presets", "Print the preset names");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitPass : kExitUsage;
  }

  try {
    if (list_cmd->parsed()) {
      for (const auto& name : preset_names()) std::cout << name << "\n";
      return kExitPass;
    }
    if (run_cmd->parsed()) {
      std::optional<std::uint64_t> seed;
      if (seed_opt->count() > 0) seed = seed_value;
      return execute(load_config(config_path), out_dir, seed);
    }
    return execute(preset(preset_name), out_dir, std::nullopt);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.code() == ErrorCode::Config || e.code() == ErrorCode::UnknownPreset ? kExitUsage : kExitRuntime;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}

}  // namespace gradflow::experiment
