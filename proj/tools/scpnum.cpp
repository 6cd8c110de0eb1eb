#include <filesystem>
#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>

#include "scpnum/errors.hpp"
#include "scpnum/runner.hpp"
#include "scpnum/scenario.hpp"

int main(int argc, char** argv) {
  CLI::App app{"SCP-DC rate allocation for S-curve utilities"};
  app.require_subcommand(1);

  std::string scenario;
  std::string out_dir = "out";
  scpnum::RunMode mode = scpnum::RunMode::engine;
  const std::map<std::string, scpnum::RunMode> modes{
      {"engine", scpnum::RunMode::engine},
      {"agents", scpnum::RunMode::agents},
      {"both", scpnum::RunMode::both}};

  auto* run = app.add_subcommand("run", "Run a scenario and write trace.csv and result.txt");
  run->add_option("scenario", scenario, "Built-in name or JSON file")->required();
  run->add_option("--mode", mode, "engine, agents or both")
      ->transform(CLI::CheckedTransformer(modes, CLI::ignore_case));
  run->add_option("--out", out_dir, "Output directory");

  auto* validate = app.add_subcommand("validate", "Cross-check the engine against the grid oracle");
  validate->add_option("scenario", scenario, "Built-in name or JSON file")->required();
  validate->add_option("--out", out_dir, "Output directory");

  auto* list = app.add_subcommand("scenarios", "List built-in scenarios");

  CLI11_PARSE(app, argc, argv);

  try {
    if (list->parsed()) {
      for (const auto& info : scpnum::builtin_scenarios()) {
        std::cout << info.name << "\t" << info.description << '\n';
      }
      return 0;
    }
    const auto sc = scpnum::load_scenario(scenario);
    if (run->parsed()) return scpnum::run_scenario(sc, mode, out_dir, std::cout);
    return scpnum::validate_scenario(sc, out_dir, std::cout);
  } catch (const scpnum::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
