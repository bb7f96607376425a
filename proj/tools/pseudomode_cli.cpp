// pseudomode <subcommand> --config <path> [--out <dir>] [--threads N]

#include <CLI11.hpp>
#include <json.hpp>

#include <iostream>
#include <string>

#include "pseudomode/cli/commands.hpp"

namespace {

int report(const pseudomode::Error& e) {
  const int status = static_cast<int>(e.kind());
  nlohmann::json j{{"error", {{"kind", to_string(e.kind())}, {"code", e.code()}, {"exit", status}, {"message", e.what()}}}};
  std::cerr << j.dump() << '\n';
  return status;
}

}  // namespace

int main(int argc, char** argv) {
  using namespace pseudomode;
  CLI::App app{"Semiclassical pseudomodes, pseudospectra and FBI frames for second-order operators"};
  app.require_subcommand(1);
  std::string config_path, out_dir;
  int threads = 1;
  for (const auto& [name, command] : cli::commands()) {
    auto* sub = app.add_subcommand(name, "run the " + name + " block of the config");
    sub->add_option("--config", config_path, "JSON run configuration")->required();
    sub->add_option("--out", out_dir, "output directory (overrides the config)");
    sub->add_option("--threads", threads, "worker threads; runs are single-threaded and deterministic")
        ->check(CLI::PositiveNumber);
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return report(ConfigError(e.what()));
  }

  const std::string name = app.get_subcommands().front()->get_name();
  try {
    const cli::RunConfig cfg = cli::load_config(config_path);
    const cli::OutputDir dir(out_dir.empty() ? cfg.output : out_dir);
    const nlohmann::json summary = cli::commands().at(name)(cfg, dir);
    std::cout << summary.dump() << '\n';
    return 0;
  } catch (const Error& e) {
    return report(e);
  } catch (const std::exception& e) {
    return report(NumericError(e.what()));
  }
}
