#include <CLI11.hpp>
#include <iostream>

#include "fmadj/app/commands.hpp"
#include "fmadj/app/output.hpp"
#include "fmadj/app/presets.hpp"

int main(int argc, char** argv) {
  using namespace fmadj::app;
  CLI::App app{"Differentiable 2D flow-map fluid solver"};
  app.set_version_flag("--version", version_string());
  app.require_subcommand(1);

  CliRequest req;
  std::string config, preset, out, mode, input;
  int steps = 0;
  unsigned long long seed = 0;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", config, "YAML run configuration")->check(CLI::ExistingFile);
    sub->add_option("--preset", preset, "bundled preset")->check(CLI::IsMember(preset_names()));
    sub->add_option("--out", out, "output directory");
    sub->add_option("--steps", steps, "override the step count")->check(CLI::PositiveNumber);
    sub->add_option("--seed", seed, "seed for randomized initialization");
    sub->add_option("--time-sparse-mode", mode, "long-short or plain")->check(CLI::IsMember({"long-short", "plain"}));
  };
  for (const char* name : {"simulate", "adjoint-check", "grad-check", "optimize"}) {
    CLI::App* sub = app.add_subcommand(name);
    common(sub);
  }
  CLI::App* render = app.add_subcommand("render", "snapshot to PGM/PPM");
  render->add_option("--input", input, "snapshot file")->required()->check(CLI::ExistingFile);
  render->add_option("--out", out, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kUsage;
  }

  CLI::App* sub = app.get_subcommands().front();
  req.command = sub->get_name();
  if (!config.empty()) req.config_path = config;
  if (!preset.empty()) req.overrides.preset = preset;
  if (!out.empty()) req.overrides.out_dir = out;
  if (sub->count("--steps")) req.overrides.steps = steps;
  if (sub->count("--seed")) req.overrides.seed = seed;
  if (!mode.empty()) req.overrides.mode = mode;
  if (!input.empty()) req.input = input;
  return run(req, std::cout, std::cerr);
}
