#include <iostream>
#include <map>
#include <string>

#include "CLI11.hpp"

#include "speechtone/cli.hpp"

int main(int argc, char** argv) {
  using namespace speechtone::cli;

  CLI::App app{"Compile speech sonification specs into speech schedules"};
  app.require_subcommand(1);

  CliConfig cfg;
  std::string spec_path;

  auto* validate = app.add_subcommand("validate", "Check a spec and print its diagnostics");
  validate->add_option("spec", spec_path, "Spec file (JSON)")->required();

  auto* compile = app.add_subcommand("compile", "Compile a spec into a schedule, SSML or trace");
  compile->add_option("spec", spec_path, "Spec file (JSON)")->required();
  std::string data_path, output_path, voice_map_path;
  compile->add_option("-d,--data", data_path, "Data file overriding the spec's data source");
  const std::map<std::string, OutputFormat> formats{
      {"schedule", OutputFormat::schedule}, {"ssml", OutputFormat::ssml}, {"trace", OutputFormat::trace}};
  compile->add_option("-f,--format", cfg.output_format, "Output format")
      ->transform(CLI::CheckedTransformer(formats, CLI::ignore_case));
  compile->add_option("-o,--output", output_path, "Output file (default: stdout)");
  compile->add_option("--voice-map", voice_map_path, "JSON map of voice IDs to engine voice names");
  compile->add_flag("--prelude", cfg.prelude, "Announce the mappings before the data");
  compile->add_option("--break-ms", cfg.break_ms, "Pause between SSML utterances in milliseconds")
      ->check(CLI::NonNegativeNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kExitOk : kExitIoError;
  }

  cfg.spec_path = spec_path;
  if (!data_path.empty()) cfg.data_path = data_path;
  if (!output_path.empty()) cfg.output_path = output_path;
  if (!voice_map_path.empty()) cfg.voice_map_path = voice_map_path;

  if (validate->parsed()) {
    cfg.command = Command::validate;
    return cmd_validate(cfg, std::cerr);
  }
  cfg.command = Command::compile;
  return cmd_compile(cfg, std::cout, std::cerr);
}
