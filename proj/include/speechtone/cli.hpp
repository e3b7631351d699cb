#pragma once

// Command implementations behind the `speechtone` executable. Exit codes:
// 0 success, 1 spec/data error, 2 I/O or usage error.

#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <system_error>

#include "speechtone/speechtone.hpp"

namespace speechtone::cli {

enum class Command { compile, validate };
enum class OutputFormat { schedule, ssml, trace };

inline constexpr int kExitOk = 0;
inline constexpr int kExitSpecError = 1;
inline constexpr int kExitIoError = 2;

struct CliConfig {
  Command command = Command::compile;
  std::filesystem::path spec_path;
  std::optional<std::filesystem::path> data_path;
  OutputFormat output_format = OutputFormat::schedule;
  std::optional<std::filesystem::path> output_path;  // stdout when empty
  std::optional<std::filesystem::path> voice_map_path;
  bool prelude = false;
  unsigned break_ms = 300;
};

inline std::optional<std::string> read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) return std::nullopt;
  return buf.str();
}

/// Writes to a sibling temp file, then renames over `target`.
inline bool write_file_atomic(const std::filesystem::path& target, const std::string& content) {
  std::filesystem::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) return false;
    out << content;
    out.flush();
    if (!out) {
      std::error_code ec;
      std::filesystem::remove(tmp, ec);
      return false;
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, target, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    return false;
  }
  return true;
}

inline void print(std::ostream& err, const Diagnostics& ds) {
  for (const auto& d : ds) err << format_diagnostic(d) << '\n';
}

inline int io_failure(std::ostream& err, const std::string& path, const std::string& message) {
  err << format_diagnostic(make_error("E_IO", "$", message + " '" + path + "'")) << '\n';
  return kExitIoError;
}

/// Parses and validates the spec file; prints diagnostics to `err`.
inline int cmd_validate(const CliConfig& cfg, std::ostream& err) {
  auto raw = read_file(cfg.spec_path);
  if (!raw) return io_failure(err, cfg.spec_path.string(), "cannot read spec");
  auto parsed = parse_spec(*raw);
  print(err, parsed.diagnostics);
  return parsed.ok() ? kExitOk : kExitSpecError;
}

/// Full pipeline. The artifact goes to `out` or, atomically, to
/// cfg.output_path; nothing is written when any step fails.
inline int cmd_compile(const CliConfig& cfg, std::ostream& out, std::ostream& err) {
  auto raw = read_file(cfg.spec_path);
  if (!raw) return io_failure(err, cfg.spec_path.string(), "cannot read spec");
  auto parsed = parse_spec(*raw);
  print(err, parsed.diagnostics);
  if (!parsed.ok()) return kExitSpecError;
  SpecDocument spec = *parsed.document;
  if (cfg.prelude) spec.prelude_enabled = true;

  std::optional<Result<Dataset>> loaded;
  if (cfg.data_path) {
    if (!std::filesystem::is_regular_file(*cfg.data_path))
      return io_failure(err, cfg.data_path->string(), "cannot read data");
    loaded = load_dataset_file(*cfg.data_path);
  } else if (spec.data_source) {
    if (const auto* file = std::get_if<FileData>(&*spec.data_source)) {
      std::filesystem::path p = file->url;
      if (p.is_relative()) p = cfg.spec_path.parent_path() / p;
      if (!std::filesystem::is_regular_file(p)) return io_failure(err, p.string(), "cannot read data");
    }
    loaded = load_dataset(*spec.data_source, cfg.spec_path.parent_path());
  } else {
    print(err, {make_error("E_DATA_SOURCE_MISSING", "$", "spec has no 'data' and no --data was given")});
    return kExitSpecError;
  }
  if (!*loaded) {
    print(err, loaded->diagnostics());
    return loaded->diagnostics().front().code == "E_DATA_UNREADABLE" ? kExitIoError : kExitSpecError;
  }

  auto compiled = compile(spec, loaded->value());
  Diagnostics compile_diags = compiled.diagnostics();
  // validate_spec warnings were already printed by parse_spec.
  std::erase_if(compile_diags, [&](const Diagnostic& d) {
    return std::find(parsed.diagnostics.begin(), parsed.diagnostics.end(), d) != parsed.diagnostics.end();
  });
  print(err, compile_diags);
  if (!compiled) return kExitSpecError;
  const SpeechSchedule& schedule = compiled.value();

  std::string artifact;
  switch (cfg.output_format) {
    case OutputFormat::schedule: artifact = emit_schedule_json(schedule); break;
    case OutputFormat::trace: artifact = emit_trace(schedule); break;
    case OutputFormat::ssml: {
      VoiceMap vm;
      if (cfg.voice_map_path) {
        auto text = read_file(*cfg.voice_map_path);
        if (!text) return io_failure(err, cfg.voice_map_path->string(), "cannot read voice map");
        auto parsed_map = load_voice_map(*text);
        if (!parsed_map) {
          print(err, parsed_map.diagnostics());
          return kExitSpecError;
        }
        vm = std::move(parsed_map).value();
      } else {
        print(err, {make_warning("W_VOICE_MAP_DEFAULT", "$",
                                 "no voice map given; every voice ID uses '" + vm.default_name + "'")});
      }
      auto ssml = emit_ssml(schedule, vm, SsmlOptions{cfg.break_ms});
      if (cfg.voice_map_path) print(err, ssml.warnings);
      artifact = std::move(ssml.text);
      break;
    }
  }

  if (cfg.output_path) {
    if (!write_file_atomic(*cfg.output_path, artifact))
      return io_failure(err, cfg.output_path->string(), "cannot write output");
  } else {
    out << artifact;
  }
  return kExitOk;
}

}  // namespace speechtone::cli
