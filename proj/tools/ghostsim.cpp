#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "ghostsim/error.hpp"
#include "ghostsim/io.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitSafety = 2;
constexpr int kExitLiveness = 3;

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// A source is a config file path or, failing that, a preset name.
ghostsim::SimConfig load(const std::string& source) {
  if (fs::exists(source)) return ghostsim::parse_config(read_file(source));
  return ghostsim::preset(source);
}

fs::path output_dir(const std::string& flag) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv("GHOSTSIM_OUT_DIR"); env != nullptr && *env != '\0') return env;
  return ".";
}

void write_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

int exit_code(const ghostsim::Trace& trace) {
  if (!trace.safety_witnesses.empty()) return kExitSafety;
  if (!trace.stalls.empty()) return kExitLiveness;
  return kExitOk;
}

int simulate(const ghostsim::SimConfig& config, const std::string& out_flag, bool write_trace,
             const std::string& name) {
  const ghostsim::Trace trace = ghostsim::run(config);
  const std::string summary = ghostsim::summary_to_json(ghostsim::summarize(trace));
  std::cout << summary;
  if (write_trace) {
    const fs::path dir = output_dir(out_flag);
    write_file(dir / (name + ".trace.jsonl"), ghostsim::export_trace(trace));
    write_file(dir / (name + ".summary.json"), summary);
    write_file(dir / (name + ".final.dot"),
               ghostsim::export_dot(trace, trace.last_tick(), ghostsim::Viewpoint{}));
    std::cerr << "wrote " << (dir / name).string() << ".{trace.jsonl,summary.json,final.dot}\n";
  }
  return exit_code(trace);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Discrete-time simulator of GHOST-family fork choice under attack"};
  app.require_subcommand(1);

  std::string out_flag;
  app.add_option("-o,--out", out_flag, "Output directory (default: $GHOSTSIM_OUT_DIR or .)");

  std::string config_path;
  bool no_files = false;
  auto* run_cmd = app.add_subcommand("run", "Run a config file, print the summary, write trace files");
  run_cmd->add_option("config", config_path, "Config document (JSON)")->required();
  run_cmd->add_flag("--no-files", no_files, "Only print the summary");

  std::string preset_name;
  auto* replay_cmd = app.add_subcommand("replay", "Run a named preset");
  replay_cmd->add_option("preset", preset_name, "Preset name")->required();
  replay_cmd->add_flag("--no-files", no_files, "Only print the summary");

  std::string dot_source;
  std::int64_t dot_tick = -1;
  std::string dot_view = "global";
  std::string dot_file;
  auto* dot_cmd = app.add_subcommand("export-dot", "Write a DOT snapshot of a view at a tick");
  dot_cmd->add_option("source", dot_source, "Config file or preset name")->required();
  dot_cmd->add_option("--tick", dot_tick, "Tick to snapshot (default: last)");
  dot_cmd->add_option("--view", dot_view, "'global' or a validator index");
  dot_cmd->add_option("--file", dot_file, "Output file (default: stdout)");

  std::string summary_source;
  auto* summary_cmd = app.add_subcommand("summary", "Print summary statistics only");
  summary_cmd->add_option("source", summary_source, "Config file or preset name")->required();

  auto* presets_cmd = app.add_subcommand("presets", "List preset names");

  bool emit = false;
  replay_cmd->add_flag("--emit-config", emit, "Print the preset's config document and exit");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run_cmd) {
      const std::string name = fs::path(config_path).stem().string();
      return simulate(load(config_path), out_flag, !no_files, name);
    }
    if (*replay_cmd) {
      const ghostsim::SimConfig config = ghostsim::preset(preset_name);
      if (emit) {
        std::cout << ghostsim::emit_config(config);
        return kExitOk;
      }
      return simulate(config, out_flag, !no_files, preset_name);
    }
    if (*dot_cmd) {
      const ghostsim::Trace trace = ghostsim::run(load(dot_source));
      const ghostsim::Tick tick = dot_tick < 0 ? trace.last_tick() : dot_tick;
      const std::string dot = ghostsim::export_dot(trace, tick, ghostsim::Viewpoint::parse(dot_view));
      if (dot_file.empty()) {
        std::cout << dot;
      } else {
        write_file(output_dir(out_flag) / dot_file, dot);
      }
      return kExitOk;
    }
    if (*summary_cmd) {
      const ghostsim::Trace trace = ghostsim::run(load(summary_source));
      std::cout << ghostsim::summary_to_json(ghostsim::summarize(trace));
      return exit_code(trace);
    }
    if (*presets_cmd) {
      for (const auto& name : ghostsim::preset_names()) std::cout << name << '\n';
      return kExitOk;
    }
  } catch (const std::exception& e) {
    std::cerr << "ghostsim: " << e.what() << '\n';
    return kExitError;
  }
  return kExitOk;
}
