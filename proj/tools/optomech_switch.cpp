// optomech-switch: batch runner for the coupled-cavity optomechanical model.
//
//   optomech-switch <task> --config <file> --out <dir> [--format csv,json] [--jobs N]
//
// Exit codes: 0 success, 2 configuration error, 3 numerical failure, 4 I/O error.

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>

#include "CLI11.hpp"
#include "optomech/runner/runner.hpp"

namespace {

std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw optomech::Error(optomech::ErrorKind::Io, "cannot read config file " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

}  // namespace

int main(int argc, char** argv) {
  using namespace optomech;

  CLI::App app{"Optical bistability, switching and mirror-spectrum scenarios"};
  std::string task_name;
  std::string config_path;
  std::string out_dir;
  std::string formats;
  unsigned jobs = 1;
  app.add_option("task", task_name, "bistability | spectrum | switch-metrics | hysteresis | sweep")->required();
  app.add_option("--config", config_path, "scenario file")->required();
  app.add_option("--out", out_dir, "output directory (overrides `output` in the file)");
  app.add_option("--format", formats, "comma-separated subset of csv,json (overrides `formats`)");
  app.add_option("--jobs", jobs, "worker threads for sweeps (0 = hardware concurrency)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    const auto task = runner::parse_task_kind(task_name);
    if (!task) throw ConfigError("unknown task '" + task_name + "'");
    auto cfg = runner::parse_config(read_file(config_path), task);
    if (!formats.empty()) {
      cfg.formats.clear();
      std::stringstream ss(formats);
      for (std::string f; std::getline(ss, f, ',');) cfg.formats.push_back(f);
    }
    if (!out_dir.empty()) cfg.output = out_dir;
    if (cfg.output.empty()) throw ConfigError("no output directory (--out or `output` key)");
    runner::validate_config(cfg);
    if (jobs == 0) jobs = std::max(1u, std::thread::hardware_concurrency());

    const auto res = runner::run_scenario(cfg, cfg.output, jobs);
    if (res.error) std::cerr << "optomech-switch: " << *res.error << "\n";
    else if (res.exit_code != 0) std::cerr << "optomech-switch: some sweep points failed (see errors.json)\n";
    return res.exit_code;
  } catch (const Error& e) {
    std::cerr << "optomech-switch: " << e.what() << "\n";
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "optomech-switch: " << e.what() << "\n";
    return 3;
  }
}
