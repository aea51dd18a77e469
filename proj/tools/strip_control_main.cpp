// strip-control: scenario runner for heat-equation controllability experiments
// on infinite strips. See README.md for the scenario file grammar.

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "stripctl/common.hpp"
#include "stripctl/runner.hpp"
#include "stripctl/scenario.hpp"

namespace fs = std::filesystem;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << content;
}

struct CommonOpts {
  std::string scenario_path;
  std::string out_dir = ".";
  int workers = stripctl::default_worker_count();
  std::int64_t seed = -1;  // -1: keep the scenario's seed
};

stripctl::Scenario load(const CommonOpts& opts) {
  const std::string text = read_file(opts.scenario_path);
  const std::string stem = fs::path(opts.scenario_path).stem().string();
  stripctl::Scenario sc = stripctl::load_scenario(text, stem);
  if (opts.seed >= 0) sc.seed = static_cast<std::uint64_t>(opts.seed);
  return sc;
}

int write_artifacts(const stripctl::Scenario& sc, const stripctl::RunArtifacts& art,
                    const CommonOpts& opts) {
  fs::create_directories(opts.out_dir);
  const fs::path base = fs::path(opts.out_dir) / sc.name;
  write_file(base.string() + ".csv", art.primary_csv);
  write_file(base.string() + "_plot.csv", art.plot_csv);
  write_file(base.string() + "_manifest.json", art.manifest_json);
  std::cout << art.summary << "\n";
  std::cout << "wrote " << base.string() << ".csv, _plot.csv, _manifest.json\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"controllability experiments for the heat equation on an infinite strip"};
  app.require_subcommand(1);

  CommonOpts run_opts, sweep_opts, dump_opts;

  auto add_common = [](CLI::App* cmd, CommonOpts& o) {
    cmd->add_option("scenario", o.scenario_path, "scenario file")->required();
    cmd->add_option("--out-dir", o.out_dir, "output directory");
    cmd->add_option("--workers", o.workers, "worker thread count");
    cmd->add_option("--seed", o.seed, "override the scenario seed");
  };

  CLI::App* run_cmd = app.add_subcommand("run", "execute one scenario");
  add_common(run_cmd, run_opts);
  CLI::App* sweep_cmd = app.add_subcommand("sweep", "expand sweep.<key> ranges and run all");
  add_common(sweep_cmd, sweep_opts);
  CLI::App* geom_cmd = app.add_subcommand("geometry", "geometry utilities");
  CLI::App* dump_cmd = geom_cmd->add_subcommand("dump", "emit the set's box list as CSV");
  add_common(dump_cmd, dump_opts);

  CLI11_PARSE(app, argc, argv);

  try {
    if (run_cmd->parsed()) {
      const auto sc = load(run_opts);
      return write_artifacts(sc, stripctl::run_scenario(sc, run_opts.workers), run_opts);
    }
    if (sweep_cmd->parsed()) {
      const auto sc = load(sweep_opts);
      return write_artifacts(sc, stripctl::sweep_scenario(sc, sweep_opts.workers), sweep_opts);
    }
    if (geom_cmd->parsed() && dump_cmd->parsed()) {
      const auto sc = load(dump_opts);
      const std::string csv = stripctl::geometry_dump_csv(sc);
      fs::create_directories(dump_opts.out_dir);
      const fs::path base = fs::path(dump_opts.out_dir) / (sc.name + "_boxes.csv");
      write_file(base, csv);
      std::cout << "wrote " << base.string() << "\n";
      return 0;
    }
  } catch (const stripctl::ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return 2;
  } catch (const stripctl::FieldError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
