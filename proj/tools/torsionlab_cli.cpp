// Command-line front end: torsion, linking and theorem checks for the builtin
// isotopies. Exit status: 0 ok, 1 error, 2 verification failure.

#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cli/commands.hpp"
#include "cli/config.hpp"
#include "cli/output.hpp"

namespace {

using namespace torsionlab;
using namespace torsionlab::cli;

struct Flags {
  std::string command, config, system, isotopy, n_list, point, vector, field, x, y, t_values,
      format, out;
  std::vector<std::string> params;
  int n = 0, n_max = 0, scan = 0, steps_per_unit = 0, jobs = 0, points = 0, s_count = 0;
  double tol = 0.0;
  std::uint64_t seed = 0;
};

RunConfig build_config(const CLI::App& app, const Flags& f) {
  RunConfig cfg;
  if (!f.config.empty()) cfg = config_from_file(f.config);
  auto given = [&app](const char* name) { return app.count(name) > 0; };

  if (given("command")) cfg.command = f.command;
  if (given("--system")) {
    if (f.system != cfg.system.name) cfg.system.params.clear();
    cfg.system.name = f.system;
  }
  if (given("--isotopy")) cfg.system.isotopy_variant = f.isotopy;
  for (const auto& p : f.params) {
    const auto [key, value] = parse_param(p);
    cfg.system.params[key] = value;
  }
  if (given("--n")) cfg.n = f.n;
  if (given("--n-max")) cfg.n_max = f.n_max;
  if (given("--n-list")) cfg.n_list = parse_list<int>(f.n_list, "--n-list");
  if (given("--point")) cfg.point = parse_vec2(f.point, "--point");
  if (given("--vector")) cfg.vector = parse_vec2(f.vector, "--vector");
  if (given("--field")) cfg.field = parse_vec2(f.field, "--field");
  if (given("--x")) cfg.x = parse_vec2(f.x, "--x");
  if (given("--y")) cfg.y = parse_vec2(f.y, "--y");
  if (given("--scan")) cfg.scan = f.scan;
  if (given("--tol")) cfg.tol = f.tol;
  if (given("--steps-per-unit")) cfg.steps_per_unit = f.steps_per_unit;
  if (given("--seed")) cfg.seed = f.seed;
  if (given("--jobs")) cfg.jobs = f.jobs;
  if (given("--points")) cfg.points = f.points;
  if (given("--s-count")) cfg.s_count = f.s_count;
  if (given("--t-values")) cfg.t_values = parse_list<double>(f.t_values, "--t-values");
  if (given("--format")) cfg.format = f.format;
  if (given("--out")) cfg.out = f.out;
  validate(cfg);
  return cfg;
}

void emit(const RunConfig& cfg, const Outcome& o) {
  std::ofstream file;
  if (!cfg.out.empty()) {
    file.open(cfg.out, std::ios::binary);
    if (!file) throw ConfigError("out: cannot write '" + cfg.out + "'");
  }
  std::ostream& os = cfg.out.empty() ? std::cout : file;
  if (cfg.format == "csv") {
    write_csv(os, o.csv);
  } else {
    Json j = o.json;
    j["verified"] = o.verified;
    write_json(os, j);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Torsion and linking numbers of surface isotopies"};
  Flags f;
  std::string commands;
  for (const auto& c : command_names()) commands += (commands.empty() ? "" : ", ") + c;
  app.add_option("command", f.command, "One of: " + commands);
  app.add_option("--config", f.config, "JSON config file; flags override its fields");
  app.add_option("--system", f.system, "Registered system name");
  app.add_option("--param", f.params, "System parameter KEY=VALUE (repeatable)");
  app.add_option("--isotopy", f.isotopy, "Isotopy variant");
  app.add_option("--n", f.n, "Horizon n");
  app.add_option("--n-max", f.n_max, "Report Torsion_n / Linking_n for n = 1..n_max");
  app.add_option("--n-list", f.n_list, "Comma-separated horizons for sweeps");
  app.add_option("--point", f.point, "Base point X,Y");
  app.add_option("--vector", f.vector, "Tangent vector X,Y");
  app.add_option("--field", f.field, "Constant reference field X,Y");
  app.add_option("--x", f.x, "First point / segment start X,Y");
  app.add_option("--y", f.y, "Second point / segment end X,Y");
  app.add_option("--scan", f.scan, "Uniform scan size for locate (default 64)");
  app.add_option("--tol", f.tol, "Location tolerance (default 1e-8)");
  app.add_option("--steps-per-unit", f.steps_per_unit, "Initial samples per unit time (default 64)");
  app.add_option("--seed", f.seed, "64-bit seed for random samples (default 0)");
  app.add_option("--jobs", f.jobs, "Worker threads (default 1)");
  app.add_option("--points", f.points, "Random points in sweeps (default 100)");
  app.add_option("--s-count", f.s_count, "s-samples of the W grid (default 64)");
  app.add_option("--t-values", f.t_values, "Comma-separated t values of the W grid");
  app.add_option("--format", f.format, "json or csv (default json)");
  app.add_option("--out", f.out, "Output path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  RunConfig cfg;
  try {
    cfg = build_config(app, f);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }

  Outcome outcome;
  try {
    outcome = run(cfg);
  } catch (const std::exception& e) {
    std::cerr << "error: " << cfg.command << ": " << e.what() << '\n';
    return 1;
  }

  try {
    emit(cfg, outcome);
  } catch (const std::exception& e) {
    std::cerr << "error: output: " << e.what() << '\n';
    return 1;
  }
  if (!outcome.verified) {
    for (const auto& v : outcome.violations) std::cerr << "verification failed: " << v << '\n';
    return 2;
  }
  return 0;
}
