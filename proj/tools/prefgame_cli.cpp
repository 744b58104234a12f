#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "prefgame/experiment.hpp"
#include "prefgame/serialization.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kCheckFailed = 1;
constexpr int kUsageError = 2;

using namespace prefgame;

int cmd_gen(const std::string& spec_path, const std::string& out_path, const std::optional<std::uint64_t>& seed) {
  const auto spec = read_json_file(spec_path);
  if (spec.value("kind", std::string{}) == "cmdp") {
    auto s = cmdp_gen_spec_from_json(spec);
    if (seed) s.seed = *seed;
    write_json_file(out_path, cmdp_to_json(make_random_cmdp(s)));
  } else {
    auto s = gen_spec_from_json(spec);
    if (seed) s.seed = *seed;
    write_json_file(out_path, game_to_json(make_game(s)));
  }
  return kOk;
}

ExperimentConfig load_config(const std::string& path, const std::string& output_dir, bool serial) {
  const std::filesystem::path p(path);
  auto config = experiment_config_from_json(read_json_file(p), p.parent_path());
  if (!output_dir.empty()) config.output_dir = output_dir;
  if (serial) config.parallel = false;
  return config;
}

int cmd_run(const ExperimentConfig& config) {
  const auto report = run_experiment(config);
  std::cout << "runs: " << report.runs << "\n"
            << "bound checks: " << report.bound_checks << "\n"
            << "bound violations: " << report.bound_violations << "\n"
            << "summary: " << (config.output_dir / "summary.json").string() << "\n";
  return report.bound_violations == 0 ? kOk : kCheckFailed;
}

// Columns by header name; T from "T" or "t", gap from `gap_column` or the second column.
std::vector<std::pair<double, double>> read_curve(const std::string& path, const std::string& gap_column) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  auto split = [](const std::string& line) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) cells.push_back(cell);
    return cells;
  };
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument(path + ": empty curve file");
  const auto header = split(line);
  std::size_t t_col = header.size(), g_col = header.size();
  for (std::size_t k = 0; k < header.size(); ++k) {
    if (header[k] == "T" || header[k] == "t") t_col = k;
    if (!gap_column.empty() && header[k] == gap_column) g_col = k;
  }
  if (t_col == header.size()) throw std::invalid_argument(path + ": no \"T\" column");
  if (gap_column.empty()) g_col = t_col == 0 ? 1 : 0;
  if (g_col >= header.size()) throw std::invalid_argument(path + ": no gap column \"" + gap_column + "\"");

  std::vector<std::pair<double, double>> curve;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    const auto cells = split(line);
    if (cells.size() != header.size()) throw std::invalid_argument(path + ": row " + std::to_string(row) + " has the wrong number of cells");
    try {
      curve.emplace_back(std::stod(cells[t_col]), std::stod(cells[g_col]));
    } catch (const std::logic_error&) {
      throw std::invalid_argument(path + ": row " + std::to_string(row) + " is not numeric");
    }
  }
  return curve;
}

int cmd_rate(const std::string& path, const std::string& gap_column, double tail, const std::string& out_path) {
  const auto fit = fit_rate(read_curve(path, gap_column), tail);
  const nlohmann::json j{{"slope", fit.slope},
                         {"intercept", fit.intercept},
                         {"r_squared", fit.r_squared},
                         {"tail_fraction", fit.tail_fraction},
                         {"points_used", fit.points_used},
                         {"zero_gaps_excluded", fit.zero_gaps_excluded}};
  if (!out_path.empty()) write_json_file(out_path, j);
  std::cout << j.dump(2) << "\n";
  return kOk;
}

int cmd_verify(const std::string& dir) {
  const auto report = verify_reports(dir);
  for (const auto& m : report.messages) std::cout << m << "\n";
  std::cout << "checked: " << report.checked << ", bound failures: " << report.bound_failures
            << ", mismatches: " << report.mismatches << "\n";
  return report.ok() ? kOk : kCheckFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tabular solvers and benchmarks for two-player preference games"};
  app.require_subcommand(1);

  std::string spec_path, out_path;
  std::optional<std::uint64_t> seed;
  auto* gen = app.add_subcommand("gen", "Write a game or CMDP from a generator spec");
  gen->add_option("spec", spec_path, "Generator spec JSON")->required();
  gen->add_option("-o,--out", out_path, "Output JSON file")->required();
  gen->add_option("--seed", seed, "Override the spec seed");

  std::string config_path, output_dir;
  bool serial = false;
  auto* run = app.add_subcommand("run", "Run an experiment config and write reports");
  auto* sweep = app.add_subcommand("sweep", "Run an eta grid and write sweep.csv");
  for (auto* sub : {run, sweep}) {
    sub->add_option("config", config_path, "Experiment config JSON")->required();
    sub->add_option("-o,--output-dir", output_dir, "Override config.output_dir");
    sub->add_flag("--serial", serial, "Run jobs on one thread");
  }

  std::string curve_path, gap_column, rate_out;
  double tail = 0.5;
  auto* rate = app.add_subcommand("rate", "Fit the log-log slope of a gap curve CSV");
  rate->add_option("curve", curve_path, "CSV with a T (or t) column")->required();
  rate->add_option("--column", gap_column, "Gap column name (default: the other column)");
  rate->add_option("--tail", tail, "Fraction of the curve used for the fit")->check(CLI::Range(0.0, 1.0));
  rate->add_option("-o,--out", rate_out, "Write the fit as JSON");

  std::string verify_dir;
  auto* verify = app.add_subcommand("verify", "Recheck bound flags from run logs");
  verify->add_option("dir", verify_dir, "Experiment output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsageError;
  }

  try {
    if (*gen) return cmd_gen(spec_path, out_path, seed);
    if (*run) return cmd_run(load_config(config_path, output_dir, serial));
    if (*sweep) {
      std::cout << sweep_eta(load_config(config_path, output_dir, serial));
      return kOk;
    }
    if (*rate) return cmd_rate(curve_path, gap_column, tail, rate_out);
    if (*verify) return cmd_verify(verify_dir);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsageError;
  }
  return kUsageError;
}
