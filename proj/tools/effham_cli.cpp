// Command-line front end: effham <command> --config PATH [options]

#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "effham/commands.hpp"
#include "effham/error.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Effective Hamiltonians for deformed su(2) and cascade multilevel models"};
  std::string command, config_path, out_path;
  std::optional<int> order, max_steps;
  std::optional<double> resonance_tol;
  std::optional<std::uint64_t> seed;
  bool timestamp = false;

  app.add_option("command", command, "verify | derive | spectrum | evolve | sweep")
      ->required()
      ->check(CLI::IsMember({"verify", "derive", "spectrum", "evolve", "sweep"}));
  app.add_option("--config", config_path, "configuration file")->required();
  app.add_option("--out", out_path, "CSV output path");
  app.add_option("--order", order, "expansion order")->check(CLI::PositiveNumber);
  app.add_option("--resonance-tol", resonance_tol, "degeneracy tolerance of the reference energies")
      ->check(CLI::NonNegativeNumber);
  app.add_option("--seed", seed, "seed for randomized checks");
  app.add_option("--max-steps", max_steps, "maximum number of rotation steps")->check(CLI::PositiveNumber);
  app.add_flag("--timestamp", timestamp, "record the wall-clock time in the CSV metadata");
  CLI11_PARSE(app, argc, argv);

  try {
    effham::RunConfig cfg = effham::load_config(config_path);
    if (order) cfg.run.order = *order;
    if (resonance_tol) cfg.run.resonance_tol = *resonance_tol;
    if (seed) cfg.run.seed = *seed;
    if (max_steps) cfg.run.max_steps = *max_steps;
    const effham::CommandResult res = effham::run_command(cfg, command, {timestamp});
    std::cout << res.report;
    if (!out_path.empty()) {
      effham::write_table(res.table, out_path);
      std::cout << "wrote " << res.table.rows.size() << " rows to " << out_path << '\n';
    }
    return res.exit_code;
  } catch (const effham::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
