#include <CLI11.hpp>
#include <iostream>
#include <string>

#include "qtopo/cli.hpp"

namespace {

void add_run_flags(CLI::App* cmd, qtopo::RunConfig& config, std::string& mode) {
  cmd->add_option("--mode", mode, "Expectation backend: exact or sampled")
      ->check(CLI::IsMember({"exact", "sampled"}))
      ->capture_default_str();
  cmd->add_option("--shots", config.shots, "Shots per measurement circuit (sampled mode)")
      ->capture_default_str();
  cmd->add_option("--seed", config.seed, "Master seed for every sampling path")
      ->capture_default_str();
  cmd->add_option("--iters", config.adam.iterations, "ADAM iterations per stage")
      ->capture_default_str();
  cmd->add_option("--lr", config.adam.learning_rate, "ADAM learning rate")
      ->capture_default_str();
  cmd->add_option("--layers-psi", config.layers_psi, "Ansatz layers for psi (even)")
      ->capture_default_str();
  cmd->add_option("--layers-phi", config.layers_phi, "Ansatz layers for phi")
      ->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-stage variational heat-path topology optimization on a statevector simulator"};
  app.require_subcommand(1);

  std::string problem_path;
  std::string out_dir = "out";
  std::string theta_path;
  std::string mode = "exact";
  qtopo::RunConfig config;

  CLI::App* solve = app.add_subcommand("solve", "Run the two-stage optimization pipeline");
  solve->add_option("problem", problem_path, "Problem file")->required();
  add_run_flags(solve, config, mode);
  solve->add_option("--out", out_dir, "Output directory")->capture_default_str();

  CLI::App* oracle = app.add_subcommand("oracle", "Brute-force table of all structures");
  oracle->add_option("problem", problem_path, "Problem file")->required();

  CLI::App* estimate =
      app.add_subcommand("estimate", "Compare exact and shot-based expectation values");
  estimate->add_option("problem", problem_path, "Problem file")->required();
  estimate->add_option("theta", theta_path, "Parameter file for psi(theta)")->required();
  add_run_flags(estimate, config, mode);

  CLI11_PARSE(app, argc, argv);
  config.mode =
      mode == "sampled" ? qtopo::BackendMode::Sampled : qtopo::BackendMode::Exact;

  try {
    if (solve->parsed()) {
      return qtopo::cli::cmd_solve(problem_path, config, out_dir, std::cout, std::cerr);
    }
    if (oracle->parsed()) {
      return qtopo::cli::cmd_oracle(problem_path, std::cout, std::cerr);
    }
    return qtopo::cli::cmd_estimate(problem_path, theta_path, config, std::cout, std::cerr);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return qtopo::cli::kPipelineError;
  }
}
