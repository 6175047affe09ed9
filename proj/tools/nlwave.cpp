#include <iostream>

#include <CLI11.hpp>

#include "nlwave/app/commands.hpp"

int main(int argc, char** argv) {
  using namespace nlwave::app;
  CLI::App app{"Simulation and analysis of the nonlinearly dispersive wave equation"};
  app.require_subcommand(1);

  std::string config;
  std::optional<std::string> out_dir;
  unsigned workers = 1;

  auto* sim = app.add_subcommand("simulate", "integrate one configuration and write trace.csv and summary.json");
  sim->add_option("--config", config, "run configuration (JSON)")->required()->check(CLI::ExistingFile);
  sim->add_option("--out", out_dir, "output directory (overrides output.directory)");

  SolitonArgs sol;
  std::optional<std::string> sol_out;
  auto* soliton = app.add_subcommand("soliton", "build a solitary-wave profile");
  soliton->add_option("--c", sol.c, "wave speed")->required();
  soliton->add_option("--omega", sol.omega, "omega")->required();
  soliton->add_option("--gamma", sol.gamma, "gamma")->required();
  soliton->add_option("--L", sol.L, "half-width of the box")->capture_default_str();
  soliton->add_option("--N", sol.N, "grid points (power of two)")->capture_default_str();
  soliton->add_option("--out", sol_out, "directory for profile.csv");

  BoundArgs bound;
  std::optional<std::string> bound_config, bound_data;
  auto* bnd = app.add_subcommand("bound", "blow-up criterion and existence-time lower bound");
  bnd->add_option("--config", bound_config, "run configuration (JSON)")->check(CLI::ExistingFile);
  bnd->add_option("--data", bound_data, "CSV with x and u columns")->check(CLI::ExistingFile);
  bnd->add_option("--gamma", bound.gamma, "gamma (with --data or --e0/--m0)");
  bnd->add_option("--omega", bound.omega, "omega (with --data or --e0/--m0)");
  bnd->add_option("--e0", bound.e0, "energy E(u0)");
  bnd->add_option("--m0", bound.m0, "initial slope minimum inf gamma u0'");

  auto* sweep = app.add_subcommand("sweep", "sharpness experiment over a family of initial data");
  sweep->add_option("--config", config, "run configuration with a family spec (JSON)")
      ->required()
      ->check(CLI::ExistingFile);
  sweep->add_option("--out", out_dir, "output directory (overrides output.directory)");
  sweep->add_option("--workers", workers, "concurrent member simulations (0 = all cores)")->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  auto path = [](const std::optional<std::string>& s) {
    return s ? std::optional<std::filesystem::path>(*s) : std::nullopt;
  };
  if (*sim) return cmd_simulate(config, path(out_dir), std::cout, std::cerr);
  if (*soliton) {
    sol.out_dir = path(sol_out);
    return cmd_soliton(sol, std::cout, std::cerr);
  }
  if (*bnd) {
    bound.config = path(bound_config);
    bound.data = path(bound_data);
    return cmd_bound(bound, std::cout, std::cerr);
  }
  return cmd_sweep(config, path(out_dir), workers, std::cout, std::cerr);
}
