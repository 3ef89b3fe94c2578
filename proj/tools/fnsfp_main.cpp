#include <CLI11.hpp>
#include <iostream>

#include "fnsfp/orchestrate.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Time-fractional Navier-Stokes-Fokker-Planck solver"};
  app.require_subcommand(1);
  fnsfp::CliOptions o;

  const auto common = [&](CLI::App* s) {
    s->add_option("--config", o.config, "run configuration (INI)")->required()->check(CLI::ExistingFile);
    s->add_option("--out", o.out, "output directory, overrides output.dir");
    s->add_option("--seed", o.seed, "overrides run.seed");
  };
  auto* run = app.add_subcommand("run", "integrate the coupled system and verify the trajectory");
  common(run);
  run->add_option("--halt-after", o.halt_after, "stop after N steps, keeping the checkpoint")
      ->group("");  // hidden
  common(app.add_subcommand("resume", "continue a run from its checkpoint"));
  auto* verify = app.add_subcommand("verify", "recompute diagnostics from a trajectory CSV");
  common(verify);
  verify->add_option("--trajectory", o.trajectory, "defaults to <out>/trajectory.csv");
  auto* mc = app.add_subcommand("mc", "subordinated Langevin ensemble, q-marginal histogram");
  common(mc);
  mc->add_option("--n-paths", o.n_paths);
  mc->add_option("--alpha", o.alpha);
  mc->add_option("--spring", o.spring)->check(CLI::IsMember({"fene", "hookean"}));
  mc->add_option("--histogram", o.histogram, "output CSV, defaults to <out>/mc_histogram.csv");
  common(app.add_subcommand("convergence", "dt and basis refinement sweeps"));
  auto* vk = app.add_subcommand("verify-kernels", "fractional kernel identity residuals");
  common(vk);
  vk->group("");
  auto* cmp = app.add_subcommand("compare-mc", "total variation between two histogram CSVs");
  cmp->add_option("--solver", o.solver_csv)->required()->check(CLI::ExistingFile);
  cmp->add_option("--mc", o.mc_csv)->required()->check(CLI::ExistingFile);
  cmp->add_option("--tol", o.tv_tol);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }
  const std::string sub = app.get_subcommands().front()->get_name();
  return fnsfp::orchestrate(sub, o, std::cout, std::cerr);
}
