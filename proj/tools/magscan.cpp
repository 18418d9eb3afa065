#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "magscan/io.hpp"
#include "magscan/version.hpp"

namespace {

// Config file is applied before the flag parse, so flags always win.
int preload_config(int argc, char** argv, magscan::RunConfig& cfg) {
  for (int i = 1; i < argc; ++i) {
    std::string arg = argv[i];
    std::string path;
    if (arg == "--config" && i + 1 < argc)
      path = argv[i + 1];
    else if (arg.rfind("--config=", 0) == 0)
      path = arg.substr(9);
    else
      continue;
    try {
      magscan::apply_config_file(cfg, path);
    } catch (const magscan::Error& e) {
      std::cerr << "magscan: error: " << e.what() << "\n";
      return magscan::exit_code_for(e);
    }
    break;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"magscan — marker-allele group association scanner"};
  app.set_version_flag("--version", std::string(magscan::kToolName) + " " +
                                        magscan::kToolVersion);
  app.require_subcommand(1);

  magscan::RunConfig cfg;
  if (int rc = preload_config(argc, argv, cfg)) return rc;
  std::string config_sink;

  auto* scan = app.add_subcommand("scan", "search groupings and select a model");
  scan->add_option("input", cfg.input_path, "input CSV (one row per individual)");
  scan->add_option("--config", config_sink, "JSON config file (flags override it)");
  scan->add_option("--output-dir", cfg.output_dir, "directory for report.json / profile.csv");
  scan->add_option("--id-column", cfg.id_column, "id column name");
  scan->add_option("--trait", cfg.trait_column, "trait column name");
  scan->add_option("--trait-kind", cfg.trait_kind, "continuous | categorical");
  scan->add_option("--trait-levels", cfg.trait_levels, "categorical levels")->delimiter(',');
  scan->add_option("--reference-level", cfg.reference_level, "categorical reference level");
  scan->add_option("--covariates", cfg.covariate_columns, "covariate column names")
      ->delimiter(',');
  scan->add_option("--marker-format", cfg.marker_format, "compact | wide");
  scan->add_option("--alleles-column", cfg.alleles_column,
                   "allele list column (compact format)");
  scan->add_option("--family", cfg.family, "gaussian | binomial | poisson");
  scan->add_option("--criterion", cfg.criterion, "aic | alt");
  scan->add_option("--penalty-c", cfg.penalty_c, "penalty constant for the alt criterion");
  scan->add_option("--max-order", cfg.max_order, "largest grouping order (0 = panel size)");
  scan->add_option("--workers", cfg.workers, "parallel workers (0 = MAGSCAN_WORKERS or 1)");
  scan->add_option("--seed", cfg.seed, "seed for the annealed search");
  scan->add_option("--missing", cfg.missing, "missing-genotype policy: exclude | absent");
  scan->add_option("--cap", cfg.search_cap, "largest exhaustive search size");
  scan->add_flag("--force", cfg.force, "scan even past the cap");
  scan->add_flag("--plot", cfg.plot, "also write profile.svg");
  scan->add_option("--search", cfg.search, "exhaustive | anneal");
  scan->add_option("--anneal-t0", cfg.anneal_t0, "annealer start temperature");
  scan->add_option("--anneal-cooling", cfg.anneal_cooling, "annealer cooling factor");
  scan->add_option("--anneal-steps", cfg.anneal_steps, "annealer steps per restart");
  scan->add_option("--anneal-restarts", cfg.anneal_restarts, "annealer restarts");

  magscan::SimConfig sim;
  auto* simulate = app.add_subcommand("simulate", "sample a population from a branching tree");
  simulate->add_option("tree", sim.tree_path, "tree description file")->required();
  simulate->add_option("--n", sim.n, "individuals to sample");
  simulate->add_option("--family", sim.family, "gaussian | binomial | poisson");
  simulate->add_option("--baseline", sim.baseline, "baseline on the link scale");
  simulate->add_option("--effect", sim.effect, "region-carrier effect on the link scale");
  simulate->add_option("--noise-sd", sim.noise_sd, "gaussian noise standard deviation");
  simulate->add_option("--covariate-effects", sim.covariate_effects,
                       "effects of iid N(0,1) covariates")
      ->delimiter(',');
  simulate->add_option("--freqs", sim.freqs, "haplotype frequencies (default uniform)")
      ->delimiter(',');
  simulate->add_option("--seed", sim.seed, "simulation seed");
  simulate->add_option("--out", sim.out_csv, "output dataset CSV");
  simulate->add_option("--truth", sim.out_truth, "output truth sidecar JSON");

  int count_h = 0;
  int count_j = -1;
  auto* count = app.add_subcommand("count", "exact grouping counts");
  count->add_option("panel-size", count_h, "panel size h")->required();
  count->add_option("order", count_j, "order j (omit for all orders and the total)");

  auto* test = app.add_subcommand("test", "run the built-in self-checks");

  CLI11_PARSE(app, argc, argv);

  if (*scan) return magscan::cmd_scan(cfg, std::cout, std::cerr);
  if (*simulate) return magscan::cmd_simulate(sim, std::cout, std::cerr);
  if (*count)
    return magscan::cmd_count(count_h,
                              count_j < 0 ? std::nullopt : std::optional<int>(count_j),
                              std::cout, std::cerr);
  if (*test) return magscan::cmd_selftest(std::cout);
  return 1;
}
