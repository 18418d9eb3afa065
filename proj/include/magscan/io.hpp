#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "magscan/phylo.hpp"
#include "magscan/search.hpp"

namespace magscan {

// Everything that shapes a scan.  Precedence: CLI flags > config file >
// defaults; the effective values are echoed in the report (except the worker
// count, which cannot influence results and would break the byte-identity of
// reports across parallelism levels).
struct RunConfig {
  std::string input_path;
  std::string config_path;
  std::string output_dir = ".";
  std::string id_column = "id";
  std::string trait_column = "trait";
  std::string trait_kind = "continuous";  // continuous | categorical
  std::vector<std::string> trait_levels;
  std::string reference_level;  // default: first declared level
  std::vector<std::string> covariate_columns;
  std::string marker_format = "compact";  // compact | wide
  std::string alleles_column = "alleles";
  std::string family = "gaussian";  // gaussian | binomial | poisson
  std::string criterion = "aic";    // aic | alt
  double penalty_c = 3.85;
  int max_order = 0;  // 0: panel size
  int workers = 0;    // 0: MAGSCAN_WORKERS env, else 1
  std::uint64_t seed = 0;
  std::string missing = "exclude";  // exclude | absent
  std::uint64_t search_cap = 10'000'000;
  bool force = false;  // scan even past the cap
  bool plot = false;
  std::string search = "exhaustive";  // exhaustive | anneal
  double anneal_t0 = 2.0;
  double anneal_cooling = 0.999;
  int anneal_steps = 20000;
  int anneal_restarts = 4;

  void validate() const;
  int effective_workers() const;
  Family family_enum() const;
  Criterion criterion_enum() const;
};

void apply_config_file(RunConfig& cfg, const std::string& path);
nlohmann::ordered_json config_json(const RunConfig& cfg);

struct LoadResult {
  Dataset dataset;
  int n_rows = 0;              // data rows in the file
  int n_excluded_missing = 0;  // rows dropped under missing=exclude
};

LoadResult load_dataset(const std::string& path, const RunConfig& cfg);

// In-memory artifacts; cmd_scan writes them to cfg.output_dir.
struct ScanResult {
  nlohmann::ordered_json report;
  std::string profile_csv;
  std::string profile_svg;  // empty unless cfg.plot
};

ScanResult run_scan(const RunConfig& cfg);

struct SimConfig {
  std::string tree_path;
  std::string out_csv = "sim.csv";
  std::string out_truth = "truth.json";
  int n = 100;
  std::string family = "gaussian";
  double baseline = 0.0;
  double effect = 1.0;
  double noise_sd = 1.0;
  std::vector<double> covariate_effects;
  std::vector<double> freqs;  // empty: uniform over leaves
  std::uint64_t seed = 0;
};

struct SimResult {
  std::string csv;
  nlohmann::ordered_json truth;
};

SimResult run_simulate(const SimConfig& sc);

// Exit codes: 0 success, 2 data/config errors, 3 search space over the cap.
int cmd_scan(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_simulate(const SimConfig& sc, std::ostream& out, std::ostream& err);
int cmd_count(int h, std::optional<int> j, std::ostream& out, std::ostream& err);
int cmd_selftest(std::ostream& out);

int exit_code_for(const Error& e);

// report.cpp
nlohmann::ordered_json build_report(const RunConfig& cfg, const LoadResult& lr,
                                    const TraitModel& tm, const ProfileTable& pt,
                                    const SelectionReport& sel, const LrtOutcome& joint);
std::string profile_csv_text(const ProfileTable& pt, const AllelePanel& panel);
std::string dataset_csv_text(const Dataset& ds);
// Serialized report with the volatile timestamp blanked, for determinism checks.
std::string report_determinism_key(const nlohmann::ordered_json& report);

// svg.cpp — the three profile curves (log-likelihood, -AIC, alternative score).
std::string profile_svg_text(const ProfileTable& pt);

std::string iso8601_utc_now();

}  // namespace magscan
