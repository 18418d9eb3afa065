#include <cstdio>
#include <ctime>

#include "magscan/io.hpp"
#include "magscan/version.hpp"

namespace magscan {

namespace {

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string csv_quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

}  // namespace

std::string iso8601_utc_now() {
  std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

nlohmann::ordered_json config_json(const RunConfig& cfg) {
  nlohmann::ordered_json c;
  c["input"] = cfg.input_path;
  c["config_file"] = cfg.config_path.empty() ? nlohmann::ordered_json(nullptr)
                                             : nlohmann::ordered_json(cfg.config_path);
  c["output_dir"] = cfg.output_dir;
  c["id_column"] = cfg.id_column;
  c["trait_column"] = cfg.trait_column;
  c["trait_kind"] = cfg.trait_kind;
  c["trait_levels"] = cfg.trait_levels;
  c["reference_level"] = cfg.reference_level;
  c["covariate_columns"] = cfg.covariate_columns;
  c["marker_format"] = cfg.marker_format;
  c["alleles_column"] = cfg.alleles_column;
  c["family"] = cfg.family;
  c["criterion"] = cfg.criterion;
  c["penalty_c"] = cfg.penalty_c;
  c["max_order"] = cfg.max_order;
  c["seed"] = cfg.seed;
  c["missing"] = cfg.missing;
  c["search_cap"] = cfg.search_cap;
  c["force"] = cfg.force;
  c["plot"] = cfg.plot;
  c["search"] = cfg.search;
  c["anneal"] = {{"t0", cfg.anneal_t0},
                 {"cooling", cfg.anneal_cooling},
                 {"steps", cfg.anneal_steps},
                 {"restarts", cfg.anneal_restarts}};
  return c;
}

nlohmann::ordered_json build_report(const RunConfig& cfg, const LoadResult& lr,
                                    const TraitModel& tm, const ProfileTable& pt,
                                    const SelectionReport& sel, const LrtOutcome& joint) {
  const Dataset& ds = lr.dataset;
  nlohmann::ordered_json r;
  r["tool"] = {{"name", kToolName}, {"version", kToolVersion}};
  r["timestamp"] = iso8601_utc_now();
  r["config"] = config_json(cfg);

  nlohmann::ordered_json dataset;
  dataset["n"] = ds.n();
  dataset["n_rows"] = lr.n_rows;
  dataset["n_excluded_missing"] = lr.n_excluded_missing;
  dataset["h"] = ds.panel.size();
  dataset["alleles"] = nlohmann::ordered_json::array();
  for (int a = 0; a < ds.panel.size(); ++a) {
    int carriers = 0;
    for (const auto& ind : ds.individuals)
      if (ind.carried & (AlleleMask{1} << a)) ++carriers;
    dataset["alleles"].push_back(
        {{"name", ds.panel.name(a)},
         {"carriers", carriers},
         {"carrier_frequency", static_cast<double>(carriers) / ds.n()}});
  }
  nlohmann::ordered_json trait;
  trait["column"] = cfg.trait_column;
  if (tm.categorical) {
    trait["kind"] = "categorical";
    trait["levels"] = ds.trait_levels;
    trait["reference"] = ds.trait_levels[ds.reference_level];
    trait["model"] = "baseline-category logits";
    trait["k_convention"] =
        "parameters summed over the per-level logistic sub-fits";
  } else {
    trait["kind"] = "continuous";
    trait["family"] = family_name(tm.family);
    trait["k_convention"] = tm.family == Family::Gaussian
                                ? "intercept + covariates + MAG effects + dispersion"
                                : "intercept + covariates + MAG effects";
  }
  dataset["trait"] = trait;
  dataset["covariates"] = ds.covariate_names;
  r["dataset"] = dataset;

  r["null_model"] = {{"loglik", pt.null_loglik}, {"k", pt.null_k}};

  r["profile"] = nlohmann::ordered_json::array();
  for (const auto& e : pt.entries)
    r["profile"].push_back({{"order", e.order},
                            {"best_grouping", format_grouping(e.best_grouping, ds.panel)},
                            {"loglik", e.loglik},
                            {"k", e.k},
                            {"aic", e.aic},
                            {"alt_score", e.alt_score},
                            {"n_fitted", e.n_fitted},
                            {"n_skipped_degenerate", e.n_skipped_degenerate},
                            {"n_fit_errors", e.n_fit_errors}});

  std::uint64_t degenerate_total = 0, fit_error_total = 0;
  for (const auto& e : pt.entries) {
    degenerate_total += e.n_skipped_degenerate;
    fit_error_total += e.n_fit_errors;
  }
  r["search"] = {{"mode", cfg.search},
                 {"approximate", pt.approximate},
                 {"penalty_c", pt.penalty_c},
                 {"skipped_degenerate_total", degenerate_total},
                 {"fit_errors_total", fit_error_total}};

  nlohmann::ordered_json selection;
  selection["criterion"] = criterion_name(sel.criterion);
  selection["penalty_c"] = sel.penalty_c;
  selection["chosen_order"] = sel.chosen_order;
  selection["chosen_grouping"] = format_grouping(sel.chosen_grouping, ds.panel);
  selection["loglik"] = sel.loglik;
  selection["k"] = sel.k;
  selection["aic"] = sel.aic;
  selection["alt_score"] = sel.alt_score;
  selection["lrt_vs_null"] = {{"statistic", sel.lrt_vs_null.statistic},
                              {"df", sel.lrt_vs_null.df},
                              {"p_value", sel.lrt_vs_null.p_value}};
  selection["effects"] = nlohmann::ordered_json::array();
  for (const auto& row : sel.effects)
    selection["effects"].push_back({{"mag", row.mag},
                                    {"level", row.level},
                                    {"estimate", row.estimate},
                                    {"direction", row.direction}});
  r["selection"] = selection;

  r["joint_test"] = {{"statistic", joint.statistic},
                     {"df", joint.df},
                     {"p_value", joint.p_value}};
  return r;
}

std::string profile_csv_text(const ProfileTable& pt, const AllelePanel& panel) {
  std::string out = "j,loglik,k,aic,alt_score,best_grouping\n";
  for (const auto& e : pt.entries) {
    out += std::to_string(e.order) + "," + fmt17(e.loglik) + "," + std::to_string(e.k) +
           "," + fmt17(e.aic) + "," + fmt17(e.alt_score) + "," +
           csv_quote(format_grouping(e.best_grouping, panel)) + "\n";
  }
  return out;
}

std::string dataset_csv_text(const Dataset& ds) {
  std::string out = "id,trait";
  for (const auto& c : ds.covariate_names) out += "," + c;
  out += ",alleles\n";
  for (const auto& ind : ds.individuals) {
    out += ind.id + ",";
    out += ds.trait_kind == TraitKind::Categorical ? ds.trait_levels[ind.level]
                                                   : fmt17(ind.trait);
    for (double c : ind.covariates) out += "," + fmt17(c);
    out += ",";
    // "-" marks an observed empty carried-set; a blank cell would read back as missing
    bool first = true;
    for (int a = 0; a < ds.panel.size(); ++a)
      if (ind.carried & (AlleleMask{1} << a)) {
        if (!first) out += ";";
        out += ds.panel.name(a);
        first = false;
      }
    if (first) out += "-";
    out += "\n";
  }
  return out;
}

std::string report_determinism_key(const nlohmann::ordered_json& report) {
  nlohmann::ordered_json copy = report;
  if (copy.contains("timestamp")) copy["timestamp"] = "";
  return copy.dump(2);
}

}  // namespace magscan
