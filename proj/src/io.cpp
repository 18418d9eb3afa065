#include "magscan/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "magscan/version.hpp"

namespace magscan {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> parse_csv_line(const std::string& line, std::size_t lineno) {
  std::vector<std::string> fields;
  std::string cur;
  bool in_quotes = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        cur += c;
      }
    } else if (c == '"') {
      in_quotes = true;
    } else if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  if (in_quotes) throw MalformedRowError(lineno, "unterminated quoted field");
  fields.push_back(cur);
  return fields;
}

double parse_number(const std::string& s, std::size_t lineno, const std::string& column) {
  try {
    std::size_t pos = 0;
    double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw MalformedRowError(lineno, "cannot parse '" + s + "' as a number (column '" +
                                        column + "')");
  }
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::IoFailure, "cannot open '" + path + "' for writing");
  out << content;
  if (!out) throw Error(Errc::IoFailure, "write to '" + path + "' failed");
}

}  // namespace

void RunConfig::validate() const {
  if (input_path.empty()) throw Error(Errc::InvalidConfig, "no input file given");
  if (trait_kind != "continuous" && trait_kind != "categorical")
    throw Error(Errc::InvalidConfig, "trait_kind must be continuous or categorical");
  if (trait_kind == "categorical") {
    if (trait_levels.size() < 2)
      throw Error(Errc::InvalidConfig, "categorical trait needs >= 2 declared levels");
    if (!reference_level.empty() &&
        std::find(trait_levels.begin(), trait_levels.end(), reference_level) ==
            trait_levels.end())
      throw Error(Errc::InvalidConfig,
                  "reference level '" + reference_level + "' is not a declared level");
  } else {
    family_from_name(family);
  }
  criterion_from_name(criterion);
  if (marker_format != "compact" && marker_format != "wide")
    throw Error(Errc::InvalidConfig, "marker_format must be compact or wide");
  if (missing != "exclude" && missing != "absent")
    throw Error(Errc::InvalidConfig, "missing policy must be exclude or absent");
  if (search != "exhaustive" && search != "anneal")
    throw Error(Errc::InvalidConfig, "search must be exhaustive or anneal");
  if (!(penalty_c > 0)) throw Error(Errc::InvalidConfig, "penalty_c must be > 0");
  if (max_order < 0) throw Error(Errc::InvalidConfig, "max_order must be >= 0");
  if (workers < 0) throw Error(Errc::InvalidConfig, "workers must be >= 0");
  if (!(anneal_t0 >= 0)) throw Error(Errc::InvalidConfig, "anneal_t0 must be >= 0");
  if (!(anneal_cooling > 0 && anneal_cooling <= 1))
    throw Error(Errc::InvalidConfig, "anneal_cooling must be in (0, 1]");
  if (anneal_steps < 1) throw Error(Errc::InvalidConfig, "anneal_steps must be >= 1");
  if (anneal_restarts < 1) throw Error(Errc::InvalidConfig, "anneal_restarts must be >= 1");
}

int RunConfig::effective_workers() const {
  if (workers > 0) return workers;
  if (const char* env = std::getenv("MAGSCAN_WORKERS")) {
    try {
      std::size_t pos = 0;
      int w = std::stoi(env, &pos);
      if (pos != std::string(env).size() || w < 1) throw std::invalid_argument("");
      return w;
    } catch (const std::exception&) {
      throw Error(Errc::InvalidConfig,
                  std::string("MAGSCAN_WORKERS='") + env + "' is not a positive integer");
    }
  }
  return 1;
}

Family RunConfig::family_enum() const { return family_from_name(family); }
Criterion RunConfig::criterion_enum() const { return criterion_from_name(criterion); }

void apply_config_file(RunConfig& cfg, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::IoFailure, "cannot open config file '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::InvalidConfig, "config file '" + path + "': " + e.what());
  }
  if (!j.is_object()) throw Error(Errc::InvalidConfig, "config file must hold a JSON object");
  try {
    for (const auto& [key, val] : j.items()) {
      if (key == "input") cfg.input_path = val.get<std::string>();
      else if (key == "output_dir") cfg.output_dir = val.get<std::string>();
      else if (key == "id_column") cfg.id_column = val.get<std::string>();
      else if (key == "trait_column") cfg.trait_column = val.get<std::string>();
      else if (key == "trait_kind") cfg.trait_kind = val.get<std::string>();
      else if (key == "trait_levels") cfg.trait_levels = val.get<std::vector<std::string>>();
      else if (key == "reference_level") cfg.reference_level = val.get<std::string>();
      else if (key == "covariates" || key == "covariate_columns")
        cfg.covariate_columns = val.get<std::vector<std::string>>();
      else if (key == "marker_format") cfg.marker_format = val.get<std::string>();
      else if (key == "alleles_column") cfg.alleles_column = val.get<std::string>();
      else if (key == "family") cfg.family = val.get<std::string>();
      else if (key == "criterion") cfg.criterion = val.get<std::string>();
      else if (key == "penalty_c") cfg.penalty_c = val.get<double>();
      else if (key == "max_order") cfg.max_order = val.get<int>();
      else if (key == "workers") cfg.workers = val.get<int>();
      else if (key == "seed") cfg.seed = val.get<std::uint64_t>();
      else if (key == "missing") cfg.missing = val.get<std::string>();
      else if (key == "search_cap") cfg.search_cap = val.get<std::uint64_t>();
      else if (key == "force") cfg.force = val.get<bool>();
      else if (key == "plot") cfg.plot = val.get<bool>();
      else if (key == "search") cfg.search = val.get<std::string>();
      else if (key == "anneal_t0") cfg.anneal_t0 = val.get<double>();
      else if (key == "anneal_cooling") cfg.anneal_cooling = val.get<double>();
      else if (key == "anneal_steps") cfg.anneal_steps = val.get<int>();
      else if (key == "anneal_restarts") cfg.anneal_restarts = val.get<int>();
      else
        throw Error(Errc::InvalidConfig, "config file '" + path + "': unknown key '" + key + "'");
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::InvalidConfig, "config file '" + path + "': " + e.what());
  }
  cfg.config_path = path;
}

LoadResult load_dataset(const std::string& path, const RunConfig& cfg) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::IoFailure, "cannot open '" + path + "'");

  std::string line;
  std::size_t lineno = 0;
  if (!std::getline(in, line)) throw Error(Errc::MalformedRow, "empty input file");
  ++lineno;
  std::vector<std::string> header = parse_csv_line(line, lineno);
  for (auto& hname : header) hname = trim(hname);
  auto column = [&](const std::string& name) -> std::optional<int> {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return static_cast<int>(i);
    return std::nullopt;
  };
  {
    std::set<std::string> seen;
    for (const auto& hname : header)
      if (!seen.insert(hname).second)
        throw Error(Errc::InvalidConfig, "duplicate column '" + hname + "' in header");
  }

  auto trait_col = column(cfg.trait_column);
  if (!trait_col)
    throw Error(Errc::InvalidConfig, "trait column '" + cfg.trait_column + "' not found");
  auto id_col = column(cfg.id_column);
  std::vector<int> cov_cols;
  for (const auto& c : cfg.covariate_columns) {
    auto idx = column(c);
    if (!idx) throw Error(Errc::InvalidConfig, "covariate column '" + c + "' not found");
    cov_cols.push_back(*idx);
  }

  const bool wide = cfg.marker_format == "wide";
  std::optional<int> alleles_col;
  std::vector<int> allele_cols;
  std::vector<std::string> allele_names;
  if (wide) {
    std::set<int> reserved(cov_cols.begin(), cov_cols.end());
    reserved.insert(*trait_col);
    if (id_col) reserved.insert(*id_col);
    for (std::size_t i = 0; i < header.size(); ++i)
      if (!reserved.count(static_cast<int>(i))) {
        allele_cols.push_back(static_cast<int>(i));
        allele_names.push_back(header[i]);
      }
    if (allele_cols.empty())
      throw Error(Errc::InvalidConfig, "wide marker format: no allele columns left in header");
  } else {
    alleles_col = column(cfg.alleles_column);
    if (!alleles_col)
      throw Error(Errc::InvalidConfig,
                  "alleles column '" + cfg.alleles_column + "' not found");
  }

  struct RawRow {
    std::size_t lineno;
    std::string id;
    std::string trait;
    std::vector<double> covariates;
    std::vector<std::string> tokens;  // compact
    AlleleMask wide_mask = 0;
    bool missing = false;
  };
  std::vector<RawRow> raw;
  std::set<std::string> universe;

  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    std::vector<std::string> f = parse_csv_line(line, lineno);
    if (f.size() != header.size())
      throw MalformedRowError(lineno, "expected " + std::to_string(header.size()) +
                                          " fields, found " + std::to_string(f.size()));
    RawRow row;
    row.lineno = lineno;
    row.id = id_col ? trim(f[*id_col]) : "r" + std::to_string(raw.size() + 1);
    row.trait = trim(f[*trait_col]);
    for (int c : cov_cols) row.covariates.push_back(parse_number(trim(f[c]), lineno, header[c]));
    if (wide) {
      for (std::size_t a = 0; a < allele_cols.size(); ++a) {
        std::string cell = trim(f[allele_cols[a]]);
        if (cell.empty()) {
          row.missing = true;
        } else if (cell == "1") {
          row.wide_mask |= AlleleMask{1} << a;
        } else if (cell != "0") {
          throw MalformedRowError(lineno, "allele column '" + allele_names[a] +
                                              "' must be 0 or 1, found '" + cell + "'");
        }
      }
    } else {
      std::string cell = trim(f[*alleles_col]);
      if (cell.empty()) {
        row.missing = true;
      } else if (cell == "-") {
        // explicit "carries nothing", as opposed to an unknown (blank) cell
      } else {
        std::istringstream is(cell);
        std::string tok;
        while (std::getline(is, tok, ';')) {
          tok = trim(tok);
          if (tok.empty())
            throw MalformedRowError(lineno, "empty allele id in '" + cell + "'");
          row.tokens.push_back(tok);
          universe.insert(tok);
        }
      }
    }
    raw.push_back(std::move(row));
  }
  if (raw.empty()) throw Error(Errc::MalformedRow, "input has a header but no data rows");

  if (!wide) allele_names.assign(universe.begin(), universe.end());  // sorted
  if (allele_names.empty())
    throw Error(Errc::InvalidConfig, "no marker alleles found in the input");

  LoadResult lr{Dataset{AllelePanel(allele_names)}, static_cast<int>(raw.size()), 0};
  Dataset& ds = lr.dataset;
  if (cfg.trait_kind == "categorical") {
    ds.trait_kind = TraitKind::Categorical;
    ds.trait_levels = cfg.trait_levels;
    ds.reference_level =
        cfg.reference_level.empty()
            ? 0
            : static_cast<int>(std::find(cfg.trait_levels.begin(), cfg.trait_levels.end(),
                                         cfg.reference_level) -
                               cfg.trait_levels.begin());
  }
  for (const auto& c : cfg.covariate_columns) ds.covariate_names.push_back(c);

  std::set<std::string> seen_ids;
  for (const auto& row : raw) {
    if (row.missing && cfg.missing == "exclude") {
      ++lr.n_excluded_missing;
      continue;
    }
    Individual ind;
    ind.id = row.id;
    if (!seen_ids.insert(ind.id).second)
      throw Error(Errc::DuplicateId, "duplicate id '" + ind.id + "' at line " +
                                         std::to_string(row.lineno));
    if (ds.trait_kind == TraitKind::Categorical) {
      auto it = std::find(ds.trait_levels.begin(), ds.trait_levels.end(), row.trait);
      if (it == ds.trait_levels.end())
        throw Error(Errc::UnknownTraitLevel, "line " + std::to_string(row.lineno) +
                                                 ": trait level '" + row.trait +
                                                 "' is not declared");
      ind.level = static_cast<int>(it - ds.trait_levels.begin());
    } else {
      ind.trait = parse_number(row.trait, row.lineno, cfg.trait_column);
    }
    ind.covariates = row.covariates;
    if (wide) {
      ind.carried = row.wide_mask;  // under missing=absent, unknown cells just add no bits
    } else if (row.missing) {
      ind.carried = 0;
    } else {
      for (const auto& tok : row.tokens) ind.carried |= AlleleMask{1} << ds.panel.index(tok);
    }
    ds.individuals.push_back(std::move(ind));
  }
  if (ds.individuals.empty())
    throw Error(Errc::InvalidConfig, "all rows excluded by the missing-genotype policy");
  ds.validate();
  return lr;
}

ScanResult run_scan(const RunConfig& cfg) {
  cfg.validate();
  LoadResult lr = load_dataset(cfg.input_path, cfg);
  const Dataset& ds = lr.dataset;
  TraitModel tm = TraitModel::for_dataset(ds, ds.trait_kind == TraitKind::Continuous
                                                  ? cfg.family_enum()
                                                  : Family::Binomial);
  SearchOptions so;
  so.max_order = cfg.max_order == 0 ? -1 : cfg.max_order;
  so.workers = cfg.effective_workers();
  so.cap = cfg.search_cap;
  so.ignore_cap = cfg.force;
  so.penalty_c = cfg.penalty_c;

  ProfileTable pt;
  if (cfg.search == "anneal") {
    AnnealSchedule sch{cfg.anneal_t0, cfg.anneal_cooling, cfg.anneal_steps,
                       cfg.anneal_restarts};
    pt = anneal_search(ds, tm, OrderRange{1, so.max_order}, sch, cfg.seed, so);
  } else {
    pt = profile_search(ds, tm, so);
  }
  SelectionReport sel = select_model(ds, tm, pt, cfg.criterion_enum(), so.glm);
  LrtOutcome joint = joint_association_test(ds, tm, so.glm);

  ScanResult res;
  res.report = build_report(cfg, lr, tm, pt, sel, joint);
  res.profile_csv = profile_csv_text(pt, ds.panel);
  if (cfg.plot) res.profile_svg = profile_svg_text(pt);
  return res;
}

SimResult run_simulate(const SimConfig& sc) {
  if (sc.tree_path.empty()) throw Error(Errc::InvalidConfig, "no tree file given");
  if (sc.n < 1) throw Error(Errc::InvalidConfig, "population size must be >= 1");
  DichotomousTree tree = parse_tree_file(sc.tree_path);
  HaplotypeTable ht = haplotypes_from_tree(tree, sc.freqs);
  EffectModel em;
  em.family = family_from_name(sc.family);
  em.baseline = sc.baseline;
  em.effect = sc.effect;
  em.noise_sd = sc.noise_sd;
  em.covariate_effects = sc.covariate_effects;
  Dataset ds = simulate_population(ht, sc.n, em, sc.seed);

  SimResult res;
  res.csv = dataset_csv_text(ds);
  AllelePanel marker_panel(ht.marker_loci);
  AlleleMask best = best_rule(ht);
  nlohmann::ordered_json truth;
  truth["tree"] = nlohmann::ordered_json::array();
  for (const auto& ev : tree.events)
    truth["tree"].push_back({{"locus", ev.locus}, {"path", ev.path}});
  truth["region_locus"] = kRegionLocus;
  truth["haplotypes"] = nlohmann::ordered_json::array();
  for (const auto& row : ht.rows)
    truth["haplotypes"].push_back({{"name", ht.name(row)},
                                   {"frequency", row.freq},
                                   {"carries_region", row.region}});
  if (best != 0) {
    RuleEfficiency eff = rule_efficiency(ht, best);
    truth["best_rule"] = format_mag(best, marker_panel);
    truth["best_rule_minimal"] = format_mag(minimal_rule(ht, best), marker_panel);
    truth["best_rule_efficiency"] = eff.fraction().get_str();
  } else {
    truth["best_rule"] = nullptr;
    truth["best_rule_minimal"] = nullptr;
    truth["best_rule_efficiency"] = "0";
  }
  truth["effect_model"] = {{"family", sc.family},
                           {"baseline", sc.baseline},
                           {"effect", sc.effect},
                           {"noise_sd", sc.noise_sd},
                           {"covariate_effects", sc.covariate_effects}};
  truth["null_scenario"] = sc.effect == 0;
  truth["n"] = sc.n;
  truth["seed"] = sc.seed;
  res.truth = std::move(truth);
  return res;
}

int exit_code_for(const Error& e) {
  return e.code() == Errc::SearchSpaceTooLarge ? 3 : 2;
}

int cmd_scan(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  try {
    ScanResult res = run_scan(cfg);
    const std::string dir = cfg.output_dir.empty() ? "." : cfg.output_dir;
    write_file(dir + "/report.json", res.report.dump(2) + "\n");
    write_file(dir + "/profile.csv", res.profile_csv);
    if (cfg.plot) write_file(dir + "/profile.svg", res.profile_svg);
    const auto& sel = res.report["selection"];
    out << "n=" << res.report["dataset"]["n"] << " h=" << res.report["dataset"]["h"]
        << " criterion=" << sel["criterion"].get<std::string>() << "\n";
    out << "chosen order " << sel["chosen_order"] << ": "
        << sel["chosen_grouping"].get<std::string>() << "\n";
    out << "joint test p=" << res.report["joint_test"]["p_value"] << "\n";
    out << "wrote " << dir << "/report.json, " << dir << "/profile.csv";
    if (cfg.plot) out << ", " << dir << "/profile.svg";
    out << "\n";
    return 0;
  } catch (const Error& e) {
    err << "magscan: error: " << e.what() << "\n";
    return exit_code_for(e);
  }
}

int cmd_simulate(const SimConfig& sc, std::ostream& out, std::ostream& err) {
  try {
    SimResult res = run_simulate(sc);
    write_file(sc.out_csv, res.csv);
    write_file(sc.out_truth, res.truth.dump(2) + "\n");
    out << "wrote " << sc.out_csv << " (" << sc.n << " individuals) and " << sc.out_truth
        << "\n";
    return 0;
  } catch (const Error& e) {
    err << "magscan: error: " << e.what() << "\n";
    return exit_code_for(e);
  }
}

int cmd_count(int h, std::optional<int> j, std::ostream& out, std::ostream& err) {
  try {
    if (j) {
      out << count_groupings(h, *j).get_str() << "\n";
    } else {
      for (int order = 1; order <= h; ++order)
        out << "j=" << order << ": " << count_groupings(h, order).get_str() << "\n";
      out << "total: " << count_groupings_up_to(h, h).get_str() << "\n";
    }
    return 0;
  } catch (const Error& e) {
    err << "magscan: error: " << e.what() << "\n";
    return exit_code_for(e);
  }
}

int cmd_selftest(std::ostream& out) {
  int failures = 0;
  auto check = [&](const std::string& name, bool ok) {
    out << (ok ? "ok   " : "FAIL ") << name << "\n";
    if (!ok) ++failures;
  };
  try {
    check("count: h=8 total is 21146", count_groupings_up_to(8, 8) == 21146);
    {
      int n = 0;
      for_each_grouping(5, 2, [&](const Grouping&) { ++n; });
      check("count: h=5 j=2 stream length matches", count_groupings(5, 2) == n);
    }
    {
      DesignMatrix d;
      d.X = Eigen::MatrixXd::Ones(3, 1);
      d.rank = 1;
      Eigen::VectorXd y(3);
      y << 1, 2, 3;
      FitResult fr = fit_glm(d, y, Family::Gaussian);
      check("glm: intercept-only gaussian mean",
            std::abs(fr.coefficients[0] - 2.0) < 1e-12 && std::abs(fr.deviance - 2.0) < 1e-12);
    }
    {
      std::istringstream ts("locus=R path=\nlocus=A path=V\nlocus=B path=Vw\n");
      DichotomousTree t = parse_tree(ts);
      HaplotypeTable ht = haplotypes_from_tree(t);
      bool names_ok = ht.rows.size() == 4 && ht.name(ht.rows[0]) == "AbR" &&
                      ht.name(ht.rows[1]) == "aBR" && ht.name(ht.rows[2]) == "abR" &&
                      ht.name(ht.rows[3]) == "abr";
      check("phylo: fig-2A haplotypes", names_ok);
      RuleEfficiency eff = rule_efficiency(ht, ht.marker_mask("A") | ht.marker_mask("B"));
      check("phylo: rule {A,B} detects 2/3",
            eff.detected == 2 && eff.total_r == 3 && eff.fraction() == mpq_class(2, 3));
      EffectModel em;
      em.effect = 3.0;
      em.noise_sd = 0.5;
      Dataset ds1 = simulate_population(ht, 80, em, 42);
      Dataset ds2 = simulate_population(ht, 80, em, 42);
      check("simulate: identical seeds give identical data",
            dataset_csv_text(ds1) == dataset_csv_text(ds2));
      TraitModel tm = TraitModel::for_dataset(ds1, Family::Gaussian);
      ProfileTable pt = profile_search(ds1, tm);
      check("search: profile has one entry per order",
            pt.entries.size() == static_cast<std::size_t>(ds1.panel.size()));
      // diploid sampling makes carried-sets overlap, so the profile need not be
      // monotone in j; the null model is nested in every grouping design though
      bool dominates = true;
      for (const auto& e : pt.entries)
        dominates = dominates && std::isfinite(e.loglik) &&
                    e.loglik >= pt.null_loglik - 1e-6;
      check("search: every profile entry beats the null fit", dominates);
    }
  } catch (const std::exception& e) {
    out << "FAIL unexpected exception: " << e.what() << "\n";
    ++failures;
  }
  out << (failures == 0 ? "selftest: all checks passed\n" : "selftest: FAILED\n");
  return failures == 0 ? 0 : 1;
}

}  // namespace magscan
