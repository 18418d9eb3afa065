#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "magscan/design.hpp"
#include "magscan/glm.hpp"
#include "magscan/grouping.hpp"

namespace magscan {

// How the trait enters the likelihood: a single GLM for continuous traits, or
// baseline-category logits (reference from the dataset) for categorical ones.
struct TraitModel {
  Family family = Family::Gaussian;
  bool categorical = false;

  static TraitModel for_dataset(const Dataset& ds, Family family_if_continuous);
};

// Log-likelihood and parameter count of one grouping's model on a dataset.
struct GroupFit {
  double loglik = 0.0;
  int k = 0;
};

GroupFit fit_grouping(const Dataset& ds, const TraitModel& tm, const Grouping& g,
                      const GlmControl& ctl = {});

struct ProfileEntry {
  int order = 0;
  Grouping best_grouping;
  double loglik = 0.0;
  int k = 0;
  double aic = 0.0;
  double alt_score = 0.0;
  std::uint64_t n_fitted = 0;
  std::uint64_t n_skipped_degenerate = 0;
  std::uint64_t n_fit_errors = 0;  // separation / non-convergence, skipped
};

struct ProfileTable {
  double null_loglik = 0.0;  // order-0 model: intercept + covariates
  int null_k = 0;
  std::vector<ProfileEntry> entries;  // ascending order j
  double penalty_c = 3.85;
  bool approximate = false;  // true when produced by anneal_search

  const ProfileEntry* entry(int order) const;
};

struct SearchOptions {
  int max_order = -1;  // <= 0: panel size
  int workers = 1;
  std::uint64_t cap = 10'000'000;  // exhaustive-search size cap
  bool ignore_cap = false;
  double tie_eps = 1e-9;
  double penalty_c = 3.85;
  GlmControl glm;
};

// Exhaustive per-order maximization.  Byte-identical output for any worker
// count: the reduction tracks enumeration indices and resolves log-likelihood
// ties within tie_eps toward the canonical-first (lowest-index) grouping.
ProfileTable profile_search(const Dataset& ds, const TraitModel& tm,
                            const SearchOptions& opts = {});

enum class Criterion { Aic, Alt };
const char* criterion_name(Criterion c);
Criterion criterion_from_name(const std::string& name);

struct EffectRow {
  std::string mag;    // textual MAG, e.g. "{276bp,297bp}"
  std::string level;  // categorical sub-fit level; empty for continuous
  double estimate = 0.0;
  std::string direction;  // "increases" | "decreases" | "none"
};

struct SelectionReport {
  Criterion criterion = Criterion::Aic;
  double penalty_c = 3.85;
  int chosen_order = 0;
  Grouping chosen_grouping;
  double loglik = 0.0;
  int k = 0;
  double aic = 0.0;
  double alt_score = 0.0;
  std::vector<EffectRow> effects;
  LrtOutcome lrt_vs_null;  // chosen grouping's model against the order-0 model
};

// Picks the winning row of a profile table: smallest AIC or largest alternative
// score, ties to the smaller order.
const ProfileEntry& choose_entry(const ProfileTable& pt, Criterion criterion);

// Chooses over orders j >= 1; ties go to the smaller j (the per-order winner is
// already canonical-first).  Uses the penalty the table was built with.
SelectionReport select_model(const Dataset& ds, const TraitModel& tm,
                             const ProfileTable& pt, Criterion criterion,
                             const GlmControl& ctl = {});

// Eq-1-style joint test: all singleton indicators (degenerate columns pruned
// deterministically) against the covariate-only model; df = retained columns
// (summed over sub-fits for categorical traits).
LrtOutcome joint_association_test(const Dataset& ds, const TraitModel& tm,
                                  const GlmControl& ctl = {});

struct AnnealSchedule {
  double t0 = 2.0;
  double cooling = 0.999;  // per-step multiplicative factor
  int steps = 20000;
  int restarts = 4;
};

struct OrderRange {
  int min_order = 1;
  int max_order = -1;  // -1: panel size
};

// Stochastic ascent over groupings; per-order bests tracked along the chain.
// Deterministic for a given seed.  Result flagged approximate=true; orders the
// chain never visited are absent from the table.  When `initial` is given,
// every restart begins from that grouping instead of a random one.
ProfileTable anneal_search(const Dataset& ds, const TraitModel& tm,
                           const OrderRange& range, const AnnealSchedule& schedule,
                           std::uint64_t seed, const SearchOptions& opts = {},
                           const std::optional<Grouping>& initial = {});

}  // namespace magscan
