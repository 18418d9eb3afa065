#include "magscan/search.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <thread>

namespace magscan {

TraitModel TraitModel::for_dataset(const Dataset& ds, Family family_if_continuous) {
  TraitModel tm;
  if (ds.trait_kind == TraitKind::Categorical) {
    tm.categorical = true;
    tm.family = Family::Binomial;
  } else {
    tm.family = family_if_continuous;
  }
  return tm;
}

GroupFit fit_grouping(const Dataset& ds, const TraitModel& tm, const Grouping& g,
                      const GlmControl& ctl) {
  DesignMatrix d = build_design(ds, g, ctl.rank_tol);
  if (tm.categorical) {
    MultiFit mf = fit_baseline_logits(d, level_vector(ds),
                                      static_cast<int>(ds.trait_levels.size()),
                                      ds.reference_level, ctl);
    return GroupFit{mf.log_likelihood, mf.k};
  }
  FitResult fr = fit_glm(d, response_vector(ds), tm.family, ctl);
  return GroupFit{fr.log_likelihood, fr.k};
}

const ProfileEntry* ProfileTable::entry(int order) const {
  for (const auto& e : entries)
    if (e.order == order) return &e;
  return nullptr;
}

const char* criterion_name(Criterion c) { return c == Criterion::Aic ? "aic" : "alt"; }

Criterion criterion_from_name(const std::string& name) {
  if (name == "aic") return Criterion::Aic;
  if (name == "alt") return Criterion::Alt;
  throw Error(Errc::InvalidConfig, "unknown criterion '" + name + "' (expected aic or alt)");
}

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Candidates a worker must remember: strictly increasing log-likelihood along
// its (ascending) index range.  A later grouping with ll <= an earlier one can
// never be the canonical-first winner, and entries more than tie_eps below the
// running maximum can never qualify, so both are dropped as they appear.
struct NearMax {
  struct Item {
    double loglik;
    std::uint64_t seq;
  };
  std::vector<Item> items;
  double max_ll = kNegInf;

  void offer(double ll, std::uint64_t seq, double eps) {
    if (!items.empty() && ll <= items.back().loglik) return;  // dominated
    items.push_back({ll, seq});
    if (ll > max_ll) {
      max_ll = ll;
      std::size_t keep = 0;
      while (keep < items.size() && items[keep].loglik < max_ll - eps) ++keep;
      if (keep > 0) items.erase(items.begin(), items.begin() + keep);
    }
  }
};

struct WorkerState {
  NearMax near;
  std::uint64_t n_fitted = 0;
  std::uint64_t n_degenerate = 0;
  std::uint64_t n_fit_errors = 0;
  std::exception_ptr error;
};

// Degenerate designs (including rank loss appearing only inside a categorical
// sub-fit) are skipped; separation and non-convergence are skipped separately.
enum class FitClass { Ok, Degenerate, FitError };

FitClass classify_and_fit(const Dataset& ds, const TraitModel& tm, const Grouping& g,
                          const GlmControl& ctl, double& ll_out) {
  try {
    ll_out = fit_grouping(ds, tm, g, ctl).loglik;
    return FitClass::Ok;
  } catch (const DegenerateDesignError&) {
    return FitClass::Degenerate;
  } catch (const Error& e) {
    if (e.code() == Errc::RankDeficient) return FitClass::Degenerate;
    if (e.code() == Errc::Separation || e.code() == Errc::NoConvergence)
      return FitClass::FitError;
    throw;
  }
}

int order_k(const Dataset& ds, const TraitModel& tm, int j) {
  int p = 1 + ds.n_covariates() + j;
  if (tm.categorical) return (static_cast<int>(ds.trait_levels.size()) - 1) * p;
  return p + (tm.family == Family::Gaussian ? 1 : 0);
}

Grouping grouping_at(int h, int order, std::uint64_t seq) {
  GroupingStream s(h, order);
  Grouping g;
  for (std::uint64_t i = 0; i <= seq; ++i)
    if (!s.next(g)) throw Error(Errc::InvalidConfig, "enumeration index out of range");
  return g;
}

ProfileEntry scan_order(const Dataset& ds, const TraitModel& tm, int j,
                        std::uint64_t n_groupings, const SearchOptions& opts) {
  const int h = ds.panel.size();
  const int n_workers =
      static_cast<int>(std::min<std::uint64_t>(std::max(1, opts.workers), n_groupings));
  std::vector<WorkerState> states(n_workers);

  auto run_worker = [&](int w) {
    WorkerState& st = states[w];
    try {
      const std::uint64_t begin = n_groupings * w / n_workers;
      const std::uint64_t end = n_groupings * (w + 1) / n_workers;
      GroupingStream stream(h, j);
      Grouping g;
      for (std::uint64_t i = 0; i < begin; ++i) stream.next(g);
      for (std::uint64_t seq = begin; seq < end; ++seq) {
        stream.next(g);
        double ll;
        switch (classify_and_fit(ds, tm, g, opts.glm, ll)) {
          case FitClass::Ok:
            ++st.n_fitted;
            st.near.offer(ll, seq, opts.tie_eps);
            break;
          case FitClass::Degenerate:
            ++st.n_degenerate;
            break;
          case FitClass::FitError:
            ++st.n_fit_errors;
            break;
        }
      }
    } catch (...) {
      st.error = std::current_exception();
    }
  };

  if (n_workers == 1) {
    run_worker(0);
  } else {
    std::vector<std::thread> threads;
    threads.reserve(n_workers);
    for (int w = 0; w < n_workers; ++w) threads.emplace_back(run_worker, w);
    for (auto& t : threads) t.join();
  }
  for (const auto& st : states)
    if (st.error) std::rethrow_exception(st.error);

  ProfileEntry e;
  e.order = j;
  e.k = order_k(ds, tm, j);
  double max_ll = kNegInf;
  for (const auto& st : states) {
    e.n_fitted += st.n_fitted;
    e.n_skipped_degenerate += st.n_degenerate;
    e.n_fit_errors += st.n_fit_errors;
    max_ll = std::max(max_ll, st.near.max_ll);
  }
  if (e.n_fitted == 0)
    throw Error(Errc::AllDegenerate,
                "no order-" + std::to_string(j) + " grouping is fittable");
  std::uint64_t winner = std::numeric_limits<std::uint64_t>::max();
  for (const auto& st : states)
    for (const auto& item : st.near.items)
      if (item.loglik >= max_ll - opts.tie_eps) winner = std::min(winner, item.seq);
  e.loglik = max_ll;
  e.best_grouping = grouping_at(h, j, winner);
  e.aic = -2.0 * (e.loglik - e.k);
  e.alt_score = e.loglik - opts.penalty_c * e.k;
  return e;
}

}  // namespace

ProfileTable profile_search(const Dataset& ds, const TraitModel& tm,
                            const SearchOptions& opts) {
  ds.validate();
  const int h = ds.panel.size();
  const int max_order = opts.max_order <= 0 ? h : opts.max_order;
  if (max_order < 1 || max_order > h)
    throw Error(Errc::OrderOutOfRange, "max order " + std::to_string(max_order) +
                                           " outside [1, " + std::to_string(h) + "]");

  mpz_class total = count_groupings_up_to(h, max_order);
  const std::string count = total.get_str();
  if (!opts.ignore_cap && total > static_cast<unsigned long>(opts.cap))
    throw SearchSpaceError(count, "search space has " + count +
                                      " groupings, over the cap of " +
                                      std::to_string(opts.cap) +
                                      "; raise the cap or use the annealed search");
  if (!total.fits_ulong_p())
    throw SearchSpaceError(count, "search space has " + count +
                                      " groupings; too large to enumerate");

  ProfileTable pt;
  pt.penalty_c = opts.penalty_c;
  GroupFit null_fit = fit_grouping(ds, tm, Grouping{}, opts.glm);
  pt.null_loglik = null_fit.loglik;
  pt.null_k = null_fit.k;
  for (int j = 1; j <= max_order; ++j) {
    std::uint64_t n_j = mpz_class(count_groupings(h, j)).get_ui();
    pt.entries.push_back(scan_order(ds, tm, j, n_j, opts));
  }
  return pt;
}

namespace {

LrtOutcome lrt_from_parts(double ll_full, int k_full, double ll_reduced, int k_reduced) {
  int df = k_full - k_reduced;
  if (df <= 0) throw Error(Errc::NotNested, "models are not nested (df <= 0)");
  double stat = 2 * (ll_full - ll_reduced);
  if (stat < -1e-6)
    throw Error(Errc::NegativeStatistic, "likelihood ratio statistic " +
                                             std::to_string(stat) + " is negative");
  stat = std::max(stat, 0.0);
  return LrtOutcome{stat, df, chi_square_sf(stat, df)};
}

std::vector<EffectRow> effect_rows(const Dataset& ds, const TraitModel& tm,
                                   const Grouping& g, const DesignMatrix& d,
                                   const GlmControl& ctl) {
  std::vector<EffectRow> rows;
  auto direction = [](double est) {
    if (est > 0) return "increases";
    if (est < 0) return "decreases";
    return "none";
  };
  const int base = 1 + d.n_covariates;
  if (tm.categorical) {
    MultiFit mf = fit_baseline_logits(d, level_vector(ds),
                                      static_cast<int>(ds.trait_levels.size()),
                                      ds.reference_level, ctl);
    for (std::size_t s = 0; s < mf.sub_fits.size(); ++s)
      for (int m = 0; m < g.order(); ++m) {
        double est = mf.sub_fits[s].coefficients[base + m];
        rows.push_back(EffectRow{format_mag(g.mags[m], ds.panel),
                                 ds.trait_levels[mf.levels[s]], est, direction(est)});
      }
  } else {
    FitResult fr = fit_glm(d, response_vector(ds), tm.family, ctl);
    for (int m = 0; m < g.order(); ++m) {
      double est = fr.coefficients[base + m];
      rows.push_back(EffectRow{format_mag(g.mags[m], ds.panel), "", est, direction(est)});
    }
  }
  return rows;
}

}  // namespace

const ProfileEntry& choose_entry(const ProfileTable& pt, Criterion criterion) {
  if (pt.entries.empty()) throw Error(Errc::InvalidConfig, "empty profile table");
  // aic differences are twice log-likelihood differences, hence the 2x epsilon
  const double eps_aic = 2e-9, eps_alt = 1e-9;
  const ProfileEntry* best = &pt.entries.front();
  for (const auto& e : pt.entries) {
    if (criterion == Criterion::Aic ? e.aic < best->aic - eps_aic
                                    : e.alt_score > best->alt_score + eps_alt)
      best = &e;
  }
  return *best;
}

SelectionReport select_model(const Dataset& ds, const TraitModel& tm,
                             const ProfileTable& pt, Criterion criterion,
                             const GlmControl& ctl) {
  const ProfileEntry* best = &choose_entry(pt, criterion);
  SelectionReport rep;
  rep.criterion = criterion;
  rep.penalty_c = pt.penalty_c;
  rep.chosen_order = best->order;
  rep.chosen_grouping = best->best_grouping;
  rep.loglik = best->loglik;
  rep.k = best->k;
  rep.aic = best->aic;
  rep.alt_score = best->alt_score;
  DesignMatrix d = build_design(ds, best->best_grouping, ctl.rank_tol);
  rep.effects = effect_rows(ds, tm, best->best_grouping, d, ctl);
  rep.lrt_vs_null = lrt_from_parts(best->loglik, best->k, pt.null_loglik, pt.null_k);
  return rep;
}

LrtOutcome joint_association_test(const Dataset& ds, const TraitModel& tm,
                                  const GlmControl& ctl) {
  ds.validate();
  const int h = ds.panel.size();
  const int n = ds.n();
  const int kx = ds.n_covariates();

  Eigen::MatrixXd base(n, 1 + kx);
  base.col(0).setOnes();
  for (int c = 0; c < kx; ++c)
    for (int i = 0; i < n; ++i) base(i, 1 + c) = ds.individuals[i].covariates[c];
  int base_rank = matrix_rank(base, ctl.rank_tol);
  if (base_rank < base.cols())
    throw DegenerateDesignError(DegeneracyCause::Collinear, "covariate-only design is rank-deficient");

  // Deterministic prune: keep each singleton indicator only if it raises the
  // rank of what has been kept so far (drops constant, duplicated, and
  // collinear columns in panel order).
  std::vector<int> kept;
  Eigen::MatrixXd cur = base;
  for (int a = 0; a < h; ++a) {
    Eigen::MatrixXd aug(n, cur.cols() + 1);
    aug.leftCols(cur.cols()) = cur;
    aug.col(cur.cols()) = mag_indicator(ds, AlleleMask{1} << a);
    if (matrix_rank(aug, ctl.rank_tol) == cur.cols() + 1) {
      kept.push_back(a);
      cur = std::move(aug);
    }
  }
  if (kept.empty())
    throw Error(Errc::AllDegenerate, "no allele indicator adds information to the null design");

  DesignMatrix d0{base, kx, 0, base_rank};
  DesignMatrix d1{cur, kx, static_cast<int>(kept.size()), static_cast<int>(cur.cols())};
  if (tm.categorical) {
    const auto lev = level_vector(ds);
    const int C = static_cast<int>(ds.trait_levels.size());
    MultiFit full = fit_baseline_logits(d1, lev, C, ds.reference_level, ctl);
    MultiFit red = fit_baseline_logits(d0, lev, C, ds.reference_level, ctl);
    return lrt_from_parts(full.log_likelihood, full.k, red.log_likelihood, red.k);
  }
  const auto y = response_vector(ds);
  FitResult full = fit_glm(d1, y, tm.family, ctl);
  FitResult red = fit_glm(d0, y, tm.family, ctl);
  return lrt(full, red);
}

}  // namespace magscan
