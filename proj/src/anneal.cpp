#include <bit>
#include <cmath>
#include <limits>
#include <map>
#include <random>
#include <unordered_map>

#include "magscan/search.hpp"

namespace magscan {

namespace {

// All stochastic choices go through these two helpers so the chain is a pure
// function of the seed (std::uniform_int_distribution is not portable).
struct Chain {
  std::mt19937_64 rng;
  std::uint64_t pick(std::uint64_t n) { return rng() % n; }
  double uniform() { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }
};

std::vector<int> mask_bits(AlleleMask m) {
  std::vector<int> bits;
  for (int i = 0; i < kMaxPanelSize; ++i)
    if (m & (AlleleMask{1} << i)) bits.push_back(i);
  return bits;
}

Grouping random_grouping(Chain& ch, int h, int order) {
  for (int attempt = 0; attempt < 64; ++attempt) {
    std::vector<AlleleMask> blocks(order, 0);
    for (int a = 0; a < h; ++a) {
      int b = static_cast<int>(ch.pick(order + 1));
      if (b > 0) blocks[b - 1] |= AlleleMask{1} << a;
    }
    bool ok = true;
    for (AlleleMask m : blocks) ok = ok && m != 0;
    if (ok) return canonical_form(std::move(blocks));
  }
  std::vector<AlleleMask> singles;
  for (int a = 0; a < order; ++a) singles.push_back(AlleleMask{1} << a);
  return canonical_form(std::move(singles));
}

enum class MoveKind { Between, InOut, Split, Merge };

std::optional<Grouping> propose(Chain& ch, const Grouping& cur, AlleleMask panel_mask,
                                int min_order, int max_order) {
  const int j = cur.order();
  const AlleleMask unused = panel_mask & ~cur.union_mask();
  const int n_unused = std::popcount(unused);

  std::vector<int> big;  // mags with >= 2 alleles
  for (int m = 0; m < j; ++m)
    if (std::popcount(cur.mags[m]) >= 2) big.push_back(m);

  // in/out micro-moves: each unused allele into each existing MAG, each unused
  // allele as a fresh singleton (order permitting), each removable allele out
  std::uint64_t in_existing = static_cast<std::uint64_t>(n_unused) * j;
  std::uint64_t in_fresh = j < max_order ? n_unused : 0;
  std::uint64_t outs = 0;
  for (int m = 0; m < j; ++m) {
    int sz = std::popcount(cur.mags[m]);
    if (sz >= 2) outs += sz;
    else if (j > min_order) outs += 1;
  }

  std::vector<MoveKind> kinds;
  if (j >= 2 && !big.empty()) kinds.push_back(MoveKind::Between);
  if (in_existing + in_fresh + outs > 0) kinds.push_back(MoveKind::InOut);
  if (!big.empty() && j < max_order) kinds.push_back(MoveKind::Split);
  if (j >= 2 && j > min_order) kinds.push_back(MoveKind::Merge);
  if (kinds.empty()) return std::nullopt;

  std::vector<AlleleMask> mags = cur.mags;
  switch (kinds[ch.pick(kinds.size())]) {
    case MoveKind::Between: {
      int donor = big[ch.pick(big.size())];
      auto bits = mask_bits(mags[donor]);
      int allele = bits[ch.pick(bits.size())];
      int target = static_cast<int>(ch.pick(j - 1));
      if (target >= donor) ++target;
      mags[donor] &= ~(AlleleMask{1} << allele);
      mags[target] |= AlleleMask{1} << allele;
      break;
    }
    case MoveKind::InOut: {
      std::uint64_t r = ch.pick(in_existing + in_fresh + outs);
      if (r < in_existing) {
        auto bits = mask_bits(unused);
        int allele = bits[r / j];
        int target = static_cast<int>(r % j);
        mags[target] |= AlleleMask{1} << allele;
      } else if (r < in_existing + in_fresh) {
        auto bits = mask_bits(unused);
        mags.push_back(AlleleMask{1} << bits[r - in_existing]);
      } else {
        std::uint64_t q = r - in_existing - in_fresh;
        for (int m = 0; m < j; ++m) {
          int sz = std::popcount(mags[m]);
          std::uint64_t options = sz >= 2 ? sz : (j > min_order ? 1 : 0);
          if (q < options) {
            auto bits = mask_bits(mags[m]);
            int allele = bits[q];
            mags[m] &= ~(AlleleMask{1} << allele);
            if (mags[m] == 0) mags.erase(mags.begin() + m);
            break;
          }
          q -= options;
        }
      }
      break;
    }
    case MoveKind::Split: {
      int donor = big[ch.pick(big.size())];
      auto bits = mask_bits(mags[donor]);
      const int sz = static_cast<int>(bits.size());
      AlleleMask part = 0;
      if (sz <= 20) {
        std::uint64_t pattern = 1 + ch.pick((std::uint64_t{1} << sz) - 2);
        for (int b = 0; b < sz; ++b)
          if (pattern & (std::uint64_t{1} << b)) part |= AlleleMask{1} << bits[b];
      } else {
        part = AlleleMask{1} << bits[ch.pick(sz)];
      }
      mags[donor] &= ~part;
      mags.push_back(part);
      break;
    }
    case MoveKind::Merge: {
      int a = static_cast<int>(ch.pick(j));
      int b = static_cast<int>(ch.pick(j - 1));
      if (b >= a) ++b;
      mags[a] |= mags[b];
      mags.erase(mags.begin() + b);
      break;
    }
  }
  return canonical_form(std::move(mags));
}

int order_params(const Dataset& ds, const TraitModel& tm, int j) {
  int p = 1 + ds.n_covariates() + j;
  if (tm.categorical) return (static_cast<int>(ds.trait_levels.size()) - 1) * p;
  return p + (tm.family == Family::Gaussian ? 1 : 0);
}

struct OrderBest {
  double loglik = -std::numeric_limits<double>::infinity();
  Grouping grouping;
};

struct OrderCounts {
  std::uint64_t fitted = 0, degenerate = 0, fit_errors = 0;
};

// Memoized evaluation: a chain revisits groupings constantly, and counts are
// over distinct groupings attempted, not chain steps.
struct Evaluator {
  const Dataset& ds;
  const TraitModel& tm;
  const GlmControl& ctl;
  std::unordered_map<Grouping, double, GroupingHash> cache;
  std::map<int, OrderCounts> counts;

  double eval(const Grouping& g) {
    auto it = cache.find(g);
    if (it != cache.end()) return it->second;
    double ll = std::numeric_limits<double>::quiet_NaN();
    OrderCounts& oc = counts[g.order()];
    try {
      ll = fit_grouping(ds, tm, g, ctl).loglik;
      ++oc.fitted;
    } catch (const DegenerateDesignError&) {
      ++oc.degenerate;
    } catch (const Error& e) {
      if (e.code() == Errc::RankDeficient)
        ++oc.degenerate;
      else if (e.code() == Errc::Separation || e.code() == Errc::NoConvergence)
        ++oc.fit_errors;
      else
        throw;
    }
    cache.emplace(g, ll);
    return ll;
  }
};

}  // namespace

ProfileTable anneal_search(const Dataset& ds, const TraitModel& tm,
                           const OrderRange& range, const AnnealSchedule& schedule,
                           std::uint64_t seed, const SearchOptions& opts,
                           const std::optional<Grouping>& initial) {
  ds.validate();
  const int h = ds.panel.size();
  const int min_order = range.min_order;
  const int max_order = range.max_order <= 0 ? h : range.max_order;
  if (min_order < 1 || min_order > max_order || max_order > h)
    throw Error(Errc::OrderOutOfRange,
                "order range [" + std::to_string(min_order) + ", " +
                    std::to_string(max_order) + "] invalid for panel of " +
                    std::to_string(h));
  if (initial && (initial->order() < min_order || initial->order() > max_order))
    throw Error(Errc::OrderOutOfRange, "initial grouping outside the order range");

  ProfileTable pt;
  pt.penalty_c = opts.penalty_c;
  pt.approximate = true;
  GroupFit null_fit = fit_grouping(ds, tm, Grouping{}, opts.glm);
  pt.null_loglik = null_fit.loglik;
  pt.null_k = null_fit.k;

  Chain ch{std::mt19937_64(seed)};
  Evaluator ev{ds, tm, opts.glm, {}, {}};
  std::map<int, OrderBest> bests;
  auto note = [&](const Grouping& g, double ll) {
    if (std::isnan(ll)) return;
    OrderBest& b = bests[g.order()];
    if (ll > b.loglik) {
      b.loglik = ll;
      b.grouping = g;
    }
  };

  const int restarts = std::max(1, schedule.restarts);
  const AlleleMask panel_mask = ds.panel.full_mask();
  for (int r = 0; r < restarts; ++r) {
    Grouping cur;
    double cur_ll = std::numeric_limits<double>::quiet_NaN();
    if (initial) {
      cur = *initial;
      cur_ll = ev.eval(cur);
    } else {
      const int start_order = min_order + r % (max_order - min_order + 1);
      for (int attempt = 0; attempt < 200 && std::isnan(cur_ll); ++attempt) {
        cur = random_grouping(ch, h, start_order);
        cur_ll = ev.eval(cur);
      }
    }
    if (std::isnan(cur_ll)) continue;
    note(cur, cur_ll);

    double t = schedule.t0;
    for (int step = 0; step < schedule.steps; ++step) {
      auto prop = propose(ch, cur, panel_mask, min_order, max_order);
      if (!prop) break;  // no applicable move from this state
      double ll = ev.eval(*prop);
      note(*prop, ll);
      if (!std::isnan(ll)) {
        double delta = ll - cur_ll;
        bool accept = delta > 0 ||
                      (t > 0 && ch.uniform() < std::exp(delta / t));
        if (accept) {
          cur = *prop;
          cur_ll = ll;
        }
      }
      t *= schedule.cooling;
    }
  }

  if (bests.empty())
    throw Error(Errc::AllDegenerate, "annealer found no fittable grouping");
  for (const auto& [order, best] : bests) {
    ProfileEntry e;
    e.order = order;
    e.best_grouping = best.grouping;
    e.loglik = best.loglik;
    e.k = order_params(ds, tm, order);
    e.aic = -2.0 * (e.loglik - e.k);
    e.alt_score = e.loglik - pt.penalty_c * e.k;
    const OrderCounts& oc = ev.counts[order];
    e.n_fitted = oc.fitted;
    e.n_skipped_degenerate = oc.degenerate;
    e.n_fit_errors = oc.fit_errors;
    pt.entries.push_back(std::move(e));
  }
  return pt;
}

}  // namespace magscan
