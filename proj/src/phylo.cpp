#include "magscan/phylo.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include "magscan/rng.hpp"

namespace magscan {

void DichotomousTree::validate() const {
  std::unordered_set<std::string> loci;
  std::unordered_set<std::string> leaves{""};
  for (const auto& ev : events) {
    if (ev.locus.empty()) throw Error(Errc::InvalidTree, "event with empty locus id");
    if (!loci.insert(ev.locus).second)
      throw Error(Errc::InvalidTree, "locus '" + ev.locus + "' has more than one event");
    for (char c : ev.path)
      if (c != 'V' && c != 'w')
        throw Error(Errc::InvalidBranchPath,
                    "path '" + ev.path + "' contains characters other than V/w");
    if (!leaves.erase(ev.path))
      throw Error(Errc::InvalidBranchPath,
                  "path '" + ev.path + "' is not a leaf of the tree built so far");
    leaves.insert(ev.path + "V");
    leaves.insert(ev.path + "w");
  }
  if (loci.find(kRegionLocus) == loci.end())
    throw Error(Errc::InvalidTree,
                std::string("tree has no event for the region locus '") + kRegionLocus + "'");
}

std::vector<std::string> DichotomousTree::marker_loci() const {
  std::vector<std::string> out;
  for (const auto& ev : events)
    if (ev.locus != kRegionLocus) out.push_back(ev.locus);
  return out;
}

DichotomousTree parse_tree(std::istream& in) {
  DichotomousTree t;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string trimmed = line;
    trimmed.erase(0, trimmed.find_first_not_of(" \t\r"));
    if (trimmed.empty() || trimmed[0] == '#') continue;
    std::istringstream is(trimmed);
    std::string tok;
    BranchEvent ev;
    bool have_locus = false, have_path = false;
    while (is >> tok) {
      if (tok.rfind("locus=", 0) == 0) {
        ev.locus = tok.substr(6);
        have_locus = true;
      } else if (tok.rfind("path=", 0) == 0) {
        ev.path = tok.substr(5);
        have_path = true;
      } else {
        throw Error(Errc::InvalidTree, "line " + std::to_string(lineno) +
                                           ": unexpected token '" + tok + "'");
      }
    }
    if (!have_locus || !have_path)
      throw Error(Errc::InvalidTree, "line " + std::to_string(lineno) +
                                         ": expected 'locus=<id> path=<V/w string>'");
    t.events.push_back(std::move(ev));
  }
  t.validate();
  return t;
}

DichotomousTree parse_tree_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::IoFailure, "cannot open tree file '" + path + "'");
  return parse_tree(in);
}

std::string format_tree(const DichotomousTree& t) {
  std::ostringstream os;
  for (const auto& ev : t.events) os << "locus=" << ev.locus << " path=" << ev.path << "\n";
  return os.str();
}

std::string HaplotypeTable::name(const HaplotypeRow& row) const {
  auto cased = [](const std::string& locus, bool variant) {
    std::string s = locus;
    for (char& c : s)
      c = variant ? static_cast<char>(std::toupper(static_cast<unsigned char>(c)))
                  : static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
  };
  std::string out;
  for (std::size_t i = 0; i < marker_loci.size(); ++i)
    out += cased(marker_loci[i], row.markers & (AlleleMask{1} << i));
  out += cased(kRegionLocus, row.region);
  return out;
}

AlleleMask HaplotypeTable::marker_mask(const std::string& locus) const {
  for (std::size_t i = 0; i < marker_loci.size(); ++i)
    if (marker_loci[i] == locus) return AlleleMask{1} << i;
  throw Error(Errc::UnknownAllele, "locus '" + locus + "' is not a marker locus of the tree");
}

namespace {

struct Leaf {
  std::string path;
  AlleleMask markers = 0;
  bool region = false;
};

}  // namespace

HaplotypeTable haplotypes_from_tree(const DichotomousTree& t) {
  return haplotypes_from_tree(t, {});
}

HaplotypeTable haplotypes_from_tree(const DichotomousTree& t,
                                    const std::vector<double>& freqs) {
  t.validate();
  HaplotypeTable ht;
  ht.marker_loci = t.marker_loci();
  if (static_cast<int>(ht.marker_loci.size()) > kMaxPanelSize)
    throw Error(Errc::PanelTooLarge, "tree has more than " +
                                         std::to_string(kMaxPanelSize) + " marker loci");

  // Each event replaces its leaf with [variant child, wild child] in place, so
  // the final list order matches the narrative order of the figures.
  std::vector<Leaf> leaves{Leaf{}};
  for (const auto& ev : t.events) {
    auto it = std::find_if(leaves.begin(), leaves.end(),
                           [&](const Leaf& l) { return l.path == ev.path; });
    Leaf parent = *it;
    Leaf vchild = parent, wchild = parent;
    vchild.path += 'V';
    wchild.path += 'w';
    if (ev.locus == kRegionLocus) {
      vchild.region = true;
    } else {
      auto pos = std::find(ht.marker_loci.begin(), ht.marker_loci.end(), ev.locus);
      vchild.markers |= AlleleMask{1} << (pos - ht.marker_loci.begin());
    }
    *it = vchild;
    leaves.insert(it + 1, wchild);
  }

  const std::size_t L = leaves.size();
  std::vector<double> f = freqs;
  if (f.empty()) {
    f.assign(L, 1.0 / static_cast<double>(L));
  } else {
    if (f.size() != L)
      throw Error(Errc::InvalidConfig, "frequency vector length " + std::to_string(f.size()) +
                                           " does not match " + std::to_string(L) + " haplotypes");
    double sum = 0;
    for (double v : f) {
      if (!(v >= 0)) throw Error(Errc::InvalidConfig, "negative haplotype frequency");
      sum += v;
    }
    if (sum <= 0) throw Error(Errc::InvalidConfig, "haplotype frequencies sum to zero");
    for (double& v : f) v /= sum;
  }
  for (std::size_t i = 0; i < L; ++i)
    ht.rows.push_back(HaplotypeRow{leaves[i].markers, leaves[i].region, f[i]});
  return ht;
}

RuleEfficiency rule_efficiency(const HaplotypeTable& ht, AlleleMask rule) {
  AlleleMask all = ht.marker_loci.empty()
                       ? 0
                       : (ht.marker_loci.size() == kMaxPanelSize
                              ? ~AlleleMask{0}
                              : (AlleleMask{1} << ht.marker_loci.size()) - 1);
  if (rule & ~all)
    throw Error(Errc::UnknownAllele, "rule references a locus outside the tree's markers");
  RuleEfficiency eff;
  for (const auto& row : ht.rows) {
    if (!row.region) continue;
    ++eff.total_r;
    if (row.markers & rule) ++eff.detected;
  }
  return eff;
}

AlleleMask best_rule(const HaplotypeTable& ht) {
  AlleleMask on_wild = 0;
  for (const auto& row : ht.rows)
    if (!row.region) on_wild |= row.markers;
  AlleleMask all = ht.marker_loci.empty()
                       ? 0
                       : (ht.marker_loci.size() == kMaxPanelSize
                              ? ~AlleleMask{0}
                              : (AlleleMask{1} << ht.marker_loci.size()) - 1);
  return all & ~on_wild;
}

AlleleMask minimal_rule(const HaplotypeTable& ht, AlleleMask rule) {
  int target = rule_efficiency(ht, rule).detected;
  AlleleMask current = rule;
  for (std::size_t i = 0; i < ht.marker_loci.size(); ++i) {
    AlleleMask bit = AlleleMask{1} << i;
    if (!(current & bit)) continue;
    if (rule_efficiency(ht, current & ~bit).detected == target) current &= ~bit;
  }
  return current;
}

Dataset simulate_population(const HaplotypeTable& ht, int n, const EffectModel& em,
                            std::uint64_t seed) {
  if (n < 1) throw Error(Errc::InvalidConfig, "population size must be >= 1");
  Dataset ds{AllelePanel(ht.marker_loci)};
  ds.trait_kind = TraitKind::Continuous;
  for (std::size_t c = 0; c < em.covariate_effects.size(); ++c)
    ds.covariate_names.push_back("x" + std::to_string(c + 1));

  std::vector<double> cum;
  double running = 0;
  for (const auto& row : ht.rows) {
    running += row.freq;
    cum.push_back(running);
  }

  ds.individuals.reserve(n);
  for (int i = 0; i < n; ++i) {
    SplitRng rng(seed, static_cast<std::uint64_t>(i));
    int h1 = rng.next_index(cum);
    int h2 = rng.next_index(cum);
    Individual ind;
    ind.id = "ind" + std::to_string(i + 1);
    ind.carried = ht.rows[h1].markers | ht.rows[h2].markers;
    bool carries_r = ht.rows[h1].region || ht.rows[h2].region;
    double eta = em.baseline + (carries_r ? em.effect : 0.0);
    ind.covariates.resize(em.covariate_effects.size());
    for (std::size_t c = 0; c < em.covariate_effects.size(); ++c) {
      ind.covariates[c] = rng.next_gauss();
      eta += em.covariate_effects[c] * ind.covariates[c];
    }
    switch (em.family) {
      case Family::Gaussian:
        ind.trait = eta + em.noise_sd * rng.next_gauss();
        break;
      case Family::Binomial:
        ind.trait = rng.next_double() < 1.0 / (1.0 + std::exp(-eta)) ? 1.0 : 0.0;
        break;
      case Family::Poisson:
        ind.trait = rng.next_poisson(std::exp(eta));
        break;
    }
    ds.individuals.push_back(std::move(ind));
  }
  ds.validate();
  return ds;
}

}  // namespace magscan
