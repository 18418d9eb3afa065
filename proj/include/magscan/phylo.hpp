#pragma once

#include <gmpxx.h>

#include <iosfwd>
#include <string>
#include <vector>

#include "magscan/design.hpp"
#include "magscan/glm.hpp"

namespace magscan {

// One mutation event at `locus`, placed on the branch reached from the root by
// `path`, a string over {V, w}: V = follow the variant side of an earlier
// split, w = the wild-type side.  The region locus is the one named "R".
struct BranchEvent {
  std::string locus;
  std::string path;
};

struct DichotomousTree {
  std::vector<BranchEvent> events;  // time order

  void validate() const;  // InvalidTree / InvalidBranchPath
  std::vector<std::string> marker_loci() const;  // event order, region excluded
};

inline constexpr const char* kRegionLocus = "R";

// One line per event: `locus=A path=Vw` (empty path = root branch).
DichotomousTree parse_tree(std::istream& in);
DichotomousTree parse_tree_file(const std::string& path);
std::string format_tree(const DichotomousTree& t);

struct HaplotypeRow {
  AlleleMask markers = 0;  // bit i = variant at marker_loci[i]
  bool region = false;     // carries the region variant R
  double freq = 0.0;
};

struct HaplotypeTable {
  std::vector<std::string> marker_loci;
  std::vector<HaplotypeRow> rows;  // leaf order (variant branch first)

  std::string name(const HaplotypeRow& row) const;  // e.g. "AbR"
  AlleleMask marker_mask(const std::string& locus) const;
};

// One haplotype per leaf; uniform frequencies unless `freqs` is given.
HaplotypeTable haplotypes_from_tree(const DichotomousTree& t);
HaplotypeTable haplotypes_from_tree(const DichotomousTree& t,
                                    const std::vector<double>& freqs);

struct RuleEfficiency {
  int detected = 0;  // haplotypes carrying R and >=1 rule allele
  int total_r = 0;   // haplotypes carrying R
  mpq_class fraction() const {
    if (total_r == 0) return mpq_class(0);
    mpq_class q(detected, total_r);
    q.canonicalize();
    return q;
  }
};

RuleEfficiency rule_efficiency(const HaplotypeTable& ht, AlleleMask rule);

// All marker variants that never occur on an r (wild-region) haplotype: using
// any of them as evidence of R can never misfire.
AlleleMask best_rule(const HaplotypeTable& ht);
// Greedy removal of alleles whose absence does not lower the detected count.
AlleleMask minimal_rule(const HaplotypeTable& ht, AlleleMask rule);

struct EffectModel {
  Family family = Family::Gaussian;
  double baseline = 0.0;  // link scale
  double effect = 1.0;    // added on link scale iff >=1 R haplotype carried
  double noise_sd = 1.0;  // gaussian only
  std::vector<double> covariate_effects;  // covariates drawn iid N(0,1)
};

// Two haplotypes per individual, drawn independently (random mating); carried
// marker-alleles are the union over both haplotypes.  Bit-reproducible for a
// given seed; individual i draws from stream i.
Dataset simulate_population(const HaplotypeTable& ht, int n, const EffectModel& em,
                            std::uint64_t seed);

}  // namespace magscan
