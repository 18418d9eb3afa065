#pragma once

#include <string>
#include <vector>

#include "magscan/glm.hpp"
#include "magscan/grouping.hpp"

namespace magscan {

enum class TraitKind { Continuous, Categorical };

struct Individual {
  std::string id;
  double trait = 0.0;  // continuous traits
  int level = -1;      // categorical traits: index into Dataset::trait_levels
  std::vector<double> covariates;
  AlleleMask carried = 0;
};

// Immutable after construction.  Missing-genotype policy is applied at load
// time, so every individual here enters the fit.
struct Dataset {
  Dataset() = default;
  explicit Dataset(AllelePanel p) : panel(std::move(p)) {}

  AllelePanel panel;
  TraitKind trait_kind = TraitKind::Continuous;
  std::vector<std::string> trait_levels;  // categorical only
  int reference_level = 0;
  std::vector<std::string> covariate_names;
  std::vector<Individual> individuals;

  int n() const { return static_cast<int>(individuals.size()); }
  int n_covariates() const { return static_cast<int>(covariate_names.size()); }
  void validate() const;  // throws InvalidConfig on internal inconsistency
};

// Entry i is 1 iff individual i carries at least one allele of the MAG
// (complete dominance: one or two copies code identically).
Eigen::VectorXd mag_indicator(const Dataset& ds, AlleleMask mag);

// [intercept | covariates | one indicator per MAG in canonical order].
// The empty grouping yields the null design (intercept + covariates).
// Throws DegenerateDesignError when rank < p, with a machine-readable cause.
DesignMatrix build_design(const Dataset& ds, const Grouping& g,
                          double rank_tol = 1e-10);

Eigen::VectorXd response_vector(const Dataset& ds);  // continuous traits
std::vector<int> level_vector(const Dataset& ds);    // categorical traits

}  // namespace magscan
