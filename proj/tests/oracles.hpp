#pragma once

// Independent reference implementations used only by tests.  Each one takes a
// deliberately different route from the library: Bell numbers via the Bell
// triangle instead of the Stirling recurrence, grouping enumeration by
// materializing and filtering subsets instead of restricted-growth strings,
// least squares via the normal equations instead of a QR factorization, and
// the chi-square tail by quadrature instead of incomplete-gamma expansions.

#include <cstdint>
#include <map>
#include <vector>

#include <Eigen/Dense>

#include "magscan/design.hpp"
#include "magscan/grouping.hpp"
#include "magscan/search.hpp"

namespace oracle {

// Bell(0..n_max) from the Bell triangle.
std::vector<mpz_class> bell_triangle(int n_max);

// Every grouping of order j over h alleles, as canonically sorted mask lists,
// built by choosing j pairwise-disjoint nonempty subsets in ascending mask
// order.  Practical for h <= 5.
std::vector<std::vector<magscan::AlleleMask>> naive_groupings(int h, int j);

// Upper-tail chi-square probability by Simpson quadrature on the substituted
// integrand (t = u^2), which is smooth down to df = 1.
double chi_sq_sf_quadrature(double x, int df);

// Least squares via the normal equations.
Eigen::VectorXd normal_equation_ls(const Eigen::MatrixXd& X,
                                   const Eigen::VectorXd& y);

// Best gaussian log-likelihood per order, end-to-end independent of the
// library: naive enumeration, hand-assembled design, FullPivLU rank check,
// normal-equation solve.  Orders where every grouping is rank-deficient are
// absent from the map.
std::map<int, double> naive_gaussian_profile(const magscan::Dataset& ds,
                                             int max_order);

// Best log-likelihood per order using naive enumeration but the library's
// per-grouping fit; checks the stream plus the parallel reduction for
// families without a closed-form reference.
std::map<int, double> naive_profile_library_glm(const magscan::Dataset& ds,
                                                const magscan::TraitModel& tm,
                                                int max_order);

// Kolmogorov-Smirnov distance between a sample and Uniform(0,1).
double ks_uniform(std::vector<double> p);

struct GenOptions {
  int h = 4;
  int n = 100;
  bool overlap = true;   // false: each individual carries at most one allele
  bool binary = false;   // true: Bernoulli trait via a logistic link
  int n_covariates = 0;
  double effect = 1.0;
};

// Random dataset with every allele carried by at least three individuals and
// a block of non-carriers, so singleton indicators stay informative.
magscan::Dataset random_dataset(std::uint64_t seed, const GenOptions& opt);

}  // namespace oracle
