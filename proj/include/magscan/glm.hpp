#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "magscan/errors.hpp"

namespace magscan {

enum class Family { Gaussian, Binomial, Poisson };

const char* family_name(Family f);
Family family_from_name(const std::string& name);

// Columns: intercept, then covariates (beta block), then one 0/1 indicator
// per MAG (alpha block).  p = 1 + n_covariates + n_indicators.
struct DesignMatrix {
  Eigen::MatrixXd X;
  int n_covariates = 0;
  int n_indicators = 0;
  int rank = 0;

  int p() const { return static_cast<int>(X.cols()); }
  int n() const { return static_cast<int>(X.rows()); }
};

struct FitResult {
  Eigen::VectorXd coefficients;
  double log_likelihood = 0.0;
  int k = 0;  // estimated parameters, including dispersion when estimated
  double deviance = 0.0;
  double dispersion = 1.0;
  int iterations = 0;
  bool converged = false;
};

struct LrtOutcome {
  double statistic = 0.0;
  int df = 0;
  double p_value = 1.0;
};

struct GlmControl {
  double rel_tol = 1e-8;       // relative deviance change
  int max_iter = 100;
  double separation_eta = 30.0;
  double rank_tol = 1e-10;
};

int matrix_rank(const Eigen::MatrixXd& X, double rel_tol = 1e-10);

FitResult fit_glm(const DesignMatrix& design, const Eigen::VectorXd& response,
                  Family family, const GlmControl& ctl = {});

LrtOutcome lrt(const FitResult& full, const FitResult& reduced);

// Upper-tail probability of the chi-square distribution (regularized upper
// incomplete gamma Q(df/2, x/2)).
double chi_square_sf(double x, int df);

struct MultiFit {
  std::vector<FitResult> sub_fits;  // one per non-reference level, level order
  std::vector<int> levels;          // level index of each sub-fit
  double log_likelihood = 0.0;
  int k = 0;
};

// Baseline-category logits: one binomial-logit fit per non-reference level c,
// restricted to rows whose level is `reference` or c, coded 0/1.
MultiFit fit_baseline_logits(const DesignMatrix& design, const std::vector<int>& level,
                             int n_levels, int reference, const GlmControl& ctl = {});

}  // namespace magscan
