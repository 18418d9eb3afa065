#include <cmath>
#include <random>

#include "doctest.h"
#include "magscan/glm.hpp"
#include "oracles.hpp"

using namespace magscan;

namespace {

DesignMatrix design_of(Eigen::MatrixXd X, int n_covariates, int n_indicators) {
  DesignMatrix d{std::move(X), n_covariates, n_indicators, 0};
  d.rank = matrix_rank(d.X, 1e-10);
  return d;
}

DesignMatrix intercept_only(int n) {
  return design_of(Eigen::MatrixXd::Ones(n, 1), 0, 0);
}

}  // namespace

TEST_SUITE("glm") {

TEST_CASE("gaussian intercept fit: mean, deviance, exact loglik") {
  Eigen::VectorXd y(3);
  y << 1, 2, 3;
  FitResult r = fit_glm(intercept_only(3), y, Family::Gaussian);
  CHECK(r.coefficients.size() == 1);
  CHECK(r.coefficients[0] == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(r.deviance == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(r.dispersion == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK(r.k == 2);  // intercept + dispersion
  double want = -0.5 * (3 * std::log(2 * M_PI * (2.0 / 3.0)) + 3.0);
  CHECK(r.log_likelihood == doctest::Approx(want).epsilon(1e-12));
}

TEST_CASE("noise-free line keeps a finite loglik via the dispersion floor") {
  int n = 10;
  Eigen::MatrixXd X(n, 2);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) {
    X(i, 0) = 1;
    X(i, 1) = i;
    y(i) = 2 * i + 1;
  }
  FitResult r = fit_glm(design_of(X, 1, 0), y, Family::Gaussian);
  CHECK(r.deviance == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(std::isfinite(r.log_likelihood));
  CHECK(r.coefficients[1] == doctest::Approx(2.0).epsilon(1e-10));
  CHECK(r.k == 3);
}

TEST_CASE("gaussian coefficients match normal equations on random problems") {
  std::mt19937_64 rng(1234);
  std::normal_distribution<double> g;
  for (int rep = 0; rep < 30; ++rep) {
    int n = 30 + static_cast<int>(rng() % 120);
    int p = 2 + static_cast<int>(rng() % 6);
    Eigen::MatrixXd X(n, p);
    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) {
      X(i, 0) = 1;
      for (int c = 1; c < p; ++c) X(i, c) = g(rng);
      y(i) = g(rng) + 0.3 * X(i, p - 1);
    }
    FitResult r = fit_glm(design_of(X, p - 1, 0), y, Family::Gaussian);
    Eigen::VectorXd ref = oracle::normal_equation_ls(X, y);
    CHECK((r.coefficients - ref).cwiseAbs().maxCoeff() < 1e-8);
    double rss = (y - X * ref).squaredNorm();
    CHECK(r.deviance == doctest::Approx(rss).epsilon(1e-9));
  }
}

TEST_CASE("binomial intercept fit is the logit of the mean") {
  Eigen::VectorXd y(4);
  y << 0, 0, 1, 1;
  FitResult r = fit_glm(intercept_only(4), y, Family::Binomial);
  CHECK(r.coefficients[0] == doctest::Approx(0.0).epsilon(1e-8));
  CHECK(r.k == 1);
  // exact bernoulli loglik at p = 1/2
  CHECK(r.log_likelihood == doctest::Approx(4 * std::log(0.5)).epsilon(1e-10));

  Eigen::VectorXd y2(4);
  y2 << 0, 1, 1, 1;
  FitResult r2 = fit_glm(intercept_only(4), y2, Family::Binomial);
  CHECK(r2.coefficients[0] == doctest::Approx(std::log(3.0)).epsilon(1e-7));
}

TEST_CASE("poisson intercept fit is the log of the mean, loglik exact") {
  Eigen::VectorXd y(3);
  y << 1, 2, 3;
  FitResult r = fit_glm(intercept_only(3), y, Family::Poisson);
  CHECK(r.coefficients[0] == doctest::Approx(std::log(2.0)).epsilon(1e-8));
  double want = 6 * std::log(2.0) - 6 - (std::lgamma(2.0) + std::lgamma(3.0) + std::lgamma(4.0));
  CHECK(r.log_likelihood == doctest::Approx(want).epsilon(1e-8));
  CHECK(r.k == 1);
}

TEST_CASE("adding a column never lowers the maximized loglik") {
  std::mt19937_64 rng(77);
  std::normal_distribution<double> g;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int rep = 0; rep < 10; ++rep) {
    int n = 80;
    Eigen::MatrixXd X(n, 3);
    Eigen::VectorXd yb(n), yp(n), yg(n);
    for (int i = 0; i < n; ++i) {
      X(i, 0) = 1;
      X(i, 1) = g(rng);
      X(i, 2) = g(rng);
      double eta = 0.2 + 0.5 * X(i, 1);
      yg(i) = eta + g(rng);
      yb(i) = u(rng) < 1.0 / (1.0 + std::exp(-eta)) ? 1 : 0;
      yp(i) = static_cast<double>(rng() % 5);
    }
    for (auto fam : {Family::Gaussian, Family::Binomial, Family::Poisson}) {
      const Eigen::VectorXd& y = fam == Family::Gaussian ? yg
                                 : fam == Family::Binomial ? yb : yp;
      FitResult small = fit_glm(design_of(X.leftCols(2), 1, 0), y, fam);
      FitResult big = fit_glm(design_of(X, 2, 0), y, fam);
      CHECK(big.log_likelihood >= small.log_likelihood - 1e-6);
    }
  }
}

TEST_CASE("likelihood-ratio test basics") {
  FitResult full, red;
  full.log_likelihood = -5.0;
  full.k = 3;
  red.log_likelihood = -5.0;
  red.k = 2;
  LrtOutcome z = lrt(full, red);
  CHECK(z.statistic == doctest::Approx(0.0));
  CHECK(z.df == 1);
  CHECK(z.p_value == doctest::Approx(1.0));

  full.log_likelihood = red.log_likelihood + 3.841 / 2;
  LrtOutcome near5 = lrt(full, red);
  CHECK(near5.p_value == doctest::Approx(0.05).epsilon(0.01));

  red.k = 3;  // same k: not nested
  CHECK_THROWS_AS(lrt(full, red), Error);

  red.k = 2;
  red.log_likelihood = full.log_likelihood + 1.0;  // reduced beats full
  CHECK_THROWS_AS(lrt(full, red), Error);

  red.log_likelihood = full.log_likelihood + 1e-9;  // rounding-level: clip to 0
  LrtOutcome clipped = lrt(full, red);
  CHECK(clipped.statistic == 0.0);
  CHECK(clipped.p_value == 1.0);
}

TEST_CASE("chi-square tail against quadrature") {
  CHECK(chi_square_sf(0.0, 5) == 1.0);
  CHECK(chi_square_sf(3.841, 1) == doctest::Approx(0.05).epsilon(1e-2));
  for (int df : {1, 2, 3, 5, 10, 20})
    for (double x : {0.1, 0.5, 1.0, 2.0, 3.841, 5.0, 10.0, 20.0, 35.0, 50.0}) {
      INFO("x=", x, " df=", df);
      CHECK(std::abs(chi_square_sf(x, df) - oracle::chi_sq_sf_quadrature(x, df)) < 1e-6);
    }
  double prev = 1.0;
  for (double x = 0.0; x <= 60.0; x += 0.5) {
    double v = chi_square_sf(x, 4);
    CHECK(v <= prev + 1e-12);
    prev = v;
  }
  CHECK(chi_square_sf(1000.0, 2) < 1e-12);
  CHECK_THROWS_AS(chi_square_sf(-1.0, 2), Error);
  CHECK_THROWS_AS(chi_square_sf(1.0, 0), Error);
}

TEST_CASE("perfectly separated logistic data raises Separation") {
  Eigen::MatrixXd X(6, 2);
  Eigen::VectorXd y(6);
  double xs[] = {-3, -2, -1, 1, 2, 3};
  for (int i = 0; i < 6; ++i) {
    X(i, 0) = 1;
    X(i, 1) = xs[i];
    y(i) = xs[i] > 0 ? 1 : 0;
  }
  CHECK_THROWS_WITH_AS(fit_glm(design_of(X, 1, 0), y, Family::Binomial),
                       doctest::Contains("Separation"), Error);
}

TEST_CASE("rank-deficient designs are rejected before fitting") {
  Eigen::MatrixXd X(5, 3);
  Eigen::VectorXd y(5);
  for (int i = 0; i < 5; ++i) {
    X(i, 0) = 1;
    X(i, 1) = i;
    X(i, 2) = 2.0 * i;  // collinear
    y(i) = i;
  }
  DesignMatrix d{X, 2, 0, matrix_rank(X, 1e-10)};
  CHECK(d.rank == 2);
  CHECK_THROWS_WITH_AS(fit_glm(d, y, Family::Gaussian),
                       doctest::Contains("RankDeficient"), Error);
}

TEST_CASE("response validation per family") {
  Eigen::VectorXd bad(2);
  bad << 0.5, 2.0;
  CHECK_THROWS_AS(fit_glm(intercept_only(2), bad, Family::Binomial), Error);
  Eigen::VectorXd neg(2);
  neg << 1.0, -1.0;
  CHECK_THROWS_AS(fit_glm(intercept_only(2), neg, Family::Poisson), Error);
}

TEST_CASE("two-level baseline logits equal a plain logistic fit") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int n = 60;
  Eigen::MatrixXd X(n, 2);
  std::vector<int> level(n);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) {
    X(i, 0) = 1;
    X(i, 1) = g(rng);
    level[i] = u(rng) < 1.0 / (1.0 + std::exp(-0.3 - 0.8 * X(i, 1))) ? 1 : 0;
    y(i) = level[i];
  }
  DesignMatrix d = design_of(X, 1, 0);
  MultiFit mf = fit_baseline_logits(d, level, 2, 0, {});
  FitResult plain = fit_glm(d, y, Family::Binomial);
  REQUIRE(mf.sub_fits.size() == 1);
  CHECK((mf.sub_fits[0].coefficients - plain.coefficients).cwiseAbs().maxCoeff() < 1e-10);
  CHECK(mf.log_likelihood == doctest::Approx(plain.log_likelihood).epsilon(1e-12));
  CHECK(mf.k == plain.k);
}

TEST_CASE("multi-level baseline logits: one sub-fit per non-reference level") {
  int n = 90;
  std::mt19937_64 rng(9);
  std::normal_distribution<double> g;
  Eigen::MatrixXd X(n, 2);
  std::vector<int> level(n);
  for (int i = 0; i < n; ++i) {
    X(i, 0) = 1;
    X(i, 1) = g(rng);
    level[i] = static_cast<int>(rng() % 3);
  }
  DesignMatrix d = design_of(X, 1, 0);
  MultiFit mf = fit_baseline_logits(d, level, 3, 0, {});
  CHECK(mf.sub_fits.size() == 2);
  CHECK(mf.k == 4);  // two logistic sub-fits with two columns each
  double sum = 0;
  for (const auto& f : mf.sub_fits) sum += f.log_likelihood;
  CHECK(mf.log_likelihood == doctest::Approx(sum).epsilon(1e-12));

  std::vector<int> holey = level;
  for (auto& v : holey) v = v == 2 ? 1 : v;  // level 2 never observed
  CHECK_THROWS_WITH_AS(fit_baseline_logits(d, holey, 3, 0, {}),
                       doctest::Contains("EmptyCategory"), Error);
  std::vector<int> bad = level;
  bad[0] = 7;
  CHECK_THROWS_WITH_AS(fit_baseline_logits(d, bad, 3, 0, {}),
                       doctest::Contains("UnknownTraitLevel"), Error);
}

TEST_CASE("matrix_rank honors the threshold") {
  Eigen::MatrixXd X(4, 2);
  X << 1, 1, 1, 1, 1, 1, 1, 1 + 1e-13;
  CHECK(matrix_rank(X, 1e-10) == 1);
  X(3, 1) = 2;
  CHECK(matrix_rank(X, 1e-10) == 2);
}

}  // TEST_SUITE
