#include "magscan/glm.hpp"

#include <cmath>
#include <limits>

namespace magscan {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kSigma2Floor = 1e-300;  // keeps noiseless gaussian fits finite
constexpr double kWeightFloor = 1e-10;

double log1pexp(double x) { return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

double clamp_eta(double eta) { return std::min(700.0, std::max(-700.0, eta)); }

double binomial_loglik(const Eigen::VectorXd& y, const Eigen::VectorXd& eta) {
  double ll = 0;
  for (int i = 0; i < y.size(); ++i) ll += y[i] * eta[i] - log1pexp(eta[i]);
  return ll;
}

double poisson_loglik(const Eigen::VectorXd& y, const Eigen::VectorXd& eta) {
  double ll = 0;
  for (int i = 0; i < y.size(); ++i)
    ll += y[i] * eta[i] - std::exp(clamp_eta(eta[i])) - std::lgamma(y[i] + 1.0);
  return ll;
}

double saturated_loglik(const Eigen::VectorXd& y, Family family) {
  double ll = 0;
  if (family == Family::Binomial) {
    for (int i = 0; i < y.size(); ++i) {
      if (y[i] > 0) ll += y[i] * std::log(y[i]);
      if (y[i] < 1) ll += (1 - y[i]) * std::log(1 - y[i]);
    }
  } else {
    for (int i = 0; i < y.size(); ++i) {
      if (y[i] > 0) ll += y[i] * std::log(y[i]) - y[i];
      ll -= std::lgamma(y[i] + 1.0);
    }
  }
  return ll;
}

void validate_response(const Eigen::VectorXd& y, Family family) {
  for (int i = 0; i < y.size(); ++i) {
    if (!std::isfinite(y[i]))
      throw Error(Errc::InvalidConfig, "non-finite response value");
    if (family == Family::Binomial && (y[i] < 0 || y[i] > 1))
      throw Error(Errc::InvalidConfig, "binomial response outside [0,1]");
    if (family == Family::Poisson && y[i] < 0)
      throw Error(Errc::InvalidConfig, "negative poisson response");
  }
}

FitResult fit_gaussian(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                       const Eigen::ColPivHouseholderQR<Eigen::MatrixXd>& qr) {
  FitResult r;
  r.coefficients = qr.solve(y);
  const int n = static_cast<int>(y.size());
  double rss = (y - X * r.coefficients).squaredNorm();
  r.deviance = rss;
  r.dispersion = std::max(rss / n, kSigma2Floor);
  r.log_likelihood = -0.5 * (n * std::log(2 * kPi * r.dispersion) + rss / r.dispersion);
  r.k = static_cast<int>(X.cols()) + 1;
  r.iterations = 1;
  r.converged = true;
  return r;
}

}  // namespace

const char* family_name(Family f) {
  switch (f) {
    case Family::Gaussian: return "gaussian";
    case Family::Binomial: return "binomial";
    case Family::Poisson: return "poisson";
  }
  return "unknown";
}

Family family_from_name(const std::string& name) {
  if (name == "gaussian") return Family::Gaussian;
  if (name == "binomial") return Family::Binomial;
  if (name == "poisson") return Family::Poisson;
  throw Error(Errc::InvalidConfig, "unknown family '" + name + "'");
}

int matrix_rank(const Eigen::MatrixXd& X, double rel_tol) {
  if (X.cols() == 0 || X.rows() == 0) return 0;
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
  qr.setThreshold(rel_tol);
  return static_cast<int>(qr.rank());
}

FitResult fit_glm(const DesignMatrix& design, const Eigen::VectorXd& response,
                  Family family, const GlmControl& ctl) {
  const Eigen::MatrixXd& X = design.X;
  const int n = static_cast<int>(X.rows());
  const int p = static_cast<int>(X.cols());
  if (response.size() != n)
    throw Error(Errc::InvalidConfig, "response length does not match design rows");
  if (n < 1 || p < 1) throw Error(Errc::InvalidConfig, "empty design");
  validate_response(response, family);

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
  qr.setThreshold(ctl.rank_tol);
  if (static_cast<int>(qr.rank()) < p)
    throw Error(Errc::RankDeficient, "design rank " + std::to_string(qr.rank()) +
                                         " < " + std::to_string(p) + " columns");

  if (family == Family::Gaussian) return fit_gaussian(X, response, qr);

  const Eigen::VectorXd& y = response;
  const double ll_sat = saturated_loglik(y, family);
  Eigen::VectorXd mu(n), eta(n), w(n), z(n);
  if (family == Family::Binomial)
    mu = (y.array() + 0.5) / 2.0;
  else
    mu = y.array() + 0.1;
  for (int i = 0; i < n; ++i)
    eta[i] = family == Family::Binomial ? std::log(mu[i] / (1 - mu[i])) : std::log(mu[i]);

  auto deviance_at = [&](const Eigen::VectorXd& e) {
    double ll = family == Family::Binomial ? binomial_loglik(y, e) : poisson_loglik(y, e);
    return 2 * (ll_sat - ll);
  };

  FitResult r;
  double dev = deviance_at(eta);
  for (int iter = 1; iter <= ctl.max_iter; ++iter) {
    for (int i = 0; i < n; ++i) {
      double wi;
      if (family == Family::Binomial)
        wi = mu[i] * (1 - mu[i]);
      else
        wi = mu[i];
      w[i] = std::max(wi, kWeightFloor);
      z[i] = eta[i] + (y[i] - mu[i]) / w[i];
    }
    Eigen::VectorXd sw = w.array().sqrt();
    Eigen::MatrixXd Xw = sw.asDiagonal() * X;
    Eigen::VectorXd zw = sw.array() * z.array();
    r.coefficients = Xw.colPivHouseholderQr().solve(zw);
    eta = X * r.coefficients;
    for (int i = 0; i < n; ++i) {
      double e = clamp_eta(eta[i]);
      mu[i] = family == Family::Binomial ? 1.0 / (1.0 + std::exp(-e)) : std::exp(e);
    }
    double dev_new = deviance_at(eta);
    r.iterations = iter;
    if (family == Family::Binomial && dev_new < dev &&
        eta.array().abs().maxCoeff() > ctl.separation_eta)
      throw Error(Errc::Separation,
                  "linear predictor exceeded " + std::to_string(ctl.separation_eta) +
                      " while deviance still decreasing (separable data)");
    if (std::abs(dev_new - dev) / (std::abs(dev_new) + 0.1) < ctl.rel_tol) {
      dev = dev_new;
      r.converged = true;
      break;
    }
    dev = dev_new;
  }
  if (!r.converged)
    throw Error(Errc::NoConvergence,
                "IRLS did not converge in " + std::to_string(ctl.max_iter) + " iterations");
  r.deviance = dev;
  r.dispersion = 1.0;
  r.log_likelihood = family == Family::Binomial ? binomial_loglik(y, eta) : poisson_loglik(y, eta);
  r.k = p;
  return r;
}

LrtOutcome lrt(const FitResult& full, const FitResult& reduced) {
  int df = full.k - reduced.k;
  if (df <= 0)
    throw Error(Errc::NotNested, "full model has no extra parameters (df = " +
                                     std::to_string(df) + ")");
  double stat = 2 * (full.log_likelihood - reduced.log_likelihood);
  if (stat < -1e-6)
    throw Error(Errc::NegativeStatistic,
                "likelihood ratio statistic " + std::to_string(stat) +
                    " is negative beyond tolerance");
  stat = std::max(stat, 0.0);
  return LrtOutcome{stat, df, chi_square_sf(stat, df)};
}

namespace {

// Regularized lower incomplete gamma P(a,t) by power series, for t < a + 1.
double gamma_p_series(double a, double t) {
  double term = 1.0 / a, sum = term;
  for (int n = 1; n < 1000; ++n) {
    term *= t / (a + n);
    sum += term;
    if (std::abs(term) < std::abs(sum) * 1e-16) break;
  }
  return sum * std::exp(-t + a * std::log(t) - std::lgamma(a));
}

// Regularized upper incomplete gamma Q(a,t) by Lentz continued fraction.
double gamma_q_cf(double a, double t) {
  constexpr double tiny = 1e-300;
  double b = t + 1 - a, c = 1 / tiny, d = 1 / b, h = d;
  for (int i = 1; i < 1000; ++i) {
    double an = -i * (i - a);
    b += 2;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1 / d;
    double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < 1e-16) break;
  }
  return std::exp(-t + a * std::log(t) - std::lgamma(a)) * h;
}

}  // namespace

double chi_square_sf(double x, int df) {
  if (x < 0 || df < 1) throw Error(Errc::InvalidConfig, "chi_square_sf domain violation");
  double a = df / 2.0, t = x / 2.0;
  if (t == 0) return 1.0;
  double q = t < a + 1 ? 1.0 - gamma_p_series(a, t) : gamma_q_cf(a, t);
  return std::min(1.0, std::max(0.0, q));
}

MultiFit fit_baseline_logits(const DesignMatrix& design, const std::vector<int>& level,
                             int n_levels, int reference, const GlmControl& ctl) {
  const int n = static_cast<int>(design.X.rows());
  if (static_cast<int>(level.size()) != n)
    throw Error(Errc::InvalidConfig, "level vector length does not match design rows");
  if (n_levels < 2) throw Error(Errc::InvalidConfig, "categorical trait needs >= 2 levels");
  if (reference < 0 || reference >= n_levels)
    throw Error(Errc::InvalidConfig, "reference level out of range");
  std::vector<int> counts(n_levels, 0);
  for (int v : level) {
    if (v < 0 || v >= n_levels)
      throw Error(Errc::UnknownTraitLevel, "level index " + std::to_string(v) + " out of range");
    ++counts[v];
  }
  for (int c = 0; c < n_levels; ++c)
    if (counts[c] == 0)
      throw Error(Errc::EmptyCategory, "trait level " + std::to_string(c) + " has no observations");

  MultiFit mf;
  for (int c = 0; c < n_levels; ++c) {
    if (c == reference) continue;
    std::vector<int> rows;
    for (int i = 0; i < n; ++i)
      if (level[i] == reference || level[i] == c) rows.push_back(i);
    DesignMatrix sub;
    sub.X.resize(rows.size(), design.X.cols());
    Eigen::VectorXd suby(rows.size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
      sub.X.row(r) = design.X.row(rows[r]);
      suby[r] = level[rows[r]] == c ? 1.0 : 0.0;
    }
    sub.n_covariates = design.n_covariates;
    sub.n_indicators = design.n_indicators;
    sub.rank = matrix_rank(sub.X, ctl.rank_tol);
    FitResult fit = fit_glm(sub, suby, Family::Binomial, ctl);
    mf.log_likelihood += fit.log_likelihood;
    mf.k += fit.k;
    mf.sub_fits.push_back(std::move(fit));
    mf.levels.push_back(c);
  }
  return mf;
}

}  // namespace magscan
