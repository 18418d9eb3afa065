#include "magscan/design.hpp"

namespace magscan {

void Dataset::validate() const {
  if (individuals.empty()) throw Error(Errc::InvalidConfig, "dataset has no individuals");
  const AlleleMask full = panel.full_mask();
  for (const auto& ind : individuals) {
    if (static_cast<int>(ind.covariates.size()) != n_covariates())
      throw Error(Errc::InvalidConfig, "covariate length varies across individuals");
    if (ind.carried & ~full)
      throw Error(Errc::UnknownAllele, "individual '" + ind.id + "' carries an allele outside the panel");
  }
  if (trait_kind == TraitKind::Categorical) {
    if (trait_levels.size() < 2)
      throw Error(Errc::InvalidConfig, "categorical trait needs >= 2 declared levels");
    if (reference_level < 0 || reference_level >= static_cast<int>(trait_levels.size()))
      throw Error(Errc::InvalidConfig, "reference level out of range");
    for (const auto& ind : individuals)
      if (ind.level < 0 || ind.level >= static_cast<int>(trait_levels.size()))
        throw Error(Errc::UnknownTraitLevel, "individual '" + ind.id + "' has an undeclared trait level");
  }
}

Eigen::VectorXd mag_indicator(const Dataset& ds, AlleleMask mag) {
  if (mag & ~ds.panel.full_mask())
    throw Error(Errc::UnknownAllele, "MAG references an allele outside the panel");
  Eigen::VectorXd v(ds.n());
  for (int i = 0; i < ds.n(); ++i)
    v[i] = (ds.individuals[i].carried & mag) ? 1.0 : 0.0;
  return v;
}

DesignMatrix build_design(const Dataset& ds, const Grouping& g, double rank_tol) {
  const AlleleMask full = ds.panel.full_mask();
  AlleleMask seen = 0;
  for (AlleleMask m : g.mags) {
    if (m == 0) throw Error(Errc::EmptyMag, "grouping contains an empty MAG");
    if (m & seen) throw Error(Errc::OverlappingMags, "MAGs are not pairwise disjoint");
    if (m & ~full) throw Error(Errc::UnknownAllele, "MAG references an allele outside the panel");
    seen |= m;
  }

  const int n = ds.n();
  const int kx = ds.n_covariates();
  const int j = g.order();
  DesignMatrix d;
  d.n_covariates = kx;
  d.n_indicators = j;
  d.X.resize(n, 1 + kx + j);
  d.X.col(0).setOnes();
  for (int c = 0; c < kx; ++c)
    for (int i = 0; i < n; ++i) d.X(i, 1 + c) = ds.individuals[i].covariates[c];
  for (int m = 0; m < j; ++m)
    for (int i = 0; i < n; ++i)
      d.X(i, 1 + kx + m) = (ds.individuals[i].carried & g.mags[m]) ? 1.0 : 0.0;

  d.rank = matrix_rank(d.X, rank_tol);
  if (d.rank < d.p()) {
    for (int m = 0; m < j; ++m) {
      double s = d.X.col(1 + kx + m).sum();
      if (s == 0 || s == n)
        throw DegenerateDesignError(
            DegeneracyCause::ConstantIndicator,
            "indicator for MAG " + format_mag(g.mags[m], ds.panel) + " is constant");
    }
    for (int a = 0; a < j; ++a)
      for (int b = a + 1; b < j; ++b)
        if (d.X.col(1 + kx + a) == d.X.col(1 + kx + b))
          throw DegenerateDesignError(
              DegeneracyCause::DuplicateIndicator,
              "MAGs " + format_mag(g.mags[a], ds.panel) + " and " +
                  format_mag(g.mags[b], ds.panel) + " have identical carrier sets");
    throw DegenerateDesignError(DegeneracyCause::Collinear,
                                "design columns are collinear (rank " +
                                    std::to_string(d.rank) + " < " +
                                    std::to_string(d.p()) + ")");
  }
  return d;
}

Eigen::VectorXd response_vector(const Dataset& ds) {
  if (ds.trait_kind != TraitKind::Continuous)
    throw Error(Errc::InvalidConfig, "response_vector requires a continuous trait");
  Eigen::VectorXd y(ds.n());
  for (int i = 0; i < ds.n(); ++i) y[i] = ds.individuals[i].trait;
  return y;
}

std::vector<int> level_vector(const Dataset& ds) {
  if (ds.trait_kind != TraitKind::Categorical)
    throw Error(Errc::InvalidConfig, "level_vector requires a categorical trait");
  std::vector<int> v(ds.n());
  for (int i = 0; i < ds.n(); ++i) v[i] = ds.individuals[i].level;
  return v;
}

}  // namespace magscan
