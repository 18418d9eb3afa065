#include <vector>

#include "doctest.h"
#include "magscan/design.hpp"
#include "oracles.hpp"

using namespace magscan;

namespace {

Dataset tiny_dataset(const std::vector<AlleleMask>& carried,
                     const std::vector<double>& trait,
                     std::vector<std::string> names = {"A", "B", "C"}) {
  Dataset ds{AllelePanel(std::move(names))};
  for (std::size_t i = 0; i < carried.size(); ++i) {
    Individual ind;
    ind.id = "i" + std::to_string(i + 1);
    ind.carried = carried[i];
    ind.trait = trait[i];
    ds.individuals.push_back(std::move(ind));
  }
  ds.validate();
  return ds;
}

}  // namespace

TEST_SUITE("design") {

TEST_CASE("mag indicator ORs carried alleles over the MAG") {
  Dataset ds = tiny_dataset({0b001, 0b010, 0b011, 0b000, 0b100},
                            {0, 0, 0, 0, 0});
  Eigen::VectorXd ind = mag_indicator(ds, 0b011);  // {A,B}
  Eigen::VectorXd want(5);
  want << 1, 1, 1, 0, 0;
  CHECK(ind == want);
  // singleton reduces to plain carrier status
  Eigen::VectorXd a = mag_indicator(ds, 0b001);
  Eigen::VectorXd wa(5);
  wa << 1, 0, 1, 0, 0;
  CHECK(a == wa);
}

TEST_CASE("design layout: intercept, covariates, indicators") {
  Dataset ds = tiny_dataset({0b001, 0b010, 0b100, 0b000}, {1, 2, 3, 4});
  ds.covariate_names = {"age"};
  for (int i = 0; i < 4; ++i) ds.individuals[i].covariates = {10.0 + i};
  ds.validate();

  Grouping g = grouping_from_sets({{0, 1}, {2}});
  DesignMatrix d = build_design(ds, g);
  REQUIRE(d.p() == 4);
  CHECK(d.n_covariates == 1);
  CHECK(d.n_indicators == 2);
  CHECK(d.rank == 4);
  for (int i = 0; i < 4; ++i) {
    CHECK(d.X(i, 0) == 1.0);
    CHECK(d.X(i, 1) == 10.0 + i);
  }
  Eigen::VectorXd i1 = d.X.col(2), i2 = d.X.col(3);
  Eigen::VectorXd w1(4), w2(4);
  w1 << 1, 1, 0, 0;
  w2 << 0, 0, 1, 0;
  CHECK(i1 == w1);
  CHECK(i2 == w2);
}

TEST_CASE("null grouping yields the covariate-only design") {
  Dataset ds = tiny_dataset({0b001, 0b010, 0b100}, {1, 2, 3});
  DesignMatrix d = build_design(ds, Grouping{});
  CHECK(d.p() == 1);
  CHECK(d.n_indicators == 0);
  CHECK(d.rank == 1);
}

TEST_CASE("all-singleton grouping reproduces one column per allele") {
  Dataset ds = tiny_dataset({0b001, 0b010, 0b100, 0b000, 0b110}, {1, 2, 3, 4, 5});
  Grouping g = grouping_from_sets({{0}, {1}, {2}});
  DesignMatrix d = build_design(ds, g);
  REQUIRE(d.p() == 4);
  for (int a = 0; a < 3; ++a) {
    Eigen::VectorXd col = d.X.col(1 + a);
    for (int i = 0; i < 5; ++i)
      CHECK(col(i) == ((ds.individuals[i].carried >> a) & 1 ? 1.0 : 0.0));
  }
}

TEST_CASE("constant indicator is classified as degenerate") {
  // every individual carries A or B: the {A,B} indicator is constant 1
  Dataset ds = tiny_dataset({0b001, 0b010, 0b011, 0b001}, {1, 2, 3, 4});
  Grouping g = grouping_from_sets({{0, 1}});
  try {
    build_design(ds, g);
    FAIL("expected DegenerateDesignError");
  } catch (const DegenerateDesignError& e) {
    CHECK(e.cause() == DegeneracyCause::ConstantIndicator);
  }
  // C carried by nobody: constant 0
  Grouping g0 = grouping_from_sets({{2}});
  try {
    build_design(ds, g0);
    FAIL("expected DegenerateDesignError");
  } catch (const DegenerateDesignError& e) {
    CHECK(e.cause() == DegeneracyCause::ConstantIndicator);
  }
}

TEST_CASE("duplicated indicator is classified as degenerate") {
  // A and B always co-occur, so {A} and {B} trace identical columns
  Dataset ds = tiny_dataset({0b011, 0b011, 0b100, 0b000}, {1, 2, 3, 4});
  Grouping g = grouping_from_sets({{0}, {1}});
  try {
    build_design(ds, g);
    FAIL("expected DegenerateDesignError");
  } catch (const DegenerateDesignError& e) {
    CHECK(e.cause() == DegeneracyCause::DuplicateIndicator);
  }
}

TEST_CASE("collinear covariates are classified as degenerate") {
  Dataset ds = tiny_dataset({0b001, 0b010, 0b100, 0b000}, {1, 2, 3, 4});
  ds.covariate_names = {"u", "v"};
  for (int i = 0; i < 4; ++i)
    ds.individuals[i].covariates = {static_cast<double>(i), 2.0 * i};
  ds.validate();
  try {
    build_design(ds, grouping_from_sets({{0}}));
    FAIL("expected DegenerateDesignError");
  } catch (const DegenerateDesignError& e) {
    CHECK(e.cause() == DegeneracyCause::Collinear);
  }
}

TEST_CASE("unknown alleles in a MAG are rejected") {
  Dataset ds = tiny_dataset({0b001, 0b010, 0b100}, {1, 2, 3});
  Grouping g;
  g.mags = {AlleleMask{1} << 5};
  CHECK_THROWS_WITH_AS(build_design(ds, g), doctest::Contains("UnknownAllele"),
                       Error);
}

TEST_CASE("response and level vectors guard the trait kind") {
  Dataset ds = tiny_dataset({0b001, 0b010, 0b100}, {1, 2, 3});
  Eigen::VectorXd y = response_vector(ds);
  CHECK(y(2) == 3.0);
  CHECK_THROWS_AS(level_vector(ds), Error);

  Dataset cat{AllelePanel({"A"})};
  cat.trait_kind = TraitKind::Categorical;
  cat.trait_levels = {"ctl", "case"};
  Individual i1, i2;
  i1.id = "a";
  i1.level = 0;
  i1.carried = 1;
  i2.id = "b";
  i2.level = 1;
  cat.individuals = {i1, i2};
  cat.validate();
  auto lev = level_vector(cat);
  CHECK(lev == std::vector<int>{0, 1});
  CHECK_THROWS_AS(response_vector(cat), Error);
}

TEST_CASE("dataset validation catches inconsistencies") {
  Dataset ds = tiny_dataset({0b001, 0b010}, {1, 2});
  ds.individuals[0].carried = AlleleMask{1} << 40;  // outside the panel
  CHECK_THROWS_AS(ds.validate(), Error);

  Dataset ds2 = tiny_dataset({0b001, 0b010}, {1, 2});
  ds2.covariate_names = {"x"};
  CHECK_THROWS_AS(ds2.validate(), Error);  // covariates missing on rows
}

}  // TEST_SUITE
