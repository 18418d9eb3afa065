#include <algorithm>
#include <set>
#include <unordered_set>

#include "doctest.h"
#include "magscan/grouping.hpp"
#include "oracles.hpp"

using namespace magscan;

TEST_SUITE("grouping") {

TEST_CASE("panel validates and indexes") {
  AllelePanel p({"276bp", "297bp", "324bp"});
  CHECK(p.size() == 3);
  CHECK(p.index("297bp") == 1);
  CHECK(p.name(2) == "324bp");
  CHECK(!p.find("999bp").has_value());
  CHECK_THROWS_AS(p.index("999bp"), Error);
  CHECK(p.full_mask() == 0b111);

  CHECK_THROWS_AS(AllelePanel({}), Error);
  CHECK_THROWS_AS(AllelePanel({"a", "a"}), Error);
  CHECK_THROWS_AS(AllelePanel({"a", ""}), Error);
  std::vector<std::string> too_many;
  for (int i = 0; i < 65; ++i) too_many.push_back("m" + std::to_string(i));
  CHECK_THROWS_AS(AllelePanel{too_many}, Error);
  std::vector<std::string> at_cap(too_many.begin(), too_many.end() - 1);
  CHECK(AllelePanel(at_cap).full_mask() == ~AlleleMask{0});
}

TEST_CASE("canonical form sorts, rejects overlap and empties") {
  Grouping g = canonical_form({0b100, 0b011});
  CHECK(g.mags == std::vector<AlleleMask>{0b011, 0b100});
  CHECK(canonical_form(g.mags).mags == g.mags);  // idempotent
  CHECK(g.order() == 2);
  CHECK(g.union_mask() == 0b111);
  CHECK_THROWS_AS(canonical_form({0b011, 0b010}), Error);
  CHECK_THROWS_AS(canonical_form({0b001, 0}), Error);
  CHECK(grouping_from_sets({{2}, {0, 1}}).mags ==
        std::vector<AlleleMask>{0b011, 0b100});
}

TEST_CASE("counts match the worked two-allele example") {
  CHECK(count_groupings(2, 1) == 3);  // {A}, {B), {A,B}
  CHECK(count_groupings(2, 2) == 1);  // {A}|{B}
  CHECK(count_groupings_up_to(2, 2) == 4);
}

TEST_CASE("total counts equal Bell(h+1)-1 against the Bell triangle") {
  auto bell = oracle::bell_triangle(12);
  for (int h = 1; h <= 11; ++h)
    CHECK(count_groupings_up_to(h, h) == bell[h + 1] - 1);
  CHECK(count_groupings_up_to(8, 8) == 21146);
  CHECK(count_groupings_up_to(9, 9) == 115974);
  CHECK(count_groupings_up_to(10, 10) == 678569);
  CHECK(bell_number(3) == 5);
}

TEST_CASE("count argument validation") {
  CHECK_THROWS_AS(count_groupings(3, 0), Error);
  CHECK_THROWS_AS(count_groupings(3, 4), Error);
  CHECK_THROWS_AS(count_groupings(0, 1), Error);
  CHECK_THROWS_AS(count_groupings_up_to(3, 0), Error);
}

TEST_CASE("stream emits each grouping once, canonical, disjoint") {
  for (int h = 1; h <= 6; ++h) {
    for (int j = 1; j <= h; ++j) {
      GroupingStream s(h, j);
      Grouping g;
      std::set<std::vector<AlleleMask>> seen;
      while (s.next(g)) {
        REQUIRE(g.order() == j);
        AlleleMask u = 0;
        for (AlleleMask m : g.mags) {
          REQUIRE(m != 0);
          REQUIRE((u & m) == 0);
          u |= m;
        }
        CHECK(canonical_form(g.mags).mags == g.mags);
        CHECK(seen.insert(g.mags).second);
      }
      CHECK(mpz_class(seen.size()) == count_groupings(h, j));
    }
  }
}

TEST_CASE("stream agrees with materialized enumeration") {
  for (int h = 1; h <= 5; ++h) {
    for (int j = 1; j <= h; ++j) {
      auto naive = oracle::naive_groupings(h, j);
      std::set<std::vector<AlleleMask>> want(naive.begin(), naive.end());
      std::set<std::vector<AlleleMask>> got;
      for_each_grouping(h, j, [&](const Grouping& g) { got.insert(g.mags); });
      CHECK(got == want);
    }
  }
}

TEST_CASE("stream order is deterministic") {
  auto run = [] {
    std::vector<std::vector<AlleleMask>> v;
    GroupingStream s(5, 2);
    Grouping g;
    while (s.next(g)) v.push_back(g.mags);
    return v;
  };
  CHECK(run() == run());
}

TEST_CASE("order-1 stream over two alleles is the worked example set") {
  std::set<std::vector<AlleleMask>> got;
  for_each_grouping(2, 1, [&](const Grouping& g) { got.insert(g.mags); });
  std::set<std::vector<AlleleMask>> want{{0b01}, {0b10}, {0b11}};
  CHECK(got == want);
}

TEST_CASE("hash respects canonical equality") {
  GroupingHash hash;
  Grouping a = grouping_from_sets({{0}, {1, 2}});
  Grouping b = canonical_form({0b110, 0b001});
  CHECK(a == b);
  CHECK(hash(a) == hash(b));
  std::unordered_set<Grouping, GroupingHash> set{a};
  CHECK(set.count(b) == 1);
}

TEST_CASE("format and parse round-trip") {
  AllelePanel p({"276bp", "297bp", "324bp"});
  Grouping g = grouping_from_sets({{0}, {1, 2}});
  CHECK(format_grouping(g, p) == "{276bp}|{297bp,324bp}");
  CHECK(parse_grouping("{276bp}|{297bp,324bp}", p) == g);
  CHECK(parse_grouping(" { 297bp , 324bp } | { 276bp } ", p) == g);
  CHECK(format_mag(0b110, p) == "{297bp,324bp}");
  CHECK_THROWS_AS(parse_grouping("{276bp}|{276bp}", p), Error);
  CHECK_THROWS_AS(parse_grouping("{nope}", p), Error);
  CHECK_THROWS_AS(parse_grouping("276bp", p), Error);
  CHECK_THROWS_AS(parse_grouping("{}", p), Error);
}

}  // TEST_SUITE
