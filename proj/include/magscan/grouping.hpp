#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <gmpxx.h>

#include "magscan/errors.hpp"

namespace magscan {

// A set of marker-alleles, one bit per panel index. Panels are capped at 64
// alleles so a MAG is a single machine word.
using AlleleMask = std::uint64_t;

constexpr int kMaxPanelSize = 64;

// Ordered list of distinct marker-allele identifiers. The position of an
// allele in the panel is its canonical index for the lifetime of an analysis.
class AllelePanel {
 public:
  explicit AllelePanel(std::vector<std::string> names);

  int size() const { return static_cast<int>(names_.size()); }
  const std::string& name(int i) const { return names_.at(i); }
  const std::vector<std::string>& names() const { return names_; }

  // Index of a named allele; throws UnknownAllele.
  int index(const std::string& name) const;
  std::optional<int> find(const std::string& name) const;

  // Mask with one bit per panel allele, all set.
  AlleleMask full_mask() const;

 private:
  std::vector<std::string> names_;
};

// A collection of pairwise-disjoint non-empty MAGs in canonical form:
// within each MAG allele indices ascend (implicit in the mask), and MAGs are
// ordered by their minimum allele index. Canonical equality is grouping
// identity everywhere (hashing, tie-breaking, reports).
struct Grouping {
  std::vector<AlleleMask> mags;

  int order() const { return static_cast<int>(mags.size()); }
  AlleleMask union_mask() const;
  bool operator==(const Grouping&) const = default;
};

struct GroupingHash {
  std::size_t operator()(const Grouping& g) const;
};

// Validates disjointness/non-emptiness and sorts MAGs by minimum index.
// Idempotent. Throws OverlappingMags or EmptyMag.
Grouping canonical_form(std::vector<AlleleMask> mags);

// Convenience constructor from explicit index sets.
Grouping grouping_from_sets(const std::vector<std::vector<int>>& sets);

// Exact count of order-j groupings of an h-allele panel: Stirling2(h+1, j+1).
// Throws OrderOutOfRange unless 1 <= j <= h.
mpz_class count_groupings(int h, int j);

// Sum of count_groupings(h, j) for j = 1..max_order. For max_order = h this
// equals Bell(h+1) - 1.
mpz_class count_groupings_up_to(int h, int max_order);

mpz_class bell_number(int n);

// Streams every order-j grouping exactly once, in canonical form, in
// lexicographic order of the restricted growth strings over the lifted
// (h+1)-element set whose extra first element anchors the "unused" block.
// The sequence is deterministic and identical across runs.
class GroupingStream {
 public:
  GroupingStream(int h, int order);

  // Fills `out` with the next grouping; returns false when exhausted.
  bool next(Grouping& out);

 private:
  void refill(int from);

  int h_;
  int order_;
  bool done_;
  bool fresh_;
  std::vector<int> rgs_;      // rgs_[0] = 0 is the anchor of the unused block
  std::vector<int> prefmax_;  // prefmax_[i] = max(rgs_[0..i])
};

void for_each_grouping(int h, int order, const std::function<void(const Grouping&)>& fn);

// Textual syntax used by the CLI and reports: `{a}|{b,c}` with MAGs in
// canonical order and alleles comma-separated.
std::string format_mag(AlleleMask mag, const AllelePanel& panel);
std::string format_grouping(const Grouping& g, const AllelePanel& panel);
Grouping parse_grouping(const std::string& text, const AllelePanel& panel);

}  // namespace magscan
