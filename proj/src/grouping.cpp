#include "magscan/grouping.hpp"

#include <algorithm>
#include <bit>
#include <sstream>
#include <unordered_set>

namespace magscan {

const char* errc_name(Errc c) {
  switch (c) {
    case Errc::RankDeficient: return "RankDeficient";
    case Errc::Separation: return "Separation";
    case Errc::NoConvergence: return "NoConvergence";
    case Errc::NotNested: return "NotNested";
    case Errc::NegativeStatistic: return "NegativeStatistic";
    case Errc::EmptyCategory: return "EmptyCategory";
    case Errc::OrderOutOfRange: return "OrderOutOfRange";
    case Errc::OverlappingMags: return "OverlappingMags";
    case Errc::EmptyMag: return "EmptyMag";
    case Errc::UnknownAllele: return "UnknownAllele";
    case Errc::DegenerateDesign: return "DegenerateDesign";
    case Errc::AllDegenerate: return "AllDegenerate";
    case Errc::SearchSpaceTooLarge: return "SearchSpaceTooLarge";
    case Errc::InvalidTree: return "InvalidTree";
    case Errc::InvalidBranchPath: return "InvalidBranchPath";
    case Errc::MalformedRow: return "MalformedRow";
    case Errc::UnknownTraitLevel: return "UnknownTraitLevel";
    case Errc::DuplicateId: return "DuplicateId";
    case Errc::PanelTooLarge: return "PanelTooLarge";
    case Errc::InvalidConfig: return "InvalidConfig";
    case Errc::IoFailure: return "IoFailure";
  }
  return "Unknown";
}

const char* degeneracy_cause_name(DegeneracyCause c) {
  switch (c) {
    case DegeneracyCause::ConstantIndicator: return "constant-indicator";
    case DegeneracyCause::DuplicateIndicator: return "duplicate-indicator";
    case DegeneracyCause::Collinear: return "collinear";
  }
  return "unknown";
}

AllelePanel::AllelePanel(std::vector<std::string> names) : names_(std::move(names)) {
  if (names_.empty())
    throw Error(Errc::InvalidConfig, "allele panel must contain at least one allele");
  if (static_cast<int>(names_.size()) > kMaxPanelSize)
    throw Error(Errc::PanelTooLarge, "panel has " + std::to_string(names_.size()) +
                                         " alleles; at most " + std::to_string(kMaxPanelSize) +
                                         " are supported");
  std::unordered_set<std::string> seen;
  for (const auto& n : names_) {
    if (n.empty()) throw Error(Errc::InvalidConfig, "empty allele identifier");
    if (!seen.insert(n).second)
      throw Error(Errc::InvalidConfig, "duplicate allele identifier '" + n + "'");
  }
}

int AllelePanel::index(const std::string& name) const {
  if (auto i = find(name)) return *i;
  throw Error(Errc::UnknownAllele, "allele '" + name + "' not in panel");
}

std::optional<int> AllelePanel::find(const std::string& name) const {
  for (int i = 0; i < size(); ++i)
    if (names_[i] == name) return i;
  return std::nullopt;
}

AlleleMask AllelePanel::full_mask() const {
  return size() == kMaxPanelSize ? ~AlleleMask{0} : (AlleleMask{1} << size()) - 1;
}

AlleleMask Grouping::union_mask() const {
  AlleleMask u = 0;
  for (AlleleMask m : mags) u |= m;
  return u;
}

std::size_t GroupingHash::operator()(const Grouping& g) const {
  std::size_t h = 0xcbf29ce484222325ull;
  for (AlleleMask m : g.mags) {
    h ^= static_cast<std::size_t>(m);
    h *= 0x100000001b3ull;
  }
  return h;
}

Grouping canonical_form(std::vector<AlleleMask> mags) {
  AlleleMask seen = 0;
  for (AlleleMask m : mags) {
    if (m == 0) throw Error(Errc::EmptyMag, "grouping contains an empty MAG");
    if (m & seen) throw Error(Errc::OverlappingMags, "MAGs are not pairwise disjoint");
    seen |= m;
  }
  // MAGs ascend by their minimum allele index, i.e. by lowest set bit (plain
  // mask comparison would order by highest bit instead)
  std::sort(mags.begin(), mags.end(), [](AlleleMask a, AlleleMask b) {
    return (a & ~(a - 1)) < (b & ~(b - 1));
  });
  return Grouping{std::move(mags)};
}

Grouping grouping_from_sets(const std::vector<std::vector<int>>& sets) {
  std::vector<AlleleMask> mags;
  mags.reserve(sets.size());
  for (const auto& s : sets) {
    AlleleMask m = 0;
    for (int i : s) {
      if (i < 0 || i >= kMaxPanelSize)
        throw Error(Errc::UnknownAllele, "allele index " + std::to_string(i) + " out of range");
      m |= AlleleMask{1} << i;
    }
    mags.push_back(m);
  }
  return canonical_form(std::move(mags));
}

namespace {

void check_order(int h, int j) {
  if (h < 1) throw Error(Errc::InvalidConfig, "panel size must be positive");
  if (j < 1 || j > h)
    throw Error(Errc::OrderOutOfRange, "order " + std::to_string(j) +
                                           " outside [1, " + std::to_string(h) + "]");
}

// Row n of the Stirling-second-kind triangle, S(n, 0..n), exact integers.
std::vector<mpz_class> stirling2_row(int n) {
  std::vector<mpz_class> row{1};  // S(0,0) = 1
  for (int m = 1; m <= n; ++m) {
    std::vector<mpz_class> next(m + 1);
    next[0] = 0;
    for (int k = 1; k < m; ++k) next[k] = k * row[k] + row[k - 1];
    next[m] = 1;
    row = std::move(next);
  }
  return row;
}

}  // namespace

mpz_class count_groupings(int h, int j) {
  check_order(h, j);
  return stirling2_row(h + 1)[j + 1];
}

mpz_class count_groupings_up_to(int h, int max_order) {
  check_order(h, max_order);
  auto row = stirling2_row(h + 1);
  mpz_class total = 0;
  for (int j = 1; j <= max_order; ++j) total += row[j + 1];
  return total;
}

mpz_class bell_number(int n) {
  if (n < 0) throw Error(Errc::InvalidConfig, "Bell number of negative n");
  auto row = stirling2_row(n);
  mpz_class total = 0;
  for (const auto& v : row) total += v;
  return total;
}

GroupingStream::GroupingStream(int h, int order)
    : h_(h), order_(order), done_(false), fresh_(true), rgs_(h + 1, 0), prefmax_(h + 1, 0) {
  check_order(h, order);
  refill(1);
}

// Smallest continuation from position `from` that can still reach exactly
// `order_` blocks beyond the anchor: stay at 0 while enough positions remain,
// otherwise take the forced climb.
void GroupingStream::refill(int from) {
  for (int i = from; i <= h_; ++i) {
    int m = prefmax_[i - 1];
    int remaining = h_ - i;
    int d = (m + remaining >= order_) ? 0 : m + 1;
    rgs_[i] = d;
    prefmax_[i] = std::max(m, d);
  }
}

bool GroupingStream::next(Grouping& out) {
  if (done_) return false;
  if (!fresh_) {
    int i = h_;
    for (; i >= 1; --i) {
      int m = prefmax_[i - 1];
      int cap = std::min(m + 1, order_);
      if (rgs_[i] < cap) {
        ++rgs_[i];
        prefmax_[i] = std::max(m, rgs_[i]);
        refill(i + 1);
        break;
      }
    }
    if (i == 0) {
      done_ = true;
      return false;
    }
  }
  fresh_ = false;
  out.mags.assign(order_, 0);
  for (int i = 1; i <= h_; ++i)
    if (rgs_[i] > 0) out.mags[rgs_[i] - 1] |= AlleleMask{1} << (i - 1);
  return true;
}

void for_each_grouping(int h, int order, const std::function<void(const Grouping&)>& fn) {
  GroupingStream stream(h, order);
  Grouping g;
  while (stream.next(g)) fn(g);
}

std::string format_mag(AlleleMask mag, const AllelePanel& panel) {
  std::ostringstream os;
  os << '{';
  bool first = true;
  for (int i = 0; i < panel.size(); ++i) {
    if (mag & (AlleleMask{1} << i)) {
      if (!first) os << ',';
      os << panel.name(i);
      first = false;
    }
  }
  os << '}';
  return os.str();
}

std::string format_grouping(const Grouping& g, const AllelePanel& panel) {
  std::ostringstream os;
  for (std::size_t i = 0; i < g.mags.size(); ++i) {
    if (i) os << '|';
    os << format_mag(g.mags[i], panel);
  }
  return os.str();
}

namespace {

std::string strip(const std::string& s) {
  auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

}  // namespace

Grouping parse_grouping(const std::string& text, const AllelePanel& panel) {
  std::vector<AlleleMask> mags;
  std::size_t pos = 0;
  auto skip_space = [&] {
    while (pos < text.size() && (text[pos] == ' ' || text[pos] == '\t')) ++pos;
  };
  skip_space();
  while (pos < text.size()) {
    if (text[pos] != '{')
      throw Error(Errc::InvalidConfig, "expected '{' in grouping '" + text + "'");
    std::size_t close = text.find('}', pos);
    if (close == std::string::npos)
      throw Error(Errc::InvalidConfig, "unterminated MAG in grouping '" + text + "'");
    AlleleMask m = 0;
    std::string body = text.substr(pos + 1, close - pos - 1);
    std::istringstream is(body);
    std::string allele;
    while (std::getline(is, allele, ',')) {
      allele = strip(allele);
      if (!allele.empty()) m |= AlleleMask{1} << panel.index(allele);
    }
    mags.push_back(m);
    pos = close + 1;
    skip_space();
    if (pos < text.size()) {
      if (text[pos] != '|')
        throw Error(Errc::InvalidConfig, "expected '|' between MAGs in '" + text + "'");
      ++pos;
      skip_space();
    }
  }
  return canonical_form(std::move(mags));
}

}  // namespace magscan
