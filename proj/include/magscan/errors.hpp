#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace magscan {

enum class Errc {
  RankDeficient,
  Separation,
  NoConvergence,
  NotNested,
  NegativeStatistic,
  EmptyCategory,
  OrderOutOfRange,
  OverlappingMags,
  EmptyMag,
  UnknownAllele,
  DegenerateDesign,
  AllDegenerate,
  SearchSpaceTooLarge,
  InvalidTree,
  InvalidBranchPath,
  MalformedRow,
  UnknownTraitLevel,
  DuplicateId,
  PanelTooLarge,
  InvalidConfig,
  IoFailure,
};

const char* errc_name(Errc c);

// All library failures surface as Error (or a subclass carrying structured
// detail). what() is a single line "<Code>: <message>" so the CLI can emit
// machine-parsable diagnostics.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& msg)
      : std::runtime_error(std::string(errc_name(code)) + ": " + msg), code_(code) {}
  Errc code() const { return code_; }

 private:
  Errc code_;
};

enum class DegeneracyCause { ConstantIndicator, DuplicateIndicator, Collinear };

const char* degeneracy_cause_name(DegeneracyCause c);

class DegenerateDesignError : public Error {
 public:
  DegenerateDesignError(DegeneracyCause cause, const std::string& msg)
      : Error(Errc::DegenerateDesign, msg), cause_(cause) {}
  DegeneracyCause cause() const { return cause_; }

 private:
  DegeneracyCause cause_;
};

class SearchSpaceError : public Error {
 public:
  SearchSpaceError(std::string exact_count, const std::string& msg)
      : Error(Errc::SearchSpaceTooLarge, msg), exact_count_(std::move(exact_count)) {}
  // Decimal digits of the exact number of groupings that would be fitted.
  const std::string& exact_count() const { return exact_count_; }

 private:
  std::string exact_count_;
};

class MalformedRowError : public Error {
 public:
  MalformedRowError(std::size_t line, const std::string& msg)
      : Error(Errc::MalformedRow, "line " + std::to_string(line) + ": " + msg), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

}  // namespace magscan
