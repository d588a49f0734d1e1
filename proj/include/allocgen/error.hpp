#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace allocgen {

enum class ErrorCode {
  InvalidPMF,
  MissingLEV,
  InvalidSize,
  SizeMismatch,
  DivergentPGF,
  EmptyDistribution,
  KatzDomain,
  SeriesTruncation,
  InvalidLayer,
  OracleBudget,
  UnknownNode,
  InvalidMixture,
  InvalidFrailty,
  InvalidMarginal,
  TruncatedQuantile,
  BoundaryUnderflow,
  InvalidArgument,
  ConfigError,
  UnknownCase,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Every failure raised by the library carries one of the codes above so
/// callers (the CLI in particular) can map it to an exit status.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& what);

}  // namespace allocgen
