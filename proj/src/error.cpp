#include "allocgen/error.hpp"

namespace allocgen {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidPMF: return "InvalidPMF";
    case ErrorCode::MissingLEV: return "MissingLEV";
    case ErrorCode::InvalidSize: return "InvalidSize";
    case ErrorCode::SizeMismatch: return "SizeMismatch";
    case ErrorCode::DivergentPGF: return "DivergentPGF";
    case ErrorCode::EmptyDistribution: return "EmptyDistribution";
    case ErrorCode::KatzDomain: return "KatzDomain";
    case ErrorCode::SeriesTruncation: return "SeriesTruncation";
    case ErrorCode::InvalidLayer: return "InvalidLayer";
    case ErrorCode::OracleBudget: return "OracleBudget";
    case ErrorCode::UnknownNode: return "UnknownNode";
    case ErrorCode::InvalidMixture: return "InvalidMixture";
    case ErrorCode::InvalidFrailty: return "InvalidFrailty";
    case ErrorCode::InvalidMarginal: return "InvalidMarginal";
    case ErrorCode::TruncatedQuantile: return "TruncatedQuantile";
    case ErrorCode::BoundaryUnderflow: return "BoundaryUnderflow";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::UnknownCase: return "UnknownCase";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& what)
    : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

}  // namespace allocgen
