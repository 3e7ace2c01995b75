#include "moequant/errors.hpp"

namespace moequant {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::NonFinite: return "NonFinite";
    case ErrorKind::DepthExceeded: return "DepthExceeded";
    case ErrorKind::NegativeDensity: return "NegativeDensity";
    case ErrorKind::DegenerateTable: return "DegenerateTable";
    case ErrorKind::OutOfRange: return "OutOfRange";
    case ErrorKind::UnknownTarget: return "UnknownTarget";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::InvalidParams: return "InvalidParams";
    case ErrorKind::NormalizationFailure: return "NormalizationFailure";
    case ErrorKind::DegenerateDensity: return "DegenerateDensity";
    case ErrorKind::NonMonotone: return "NonMonotone";
    case ErrorKind::InvalidM: return "InvalidM";
    case ErrorKind::ZeroMassRegion: return "ZeroMassRegion";
    case ErrorKind::EmptyDataset: return "EmptyDataset";
    case ErrorKind::OutOfDomain: return "OutOfDomain";
    case ErrorKind::InvalidCounts: return "InvalidCounts";
    case ErrorKind::DegenerateRegion: return "DegenerateRegion";
    case ErrorKind::UnboundedNoise: return "UnboundedNoise";
    case ErrorKind::ConfigError: return "ConfigError";
  }
  return "UnknownError";
}

bool is_config_error(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::UnknownTarget:
    case ErrorKind::DimensionMismatch:
    case ErrorKind::InvalidParams:
    case ErrorKind::InvalidM:
    case ErrorKind::InvalidCounts:
    case ErrorKind::EmptyDataset:
    case ErrorKind::UnboundedNoise:
    case ErrorKind::ConfigError:
      return true;
    default:
      return false;
  }
}

}  // namespace moequant
