#pragma once

#include <stdexcept>
#include <string>

namespace moequant {

// Every failure mode the library reports. The CLI maps these onto exit
// codes, so additions here need a corresponding entry in exit_class().
enum class ErrorKind {
  NonFinite,
  DepthExceeded,
  NegativeDensity,
  DegenerateTable,
  OutOfRange,
  UnknownTarget,
  DimensionMismatch,
  InvalidParams,
  NormalizationFailure,
  DegenerateDensity,
  NonMonotone,
  InvalidM,
  ZeroMassRegion,
  EmptyDataset,
  OutOfDomain,
  InvalidCounts,
  DegenerateRegion,
  UnboundedNoise,
  ConfigError,
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message),
        kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

// true for errors caused by bad user input rather than numerical trouble.
bool is_config_error(ErrorKind kind);

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

}  // namespace moequant
