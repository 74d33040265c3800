#pragma once

#include <atomic>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace powerlens {

enum class Errc {
  InvalidArgument,
  ModelNotFitted,
  MissingPerCoreData,
  LengthMismatch,
  DegenerateVariance,
  EmptyDataset,
  InsufficientData,
  SingularSystem,
  EmptyGroup,
  InsufficientDataAtFrequency,
  NonFiniteLoss,
  UnsupportedFrequency,
  GovernorPermissionDenied,
  MeterReadFailure,
  EmptyTrace,
  ParseError,
  UnsupportedVersion,
  SchemaMismatch,
  OutOfRange,
  WindowTooLarge,
  IoError,
};

const char* errc_name(Errc code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message)
      : std::runtime_error(std::string(errc_name(code)) + ": " + message), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

/// Process-wide counters for conditions that are handled, not thrown.
struct Diagnostics {
  std::atomic<std::uint64_t> negative_prediction_clamps{0};
  std::atomic<std::uint64_t> load_negative_delta_warnings{0};
  std::atomic<std::uint64_t> load_zero_delta_warnings{0};
  std::atomic<std::uint64_t> load_bounds_warnings{0};

  void reset() noexcept {
    negative_prediction_clamps = 0;
    load_negative_delta_warnings = 0;
    load_zero_delta_warnings = 0;
    load_bounds_warnings = 0;
  }
};

Diagnostics& diagnostics() noexcept;

}  // namespace powerlens
