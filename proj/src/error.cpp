#include "powerlens/error.hpp"

namespace powerlens {

const char* errc_name(Errc code) noexcept {
  switch (code) {
    case Errc::InvalidArgument: return "InvalidArgument";
    case Errc::ModelNotFitted: return "ModelNotFitted";
    case Errc::MissingPerCoreData: return "MissingPerCoreData";
    case Errc::LengthMismatch: return "LengthMismatch";
    case Errc::DegenerateVariance: return "DegenerateVariance";
    case Errc::EmptyDataset: return "EmptyDataset";
    case Errc::InsufficientData: return "InsufficientData";
    case Errc::SingularSystem: return "SingularSystem";
    case Errc::EmptyGroup: return "EmptyGroup";
    case Errc::InsufficientDataAtFrequency: return "InsufficientDataAtFrequency";
    case Errc::NonFiniteLoss: return "NonFiniteLoss";
    case Errc::UnsupportedFrequency: return "UnsupportedFrequency";
    case Errc::GovernorPermissionDenied: return "GovernorPermissionDenied";
    case Errc::MeterReadFailure: return "MeterReadFailure";
    case Errc::EmptyTrace: return "EmptyTrace";
    case Errc::ParseError: return "ParseError";
    case Errc::UnsupportedVersion: return "UnsupportedVersion";
    case Errc::SchemaMismatch: return "SchemaMismatch";
    case Errc::OutOfRange: return "OutOfRange";
    case Errc::WindowTooLarge: return "WindowTooLarge";
    case Errc::IoError: return "IoError";
  }
  return "Error";
}

Diagnostics& diagnostics() noexcept {
  static Diagnostics instance;
  return instance;
}

}  // namespace powerlens
