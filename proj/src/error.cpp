#include "rdmd/error.hpp"

namespace rdmd {

std::string_view error_name(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::ConvergenceFailure: return "ConvergenceFailure";
    case ErrorKind::RankOutOfRange: return "RankOutOfRange";
    case ErrorKind::ShapeMismatch: return "ShapeMismatch";
    case ErrorKind::NonFiniteInput: return "NonFiniteInput";
    case ErrorKind::NegativeLambda: return "NegativeLambda";
    case ErrorKind::InvalidOversampling: return "InvalidOversampling";
    case ErrorKind::InvalidDistribution: return "InvalidDistribution";
    case ErrorKind::InvalidBlockCount: return "InvalidBlockCount";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::IoFailure: return "IoFailure";
    case ErrorKind::BadMagic: return "BadMagic";
    case ErrorKind::UnsupportedVersion: return "UnsupportedVersion";
    case ErrorKind::TruncatedPayload: return "TruncatedPayload";
    case ErrorKind::TooFewSnapshots: return "TooFewSnapshots";
    case ErrorKind::DegenerateData: return "DegenerateData";
    case ErrorKind::MissingAmplitudes: return "MissingAmplitudes";
    case ErrorKind::EmptyInput: return "EmptyInput";
    case ErrorKind::TooManyModes: return "TooManyModes";
    case ErrorKind::MemoryCapExceeded: return "MemoryCapExceeded";
  }
  return "Unknown";
}

Error::Error(ErrorKind kind, const std::string& detail)
    : std::runtime_error(std::string(error_name(kind)) + ": " + detail), kind_(kind) {}

void fail(ErrorKind kind, const std::string& detail) { throw Error(kind, detail); }

}  // namespace rdmd
