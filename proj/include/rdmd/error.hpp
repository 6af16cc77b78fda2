#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace rdmd {

enum class ErrorKind {
  ConvergenceFailure,
  RankOutOfRange,
  ShapeMismatch,
  NonFiniteInput,
  NegativeLambda,
  InvalidOversampling,
  InvalidDistribution,
  InvalidBlockCount,
  InvalidArgument,
  IoFailure,
  BadMagic,
  UnsupportedVersion,
  TruncatedPayload,
  TooFewSnapshots,
  DegenerateData,
  MissingAmplitudes,
  EmptyInput,
  TooManyModes,
  MemoryCapExceeded,
};

std::string_view error_name(ErrorKind kind) noexcept;

// All library failures are reported through this type; `kind()` is stable and
// its name is what the CLI prints.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& detail);

  ErrorKind kind() const noexcept { return kind_; }
  std::string_view name() const noexcept { return error_name(kind_); }

 private:
  ErrorKind kind_;
};

[[noreturn]] void fail(ErrorKind kind, const std::string& detail);

inline void require(bool condition, ErrorKind kind, const std::string& detail) {
  if (!condition) fail(kind, detail);
}

}  // namespace rdmd
