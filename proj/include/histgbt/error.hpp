#pragma once

#include <stdexcept>
#include <string>

namespace histgbt {

enum class ErrorCode {
  EmptyColumn,
  UnsupportedWidth,
  IndexOutOfRange,
  AllMissing,
  UnexpectedMissing,
  StaleBinning,
  ShapeMismatch,
  InvalidResizeTarget,
  InvalidLabel,
  EmptyDataset,
  DivergenceDetected,
  DuplicateKey,
  SchemaMismatch,
  SchemaError,
  ParseError,
  VersionError,
  InvalidFoldCount,
  DegenerateLabels,
  ConfigError,
};

const char* error_name(ErrorCode code);

/// Library-wide exception type. `what()` starts with the error name so the
/// CLI can surface it on stderr verbatim.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail)
      : std::runtime_error(std::string(error_name(code)) + ": " + detail),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }
  const char* name() const noexcept { return error_name(code_); }

 private:
  ErrorCode code_;
};

}  // namespace histgbt
