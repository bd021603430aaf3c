#include "histgbt/error.hpp"

namespace histgbt {

const char* error_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::EmptyColumn: return "EmptyColumn";
    case ErrorCode::UnsupportedWidth: return "UnsupportedWidth";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::AllMissing: return "AllMissing";
    case ErrorCode::UnexpectedMissing: return "UnexpectedMissing";
    case ErrorCode::StaleBinning: return "StaleBinning";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::InvalidResizeTarget: return "InvalidResizeTarget";
    case ErrorCode::InvalidLabel: return "InvalidLabel";
    case ErrorCode::EmptyDataset: return "EmptyDataset";
    case ErrorCode::DivergenceDetected: return "DivergenceDetected";
    case ErrorCode::DuplicateKey: return "DuplicateKey";
    case ErrorCode::SchemaMismatch: return "SchemaMismatch";
    case ErrorCode::SchemaError: return "SchemaError";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::VersionError: return "VersionError";
    case ErrorCode::InvalidFoldCount: return "InvalidFoldCount";
    case ErrorCode::DegenerateLabels: return "DegenerateLabels";
    case ErrorCode::ConfigError: return "ConfigError";
  }
  return "UnknownError";
}

}  // namespace histgbt
