#include "texmvs/error.h"

namespace texmvs {

std::string_view ErrorKindName(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kMissingFile: return "MissingFile";
    case ErrorKind::kMalformedCamera: return "MalformedCamera";
    case ErrorKind::kDimensionMismatch: return "DimensionMismatch";
    case ErrorKind::kIoError: return "IoError";
    case ErrorKind::kMalformedHeader: return "MalformedHeader";
    case ErrorKind::kDegenerateGeometry: return "DegenerateGeometry";
    case ErrorKind::kConfigError: return "ConfigError";
    case ErrorKind::kEmptyCloud: return "EmptyCloud";
    case ErrorKind::kMissingArtifact: return "MissingArtifact";
    case ErrorKind::kNoSources: return "NoSources";
  }
  return "Unknown";
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(std::string(ErrorKindName(kind)) + ": " + message),
      kind_(kind) {}

}  // namespace texmvs
