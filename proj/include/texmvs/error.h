#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace texmvs {

enum class ErrorKind {
  kMissingFile,
  kMalformedCamera,
  kDimensionMismatch,
  kIoError,
  kMalformedHeader,
  kDegenerateGeometry,
  kConfigError,
  kEmptyCloud,
  kMissingArtifact,
  kNoSources,
};

std::string_view ErrorKindName(ErrorKind kind);

// Every failure surfaced by the library is an Error carrying its kind, so
// callers (tests, CLI) can branch on the category without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message);

  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace texmvs
