#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace specseg {

enum class ErrorCode {
  FileNotFound,
  DecodeError,
  UnsupportedFormat,
  IoError,
  NoSpecularRegion,
  EmptyRegion,
  NoCandidates,
  DimensionMismatch,
  ProviderFailure,
  NoValidMask,
  EmptyLabeling,
  EmptyMask,
  DegenerateImage,
  ZeroBaseline,
  InvalidSpec,
  InvalidConfig,
};

std::string_view to_string(ErrorCode code);

// Every failure the library reports carries one of the codes above so callers
// (the CLI in particular) can map it to an exit status without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }
  /// The message without the code prefix.
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

}  // namespace specseg
