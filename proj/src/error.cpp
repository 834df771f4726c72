#include "specseg/error.hpp"

namespace specseg {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::FileNotFound: return "FileNotFound";
    case ErrorCode::DecodeError: return "DecodeError";
    case ErrorCode::UnsupportedFormat: return "UnsupportedFormat";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::NoSpecularRegion: return "NoSpecularRegion";
    case ErrorCode::EmptyRegion: return "EmptyRegion";
    case ErrorCode::NoCandidates: return "NoCandidates";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::ProviderFailure: return "ProviderFailure";
    case ErrorCode::NoValidMask: return "NoValidMask";
    case ErrorCode::EmptyLabeling: return "EmptyLabeling";
    case ErrorCode::EmptyMask: return "EmptyMask";
    case ErrorCode::DegenerateImage: return "DegenerateImage";
    case ErrorCode::ZeroBaseline: return "ZeroBaseline";
    case ErrorCode::InvalidSpec: return "InvalidSpec";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code), detail_(message) {}

}  // namespace specseg
