#include "courttrack/error.hpp"

namespace courttrack {

std::string_view to_string(ErrorCode code) {
    switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::NoPartsPresent: return "NoPartsPresent";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::NoSidelineCandidate: return "NoSidelineCandidate";
    case ErrorCode::NoBaselineCandidate: return "NoBaselineCandidate";
    case ErrorCode::DegenerateImage: return "DegenerateImage";
    case ErrorCode::EmptyPolygon: return "EmptyPolygon";
    case ErrorCode::PointAtInfinity: return "PointAtInfinity";
    case ErrorCode::Singular: return "Singular";
    case ErrorCode::DegenerateConfiguration: return "DegenerateConfiguration";
    case ErrorCode::EmptySharedParts: return "EmptySharedParts";
    case ErrorCode::MissingFeatures: return "MissingFeatures";
    case ErrorCode::MissingImage: return "MissingImage";
    case ErrorCode::TooLarge: return "TooLarge";
    case ErrorCode::DuplicateId: return "DuplicateId";
    case ErrorCode::EmptyGroundTruth: return "EmptyGroundTruth";
    case ErrorCode::NoCorrespondences: return "NoCorrespondences";
    }
    return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

ParseError::ParseError(std::string source, std::size_t line, const std::string& message)
    : Error(ErrorCode::ParseError,
            source + (line > 0 ? ":" + std::to_string(line) : std::string()) + ": " + message),
      source_(std::move(source)),
      line_(line) {}

} // namespace courttrack
