#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace courttrack {

enum class ErrorCode {
    InvalidArgument,
    NoPartsPresent,
    ParseError,
    IoError,
    NoSidelineCandidate,
    NoBaselineCandidate,
    DegenerateImage,
    EmptyPolygon,
    PointAtInfinity,
    Singular,
    DegenerateConfiguration,
    EmptySharedParts,
    MissingFeatures,
    MissingImage,
    TooLarge,
    DuplicateId,
    EmptyGroundTruth,
    NoCorrespondences,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message);

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

/// Parse failure in one of the interchange formats. `line()` is 1-based; 0 means
/// the failure is not tied to a line (binary formats, truncated files).
class ParseError : public Error {
public:
    ParseError(std::string source, std::size_t line, const std::string& message);

    const std::string& source() const noexcept { return source_; }
    std::size_t line() const noexcept { return line_; }

private:
    std::string source_;
    std::size_t line_;
};

} // namespace courttrack
