#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace pagegraph {

enum class ErrorCode {
    MalformedFile,
    DimensionMismatch,
    DegenerateVector,
    PageOutOfRange,
    InvariantViolation,
    MissingFixtureEntry,
    Timeout,
    TransportError,
    ProtocolError,
    ValidationError,
    KExceedsDocument,
    EmptyGroundTruth,
    MissingRun,
    DuplicateRetrieved,
    EmptyPool,
    InfeasibleTopology,
    IoError,
    ConfigError,
};

std::string_view to_string(ErrorCode code);

// All library failures surface as this type; callers switch on code().
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message);

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace pagegraph
