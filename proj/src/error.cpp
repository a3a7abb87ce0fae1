#include "pagegraph/error.hpp"

namespace pagegraph {

std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::MalformedFile: return "MalformedFile";
        case ErrorCode::DimensionMismatch: return "DimensionMismatch";
        case ErrorCode::DegenerateVector: return "DegenerateVector";
        case ErrorCode::PageOutOfRange: return "PageOutOfRange";
        case ErrorCode::InvariantViolation: return "InvariantViolation";
        case ErrorCode::MissingFixtureEntry: return "MissingFixtureEntry";
        case ErrorCode::Timeout: return "Timeout";
        case ErrorCode::TransportError: return "TransportError";
        case ErrorCode::ProtocolError: return "ProtocolError";
        case ErrorCode::ValidationError: return "ValidationError";
        case ErrorCode::KExceedsDocument: return "KExceedsDocument";
        case ErrorCode::EmptyGroundTruth: return "EmptyGroundTruth";
        case ErrorCode::MissingRun: return "MissingRun";
        case ErrorCode::DuplicateRetrieved: return "DuplicateRetrieved";
        case ErrorCode::EmptyPool: return "EmptyPool";
        case ErrorCode::InfeasibleTopology: return "InfeasibleTopology";
        case ErrorCode::IoError: return "IoError";
        case ErrorCode::ConfigError: return "ConfigError";
    }
    return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

}  // namespace pagegraph
