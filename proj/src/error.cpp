#include "tom/error.hpp"

namespace tom {

std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::InvalidParameter: return "InvalidParameter";
        case ErrorCode::DegenerateVector: return "DegenerateVector";
        case ErrorCode::DegenerateContour: return "DegenerateContour";
        case ErrorCode::AmbiguousProjection: return "AmbiguousProjection";
        case ErrorCode::AmbiguousInterior: return "AmbiguousInterior";
        case ErrorCode::NoExit: return "NoExit";
        case ErrorCode::OutOfGrid: return "OutOfGrid";
        case ErrorCode::NoCandidate: return "NoCandidate";
        case ErrorCode::ToolTooShort: return "ToolTooShort";
        case ErrorCode::Unreachable: return "Unreachable";
        case ErrorCode::AlreadyAligned: return "AlreadyAligned";
        case ErrorCode::CannotEnter: return "CannotEnter";
        case ErrorCode::UnderspecifiedTask: return "UnderspecifiedTask";
        case ErrorCode::Infeasible: return "Infeasible";
        case ErrorCode::BackendUnavailable: return "BackendUnavailable";
        case ErrorCode::MalformedPlanText: return "MalformedPlanText";
        case ErrorCode::InvalidPlan: return "InvalidPlan";
        case ErrorCode::ContactJam: return "ContactJam";
        case ErrorCode::Timeout: return "Timeout";
        case ErrorCode::ParseError: return "ParseError";
        case ErrorCode::SchemaError: return "SchemaError";
        case ErrorCode::IoError: return "IoError";
    }
    return "Unknown";
}

Error::Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}

Error Error::with_stage(std::string_view stage) const {
    return Error(code_, std::string(stage) + ": " + what());
}

}  // namespace tom
