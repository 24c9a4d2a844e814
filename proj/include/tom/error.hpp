#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace tom {

enum class ErrorCode {
    InvalidParameter,
    DegenerateVector,
    DegenerateContour,
    AmbiguousProjection,
    AmbiguousInterior,
    NoExit,
    OutOfGrid,
    NoCandidate,
    ToolTooShort,
    Unreachable,
    AlreadyAligned,
    CannotEnter,
    UnderspecifiedTask,
    Infeasible,
    BackendUnavailable,
    MalformedPlanText,
    InvalidPlan,
    ContactJam,
    Timeout,
    ParseError,
    SchemaError,
    IoError,
};

std::string_view to_string(ErrorCode code);

// Single exception type for the library; callers dispatch on code().
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what);

    ErrorCode code() const noexcept { return code_; }

    // Prefix the message with a pipeline stage, keeping the code.
    Error with_stage(std::string_view stage) const;

private:
    ErrorCode code_;
};

}  // namespace tom
