#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace phasesep {

/// Failure categories reported by the numerical modules and the pipeline.
enum class ErrorKind {
    InvalidInput,
    NonConvergence,
    DomainTooSmall,
    IllConditioned,
    MultipleComponents,
    OpenContour,
    OutsideTube,
    WrongBranch,
    NonPositiveOmega,
    EigSolverFailure,
    NonPositiveWeight,
    AllModesBelowFloor,
    NonPositiveInput,
    SingularOperator,
    DtNInversionFailure,
    TubeOverflow,
    ProfileRangeExceeded,
    Blowup,
    InsufficientData,
    ConfigError,
    StageFailure,
};

std::string_view to_string(ErrorKind kind);

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message);

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

/// Raised by the pipeline when a stage fails; carries the stage id and the
/// kind of the underlying error.
class StageError : public Error {
public:
    StageError(std::string stage, ErrorKind cause, const std::string& message);

    const std::string& stage() const noexcept { return stage_; }
    ErrorKind cause() const noexcept { return cause_; }

private:
    std::string stage_;
    ErrorKind cause_;
};

[[noreturn]] void fail(ErrorKind kind, const std::string& message);

inline void require(bool condition, ErrorKind kind, const std::string& message) {
    if (!condition) fail(kind, message);
}

}  // namespace phasesep
