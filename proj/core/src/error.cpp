#include "phasesep/error.hpp"

namespace phasesep {

std::string_view to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::InvalidInput: return "InvalidInput";
        case ErrorKind::NonConvergence: return "NonConvergence";
        case ErrorKind::DomainTooSmall: return "DomainTooSmall";
        case ErrorKind::IllConditioned: return "IllConditioned";
        case ErrorKind::MultipleComponents: return "MultipleComponents";
        case ErrorKind::OpenContour: return "OpenContour";
        case ErrorKind::OutsideTube: return "OutsideTube";
        case ErrorKind::WrongBranch: return "WrongBranch";
        case ErrorKind::NonPositiveOmega: return "NonPositiveOmega";
        case ErrorKind::EigSolverFailure: return "EigSolverFailure";
        case ErrorKind::NonPositiveWeight: return "NonPositiveWeight";
        case ErrorKind::AllModesBelowFloor: return "AllModesBelowFloor";
        case ErrorKind::NonPositiveInput: return "NonPositiveInput";
        case ErrorKind::SingularOperator: return "SingularOperator";
        case ErrorKind::DtNInversionFailure: return "DtNInversionFailure";
        case ErrorKind::TubeOverflow: return "TubeOverflow";
        case ErrorKind::ProfileRangeExceeded: return "ProfileRangeExceeded";
        case ErrorKind::Blowup: return "Blowup";
        case ErrorKind::InsufficientData: return "InsufficientData";
        case ErrorKind::ConfigError: return "ConfigError";
        case ErrorKind::StageFailure: return "StageFailure";
    }
    return "Unknown";
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

StageError::StageError(std::string stage, ErrorKind cause, const std::string& message)
    : Error(ErrorKind::StageFailure, "stage '" + stage + "' failed (" +
                                         std::string(to_string(cause)) + "): " + message),
      stage_(std::move(stage)),
      cause_(cause) {}

void fail(ErrorKind kind, const std::string& message) { throw Error(kind, message); }

}  // namespace phasesep
