#include "comet/error.hpp"

namespace comet {

std::string_view to_string(ErrorKind kind) {
    switch (kind) {
    case ErrorKind::MalformedRecord: return "MalformedRecord";
    case ErrorKind::DuplicateId: return "DuplicateId";
    case ErrorKind::EmptyAfterCanonicalization: return "EmptyAfterCanonicalization";
    case ErrorKind::EmptyRoster: return "EmptyRoster";
    case ErrorKind::IncompleteAssignment: return "IncompleteAssignment";
    case ErrorKind::DegenerateGeometry: return "DegenerateGeometry";
    case ErrorKind::MissingSet: return "MissingSet";
    case ErrorKind::ZeroVariance: return "ZeroVariance";
    case ErrorKind::UnknownBeatId: return "UnknownBeatId";
    case ErrorKind::NonConvergence: return "NonConvergence";
    case ErrorKind::SingularDesign: return "SingularDesign";
    case ErrorKind::SeparationDetected: return "SeparationDetected";
    case ErrorKind::Degeneracy: return "Degeneracy";
    case ErrorKind::IoError: return "IoError";
    case ErrorKind::ConfigInvalid: return "ConfigInvalid";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    }
    return "UnknownError";
}

} // namespace comet
