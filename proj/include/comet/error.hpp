#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace comet {

enum class ErrorKind {
    MalformedRecord,
    DuplicateId,
    EmptyAfterCanonicalization,
    EmptyRoster,
    IncompleteAssignment,
    DegenerateGeometry,
    MissingSet,
    ZeroVariance,
    UnknownBeatId,
    NonConvergence,
    SingularDesign,
    SeparationDetected,
    Degeneracy,
    IoError,
    ConfigInvalid,
    DimensionMismatch,
};

std::string_view to_string(ErrorKind kind);

// All domain failures are reported through this type so callers (and the CLI)
// can emit a machine-readable kind alongside the human message.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

    ErrorKind kind() const { return kind_; }

private:
    ErrorKind kind_;
};

} // namespace comet
