#pragma once

#include <stdexcept>
#include <string>

namespace capbm {

/// Argument outside the mathematical domain of a function (negative, NaN, ...).
struct DomainError : std::domain_error {
    using std::domain_error::domain_error;
};

/// Dimensions of matrices/vectors/states disagree.
struct ShapeError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct IndexError : std::out_of_range {
    using std::out_of_range::out_of_range;
};

/// Enumeration would exceed the oracle's state-space budget.
struct StateSpaceError : std::length_error {
    using std::length_error::length_error;
};

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Binary container errors. Each failure mode has its own type so callers can
// tell a wrong file apart from a damaged one.
struct FormatError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct BadMagicError : FormatError {
    using FormatError::FormatError;
};
struct VersionError : FormatError {
    using FormatError::FormatError;
};
struct TruncatedError : FormatError {
    using FormatError::FormatError;
};
struct CorruptPayloadError : FormatError {
    using FormatError::FormatError;
};

}  // namespace capbm
