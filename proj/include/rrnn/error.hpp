#pragma once

#include <stdexcept>
#include <string>

namespace rrnn {

/// Bad parameter or precondition violation (usage error).
class InvalidArgument : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A physical point that falls outside the region an operation is defined on.
class OutOfDomain : public std::out_of_range {
public:
    using std::out_of_range::out_of_range;
};

/// Base class for failures of the numerics themselves.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class AssemblyError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class SolverError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

/// Relative error requested against an identically-zero reference.
class UndefinedMetric : public NumericalError {
public:
    using NumericalError::NumericalError;
};

/// Internal dimension bookkeeping went wrong; always a bug.
class ConsistencyError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

} // namespace rrnn
