#pragma once

#include <stdexcept>
#include <string>

namespace fracwsgl {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Argument outside the documented domain of an operation.
class DomainError : public Error {
public:
    using Error::Error;
};

/// Gamma function evaluated at 0 or a negative integer.
class PoleError : public DomainError {
public:
    using DomainError::DomainError;
};

/// Result does not fit in a double.
class OverflowError : public Error {
public:
    using Error::Error;
};

/// Sample index requested outside a SampledPath.
class IndexRangeError : public Error {
public:
    using Error::Error;
};

class InvalidParameter : public Error {
public:
    using Error::Error;
};

class SingularMatrixError : public Error {
public:
    using Error::Error;
};

/// An iterative solve (Newton, Picard, startup block) did not converge.
class ConvergenceError : public Error {
public:
    using Error::Error;
};

/// Solution and reference live on incompatible time grids.
class GridMismatchError : public Error {
public:
    using Error::Error;
};

}  // namespace fracwsgl
