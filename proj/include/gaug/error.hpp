#pragma once

#include <stdexcept>
#include <string>

namespace gaug {

/// Base class for every error raised by the toolkit.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Raised when an argument violates an operation's precondition.
class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// Raised when a numerical routine cannot produce a trustworthy result.
class NumericalError : public Error {
public:
    using Error::Error;
};

}  // namespace gaug
