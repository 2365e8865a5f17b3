#ifndef HFSEG_ERRORS_HPP
#define HFSEG_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace hfseg {

// Base class for all library errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Shapes or sizes do not agree (expected vs actual named in the message).
class DimensionError : public Error {
public:
    using Error::Error;
};

// Invalid argument value (non-positive sigma, even window, bad enum...).
class ParameterError : public Error {
public:
    using Error::Error;
};

// A documented precondition was violated (e.g. marker > mask).
class PreconditionError : public Error {
public:
    using Error::Error;
};

// File could not be read or written.
class IoError : public Error {
public:
    using Error::Error;
};

// File exists but its content is not an accepted format.
class FormatError : public Error {
public:
    using Error::Error;
};

// Inputs are mutually inconsistent (e.g. gray value missing from histogram).
class ConsistencyError : public Error {
public:
    using Error::Error;
};

// Data too degenerate for the requested computation (q < c, constant series...).
class DegenerateDataError : public Error {
public:
    using Error::Error;
};

// Too few samples for a statistic.
class SampleSizeError : public Error {
public:
    using Error::Error;
};

} // namespace hfseg

#endif
