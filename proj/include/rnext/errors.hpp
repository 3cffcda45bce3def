#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace rnext {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Argument outside the mathematical domain of a function (e.g. r <= 0).
class DomainError : public Error {
public:
    using Error::Error;
};

// Hypothesis of an operation not met by the caller.
class PreconditionError : public Error {
public:
    using Error::Error;
};

// Operation undefined for this extremality class.
class NotApplicableError : public Error {
public:
    using Error::Error;
};

// Internal cross-check failed; indicates numerical breakdown rather than bad input.
class InternalError : public Error {
public:
    using Error::Error;
};

// Iterative method did not converge.
class NumericalError : public Error {
public:
    using Error::Error;
};

// A bending, gluing or mollification search exhausted its floor.
class SurgeryError : public Error {
public:
    SurgeryError(const std::string& what, std::vector<std::string> trace = {})
        : Error(what), trace_(std::move(trace)) {}
    const std::vector<std::string>& trace() const { return trace_; }

private:
    std::vector<std::string> trace_;
};

// A constructed object failed a final pointwise check.
class VerificationError : public Error {
public:
    using Error::Error;
};

// Malformed command line or configuration.
class UsageError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace rnext
