#pragma once

#include <stdexcept>
#include <string>

namespace agenda {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input: bad records, out-of-range arguments, invalid payloads.
class ValidationError : public Error {
public:
    using Error::Error;
};

class NotFoundError : public Error {
public:
    using Error::Error;
};

/// A state transition that is not allowed (e.g. reviewing a resolved record).
class ConflictError : public Error {
public:
    using Error::Error;
};

/// A required resource (model registry, backend) is not available.
class UnavailableError : public Error {
public:
    using Error::Error;
};

}  // namespace agenda
