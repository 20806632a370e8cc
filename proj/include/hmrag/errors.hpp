#pragma once

#include <stdexcept>
#include <string>

namespace hmrag {

/// Root of every exception thrown by the engine.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An operation was called with arguments violating its precondition.
class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// Base for failures reported by a model or search backend.
class BackendError : public Error {
public:
    using Error::Error;
};

/// The backend could not be reached or answered with a transient failure.
/// Callers may retry.
class BackendUnavailable : public BackendError {
public:
    using BackendError::BackendError;
};

/// The backend answered but refused the request (4xx, bad payload).
class BackendRejected : public BackendError {
public:
    using BackendError::BackendError;
};

/// A scripted test double received a request it has no entry for.
/// Deliberately not a BackendError: agents must not swallow it.
class ScriptMiss : public Error {
public:
    using Error::Error;
};

/// An embedding did not match the dimension already fixed for the process
/// or for an index.
class DimensionMismatch : public Error {
public:
    using Error::Error;
};

/// Model output, a response body, or a file could not be parsed.
class ParseError : public Error {
public:
    explicit ParseError(const std::string& what, std::string raw_payload = {})
        : Error(what), raw_payload_(std::move(raw_payload)) {}

    const std::string& raw_payload() const noexcept { return raw_payload_; }

private:
    std::string raw_payload_;
};

}  // namespace hmrag
