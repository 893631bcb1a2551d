#pragma once

#include <stdexcept>
#include <string>

namespace gazeintent {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Input violates a documented precondition (unsorted stream, bad config, ...).
class InvalidInputError : public Error {
public:
    using Error::Error;
};

/// Not enough data to compute the requested quantity (e.g. zero fixations).
class InsufficientDataError : public Error {
public:
    using Error::Error;
};

/// A streaming session was used before it was fully initialized.
class SessionError : public Error {
public:
    using Error::Error;
};

/// Malformed or unreadable file contents.
class FormatError : public Error {
public:
    using Error::Error;
};

}  // namespace gazeintent
