#pragma once

#include <stdexcept>
#include <string>

namespace deimos {

/// Base class for all errors thrown by this library.
class error : public std::runtime_error {
public:
    explicit error(const std::string& what) : std::runtime_error(what) {}
};

/// An operation was called with arguments that violate its contract
/// (bad dimensions, out-of-range parameters, inconsistent inputs).
class argument_error : public error {
public:
    using error::error;
};

/// A configuration document is missing, malformed, or fails validation.
class config_error : public error {
public:
    using error::error;
};

/// A stream or file could not be opened, read, or written.
class io_error : public error {
public:
    using error::error;
};

/// A persisted container is corrupt: bad magic, version, checksum,
/// or metadata inconsistent with the payload.
class format_error : public error {
public:
    using error::error;
};

/// A numerical guard fired (singular or ill-conditioned system).
class numeric_error : public error {
public:
    using error::error;
};

/// The input is degenerate for the requested operation (e.g. an
/// all-zero matrix has no components).
class degenerate_error : public error {
public:
    using error::error;
};

} // namespace deimos
