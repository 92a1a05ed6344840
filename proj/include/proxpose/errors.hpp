#pragma once

#include <stdexcept>
#include <string>

namespace proxpose {

// Base class for all library errors. The CLI maps subclasses to exit codes:
// ConfigError -> 1, IoError/ParseError -> 2, EmptyResultError -> 3.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Bad configuration or API misuse (unknown group, invalid parameter, ...).
class ConfigError : public Error {
public:
    using Error::Error;
};

// Filesystem / stream failures.
class IoError : public Error {
public:
    using Error::Error;
};

// Malformed input document. Carries a byte offset when the underlying
// parser reports one (offset < 0 means unknown).
class ParseError : public Error {
public:
    ParseError(const std::string& msg, long long byte_offset = -1)
        : Error(msg), byte_offset_(byte_offset) {}
    long long byte_offset() const { return byte_offset_; }

private:
    long long byte_offset_;
};

// A record references an entity that does not exist (dangling image_id,
// unknown marker id, ...).
class ReferentialError : public ParseError {
public:
    using ParseError::ParseError;
};

// Declared keypoint layout does not match the data.
class LayoutError : public ParseError {
public:
    using ParseError::ParseError;
};

// A result set is empty or degenerate (empty crop, no correspondences, ...).
class EmptyResultError : public Error {
public:
    using Error::Error;
};

// Coordinate-frame mismatch when composing transforms and points.
class FrameError : public Error {
public:
    using Error::Error;
};

} // namespace proxpose
