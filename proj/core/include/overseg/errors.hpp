#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace overseg {

/// Root of every exception the library throws. The CLI maps the concrete
/// subclasses onto its exit codes.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Caller passed an argument outside the operation's domain.
class ArgumentError : public Error {
public:
    using Error::Error;
};

/// Filesystem or stream failure.
class IoError : public Error {
public:
    using Error::Error;
};

/// Malformed input file. `position()` is a byte offset for binary formats
/// and a 1-based line number for text formats.
class FormatError : public Error {
public:
    FormatError(const std::string& what, std::uint64_t position)
        : Error(what), position_(position) {}

    std::uint64_t position() const noexcept { return position_; }

private:
    std::uint64_t position_;
};

/// Well-formed input whose content cannot satisfy the request
/// (e.g. a requested class with no glyphs).
class ContentError : public Error {
public:
    using Error::Error;
};

/// Sample synthesis gave up (rejection sampling exhausted).
class GenerationError : public Error {
public:
    GenerationError(const std::string& what, std::uint64_t sample_index)
        : Error(what), sample_index_(sample_index) {}

    std::uint64_t sample_index() const noexcept { return sample_index_; }

private:
    std::uint64_t sample_index_;
};

/// NaN or Inf encountered in a forward pass, loss, or gradient.
class NumericError : public Error {
public:
    using Error::Error;
};

}  // namespace overseg
