#pragma once

#include <stdexcept>
#include <string>

namespace tetropix {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// File could not be opened, read or written.
class IoError : public Error {
public:
    using Error::Error;
};

/// Input parsed but is not in a supported format (raster, layout or
/// measurement file).
class FormatError : public Error {
public:
    using Error::Error;
};

/// Image or operator sizes are incompatible.
class DimensionError : public Error {
public:
    using Error::Error;
};

/// A scalar argument is outside its admissible range.
class ParameterError : public Error {
public:
    using Error::Error;
};

/// A sensor layout violates one of its invariants.
class ValidationError : public Error {
public:
    using Error::Error;
};

/// A call was made whose documented precondition does not hold.
class PreconditionError : public Error {
public:
    using Error::Error;
};

/// A requested combination (cell size, solver/layout pair) is not supported.
class UnsupportedError : public Error {
public:
    using Error::Error;
};

/// Bounded random search ran out of tries.
class SearchFailure : public Error {
public:
    SearchFailure(const std::string& what, unsigned long long tries)
        : Error(what), tries_(tries) {}

    unsigned long long tries() const noexcept { return tries_; }

private:
    unsigned long long tries_;
};

} // namespace tetropix
