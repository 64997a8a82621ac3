#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace aitd {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Bad caller-supplied parameters (CLI exit code 1).
class InvalidArgument : public Error {
public:
    using Error::Error;
};

// Problems with input data: malformed files, unlabeled rows, dimension clashes
// (CLI exit code 2).
class DataError : public Error {
public:
    using Error::Error;
};

// A malformed record in a line-oriented input file. `line` is 1-based.
class ParseError : public DataError {
public:
    ParseError(const std::string& source, std::size_t line, const std::string& what)
        : DataError(source + ":" + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class ModelFormatError : public DataError {
public:
    using DataError::DataError;
};

class BadMagicError : public ModelFormatError {
public:
    using ModelFormatError::ModelFormatError;
};

class UnsupportedVersionError : public ModelFormatError {
public:
    using ModelFormatError::ModelFormatError;
};

class TruncatedModelError : public ModelFormatError {
public:
    using ModelFormatError::ModelFormatError;
};

class ChecksumMismatchError : public ModelFormatError {
public:
    using ModelFormatError::ModelFormatError;
};

} // namespace aitd
