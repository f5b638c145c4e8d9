#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ee {

// Broad failure classes; the CLI maps them onto exit codes.
enum class ErrorCategory { invalid_argument, numeric, io, config };

class Error : public std::runtime_error {
public:
    Error(ErrorCategory category, const std::string& what)
        : std::runtime_error(what), category_(category) {}
    ErrorCategory category() const { return category_; }

private:
    ErrorCategory category_;
};

#define EE_DEFINE_ERROR(Name, Category)                                                 \
    class Name : public Error {                                                         \
    public:                                                                             \
        explicit Name(const std::string& what) : Error(ErrorCategory::Category, what) {} \
    }

EE_DEFINE_ERROR(DimensionMismatch, invalid_argument);
EE_DEFINE_ERROR(InvalidN, invalid_argument);
EE_DEFINE_ERROR(EmptyCandidateSet, invalid_argument);
EE_DEFINE_ERROR(EmptyTrace, invalid_argument);
EE_DEFINE_ERROR(NoPositivePairs, invalid_argument);
EE_DEFINE_ERROR(InvalidBatch, invalid_argument);
EE_DEFINE_ERROR(InvalidK, invalid_argument);
EE_DEFINE_ERROR(LengthMismatch, invalid_argument);
EE_DEFINE_ERROR(EmptyDatabase, invalid_argument);
EE_DEFINE_ERROR(InsufficientClasses, invalid_argument);
EE_DEFINE_ERROR(InvalidFraction, invalid_argument);
EE_DEFINE_ERROR(ShapeMismatch, invalid_argument);
EE_DEFINE_ERROR(NonFiniteLoss, numeric);
EE_DEFINE_ERROR(IOFailure, io);
EE_DEFINE_ERROR(ConfigError, config);

#undef EE_DEFINE_ERROR

class ZeroNormRow : public Error {
public:
    explicit ZeroNormRow(std::size_t row)
        : Error(ErrorCategory::numeric, "row " + std::to_string(row) + " has zero norm"), row_(row) {}
    std::size_t row() const { return row_; }

private:
    std::size_t row_;
};

class NoPositiveAvailable : public Error {
public:
    explicit NoPositiveAvailable(std::size_t anchor)
        : Error(ErrorCategory::invalid_argument, "anchor " + std::to_string(anchor) + " has no positive"),
          anchor_(anchor) {}
    std::size_t anchor() const { return anchor_; }

private:
    std::size_t anchor_;
};

class NoNegativeAvailable : public Error {
public:
    explicit NoNegativeAvailable(std::size_t anchor)
        : Error(ErrorCategory::invalid_argument, "anchor " + std::to_string(anchor) + " has no negative"),
          anchor_(anchor) {}
    std::size_t anchor() const { return anchor_; }

private:
    std::size_t anchor_;
};

// Parse failures in feature files carry the 1-based line number.
class ParseError : public Error {
public:
    ParseError(std::size_t line, const std::string& what)
        : Error(ErrorCategory::io, "line " + std::to_string(line) + ": " + what), line_(line) {}
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

class NonFiniteValue : public ParseError {
public:
    explicit NonFiniteValue(std::size_t line) : ParseError(line, "non-finite value") {}
};

class EmptyFile : public Error {
public:
    explicit EmptyFile(const std::string& path) : Error(ErrorCategory::io, "empty file: " + path) {}
};

} // namespace ee
