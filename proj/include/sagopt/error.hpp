#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace sagopt {

// Base of every error the toolkit throws. Callers that only need a message
// catch this; tests and the CLI dispatch on the concrete subclasses.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Header/schema disagreement, duplicate names, inverted bounds.
class SchemaError : public Error {
public:
    using Error::Error;
};

// A CSV cell that is not a real number. Row is 1-based over data rows
// (the header is not counted); column is the header name.
class ParseError : public Error {
public:
    ParseError(std::size_t row, std::string column, const std::string& what)
        : Error(what), row_(row), column_(std::move(column)) {}

    [[nodiscard]] std::size_t row() const noexcept { return row_; }
    [[nodiscard]] const std::string& column() const noexcept { return column_; }

private:
    std::size_t row_;
    std::string column_;
};

// A filter (cleaning, outlier removal) left nothing behind.
class EmptyResultError : public Error {
public:
    using Error::Error;
};

// Out-of-range counts, k values, fold numbers and similar argument faults.
class InvalidArgument : public Error {
public:
    using Error::Error;
};

// Vector/matrix shape disagreement.
class DimensionError : public Error {
public:
    using Error::Error;
};

// A statistic that is undefined for the given input (e.g. zero paired differences).
class DegenerateError : public Error {
public:
    using Error::Error;
};

// A regressor family that is registered but intentionally not implemented.
class UnimplementedError : public Error {
public:
    using Error::Error;
};

// Bad hyperparameters, optimizer settings, or pipeline configuration.
class ConfigError : public Error {
public:
    using Error::Error;
};

} // namespace sagopt
