#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace mcdcert {

/// Base for every error raised by the toolkit.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A precondition on an argument was violated (bad epsilon, negative diameter, ...).
class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// A quantity has no defined value for the given input, e.g. n_eff of an all-zero vector.
class UndefinedQuantity : public Error {
public:
    using Error::Error;
};

/// A configured size limit (vertex count, grid budget) would be exceeded.
class LimitExceeded : public Error {
public:
    using Error::Error;
};

class ParseError : public Error {
public:
    ParseError(std::size_t offset, const std::string& message)
        : Error("parse error at offset " + std::to_string(offset) + ": " + message),
          offset_(offset), detail_(message) {}

    std::size_t offset() const noexcept { return offset_; }
    const std::string& detail() const noexcept { return detail_; }

private:
    std::size_t offset_;
    std::string detail_;
};

/// The response function could not be evaluated at a point. The point is
/// attached in declared variable order (empty when unknown).
class EvaluationError : public Error {
public:
    EvaluationError(const std::string& message, std::vector<double> point = {})
        : Error(message), point_(std::move(point)) {}

    const std::vector<double>& point() const noexcept { return point_; }

private:
    std::vector<double> point_;
};

}  // namespace mcdcert
