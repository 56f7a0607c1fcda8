#pragma once

#include <stdexcept>
#include <string>

namespace mobility {

/// Base class for every error raised by the model library.
class ModelError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A parameter violated one of its declared bounds.
class OutOfRangeError : public ModelError {
public:
    OutOfRangeError(std::string field, double value, std::string bound)
        : ModelError("out of range: " + field + " = " + std::to_string(value) +
                     " violates " + bound),
          field_(std::move(field)), value_(value) {}

    const std::string& field() const noexcept { return field_; }
    double value() const noexcept { return value_; }

private:
    std::string field_;
    double value_;
};

/// An input was NaN or infinite.
class NonFiniteError : public ModelError {
public:
    explicit NonFiniteError(const std::string& field)
        : ModelError("non-finite input: " + field) {}
};

/// An argument fell outside the mathematical domain of an operation.
class DomainError : public ModelError {
public:
    using ModelError::ModelError;
};

/// The requested quantity is not determined at a degenerate state
/// (e.g. the A-group threshold when the whole population is in D).
class DegenerateError : public ModelError {
public:
    using ModelError::ModelError;
};

/// A (state, threshold) combination cannot satisfy the capacity constraint.
class InfeasibleError : public ModelError {
public:
    using ModelError::ModelError;
};

/// The closed-form value expression was evaluated beyond the tipping point,
/// where it no longer equals the value function.
class OutsideSigmaRegionError : public ModelError {
public:
    using ModelError::ModelError;
};

/// A regime boundary is undefined for the given inputs (e.g. tau* at gamma = 0).
class UndefinedBoundaryError : public ModelError {
public:
    using ModelError::ModelError;
};

} // namespace mobility
