#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace apfold {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Two objects that must live on the same grid (or have matching sizes) do not.
class DimensionError : public Error {
public:
    using Error::Error;
};

/// A documented precondition of an operation was violated by its input.
class PreconditionError : public Error {
public:
    using Error::Error;
};

/// Operator assembly failed; `node()` is the interior index of the offending node.
class AssemblyError : public Error {
public:
    AssemblyError(const std::string& what, std::size_t node) : Error(what), node_(node) {}
    std::size_t node() const noexcept { return node_; }

private:
    std::size_t node_;
};

/// A factorization met a numerically zero pivot.
class SingularityError : public Error {
public:
    SingularityError(const std::string& what, std::size_t pivot) : Error(what), pivot_(pivot) {}
    std::size_t pivot() const noexcept { return pivot_; }

private:
    std::size_t pivot_;
};

/// An iteration did not reach its tolerance.
class IterationError : public Error {
public:
    IterationError(const std::string& what, double last_residual)
        : Error(what), last_residual_(last_residual) {}
    double last_residual() const noexcept { return last_residual_; }

private:
    double last_residual_;
};

/// Nonlinear solver failure; keeps the residual history of the iterates.
class SolverError : public Error {
public:
    SolverError(const std::string& what, std::vector<double> history)
        : Error(what), history_(std::move(history)) {}
    const std::vector<double>& history() const noexcept { return history_; }

private:
    std::vector<double> history_;
};

/// The computed object does not have the structure the theory predicts
/// (sign-changing principal vector, height function of the wrong type, ...).
class StructureError : public Error {
public:
    using Error::Error;
};

/// Configuration could not be parsed or validated. `field()` names the key.
class ConfigError : public Error {
public:
    ConfigError(const std::string& what, std::string field)
        : Error(what), field_(std::move(field)) {}
    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

}  // namespace apfold
