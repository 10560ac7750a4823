#pragma once

#include <stdexcept>
#include <string>

namespace odis {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Caller broke a documented precondition (shape mismatch, inconsistent inputs).
class ContractError : public Error {
public:
    explicit ContractError(const std::string& msg) : Error(msg) {}
};

/// Non-finite or otherwise malformed numeric input.
class InvalidInputError : public Error {
public:
    explicit InvalidInputError(const std::string& msg) : Error(msg) {}
};

/// Step-size / regularization exponents violate the admissibility conditions.
/// `condition` names the violated inequality.
class ScheduleError : public Error {
public:
    ScheduleError(const std::string& condition, const std::string& msg)
        : Error(msg), condition_(condition) {}
    const std::string& condition() const { return condition_; }

private:
    std::string condition_;
};

/// Communication-graph input is not usable (asymmetric adjacency, failed
/// connectivity validation, bad weights).
class GraphError : public Error {
public:
    explicit GraphError(const std::string& msg) : Error(msg) {}
};

/// Structured-file parsing failed outright (bad row, bad header, empty file).
class ParseError : public Error {
public:
    ParseError(const std::string& msg, long line = -1) : Error(msg), line_(line) {}
    long line() const { return line_; }

private:
    long line_;
};

/// File parsed but the series violates ingestion rules (gaps, non-uniform
/// spacing, out-of-order timestamps).
class IngestError : public Error {
public:
    explicit IngestError(const std::string& msg) : Error(msg) {}
};

/// The per-step problem has no feasible point over the local sets.
class InfeasibleError : public Error {
public:
    explicit InfeasibleError(const std::string& msg) : Error(msg) {}
};

/// Iterative solver hit its iteration budget; carries the last residual.
class ConvergenceError : public Error {
public:
    ConvergenceError(const std::string& msg, double residual)
        : Error(msg), residual_(residual) {}
    double residual() const { return residual_; }

private:
    double residual_;
};

/// Experiment configuration file is invalid.
class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& msg) : Error(msg) {}
};

}  // namespace odis
