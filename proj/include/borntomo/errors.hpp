#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace borntomo {

/// Error categories. The CLI maps these onto process exit codes.
enum class ErrorKind {
    invalid_input,
    geometry,
    dimension,
    domain,
    convergence,
    divergence,
    io,
};

inline const char* to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::invalid_input: return "invalid-input";
        case ErrorKind::geometry: return "invalid-geometry";
        case ErrorKind::dimension: return "dimension-mismatch";
        case ErrorKind::domain: return "domain";
        case ErrorKind::convergence: return "non-convergence";
        case ErrorKind::divergence: return "divergence";
        case ErrorKind::io: return "io";
    }
    return "unknown";
}

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

/// Raised by iterative solvers that stop at max_iter above tolerance.
class ConvergenceError : public Error {
public:
    ConvergenceError(const std::string& what, double best_residual)
        : Error(ErrorKind::convergence, what), best_residual_(best_residual) {}
    double best_residual() const noexcept { return best_residual_; }

private:
    double best_residual_;
};

/// Raised when the optimizer produces a non-finite objective.
class DivergenceError : public Error {
public:
    DivergenceError(const std::string& what, std::vector<double> last_finite_iterate)
        : Error(ErrorKind::divergence, what), last_(std::move(last_finite_iterate)) {}
    const std::vector<double>& last_finite_iterate() const noexcept { return last_; }

private:
    std::vector<double> last_;
};

inline void require(bool cond, ErrorKind kind, const std::string& msg) {
    if (!cond) throw Error(kind, msg);
}

inline void check_size(std::size_t got, std::size_t want, const char* what) {
    if (got != want)
        throw Error(ErrorKind::dimension, std::string(what) + ": expected length " + std::to_string(want) +
                                              ", got " + std::to_string(got));
}

} // namespace borntomo
