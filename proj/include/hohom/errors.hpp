#pragma once

#include <stdexcept>
#include <string>

namespace hohom {

/// Iterative or direct solver failure; carries the achieved state.
class SolverError : public std::runtime_error {
public:
    SolverError(const std::string& what, int iterations, double residual)
        : std::runtime_error(what), iterations_(iterations), residual_(residual) {}
    int iterations() const { return iterations_; }
    double residual() const { return residual_; }

private:
    int iterations_;
    double residual_;
};

class NonConvergence : public SolverError {
public:
    using SolverError::SolverError;
};

/// Negative or zero curvature met inside CG: the discrete operator is not
/// positive definite, which points to a violated coercivity condition.
class CoercivityLoss : public SolverError {
public:
    using SolverError::SolverError;
};

/// Discretization guard refused to certify a result.
class ResolutionError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace hohom
