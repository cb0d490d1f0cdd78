#pragma once

#include <stdexcept>
#include <string>

namespace msibim {

// Runtime failures of the simulation contracts. The message strings are part
// of the interface ("interface vanished", "band exceeds reach", "window too
// small", "ambiguous projection", "too close to interface", ...).
struct SimError : std::runtime_error {
    explicit SimError(const std::string& what) : std::runtime_error(what) {}
};

// Linear solver did not reach the requested residual.
struct SolverError : SimError {
    SolverError(const std::string& what, double residual)
        : SimError(what), best_residual(residual) {}
    double best_residual;
};

}  // namespace msibim
