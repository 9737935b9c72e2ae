#pragma once

#include <stdexcept>
#include <string>

namespace nahm {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DomainError : Error {
    using Error::Error;
};

struct ConvergenceError : Error {
    using Error::Error;
};

// Raised by the ansatz solver when coefficient matching has no solution.
struct InconsistentSystem : Error {
    int p_power;
    int z_power;
    std::string residual;
    InconsistentSystem(int p, int z, std::string r)
        : Error("inconsistent system at p^" + std::to_string(p) + " z^" + std::to_string(z) +
                ": residual " + r),
          p_power(p), z_power(z), residual(std::move(r)) {}
};

struct BranchPointError : Error {
    using Error::Error;
};

struct PoleError : Error {
    double location;
    PoleError(const std::string& what, double at) : Error(what), location(at) {}
};

}  // namespace nahm
