#ifndef HLAB_ERRORS_HPP
#define HLAB_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace hlab {

/// Bad config file, unknown key, unparsable value, bad CLI usage.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Linear-solve failure (non-convergence, incompatible load, unresolved
/// oscillation). Carries the offending residual when there is one.
struct SolveError : std::runtime_error {
    double residual;
    explicit SolveError(const std::string& msg, double res = 0.0)
        : std::runtime_error(msg), residual(res) {}
};

} // namespace hlab

#endif
