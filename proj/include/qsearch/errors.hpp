#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace qsearch {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Invalid parameters, flags, or incompatible inputs.
class ConfigError : public Error {
public:
    using Error::Error;
};

// An observation with zero likelihood under every hypothesis.
class DegenerateObservation : public Error {
public:
    using Error::Error;
};

// Quadrature range misses too much probability mass.
class QuadratureError : public Error {
public:
    using Error::Error;
};

class ConvergenceError : public Error {
public:
    ConvergenceError(const std::string& what, double residual, int iterations)
        : Error(what + " (residual " + std::to_string(residual) + " after " +
                std::to_string(iterations) + " iterations)"),
          residual_(residual),
          iterations_(iterations) {}

    double residual() const noexcept { return residual_; }
    int iterations() const noexcept { return iterations_; }

private:
    double residual_;
    int iterations_;
};

// Solved surfaces that violate a structural guarantee (e.g. empty R_tau).
class SolverInconsistency : public Error {
public:
    using Error::Error;
};

class CalibrationError : public Error {
public:
    using Error::Error;
};

class RunawayTrial : public Error {
public:
    RunawayTrial(std::int64_t trial, std::int64_t observations)
        : Error("trial " + std::to_string(trial) + " exceeded " +
                std::to_string(observations) + " observations"),
          trial_(trial) {}

    std::int64_t trial() const noexcept { return trial_; }

private:
    std::int64_t trial_;
};

class BundleError : public Error {
public:
    enum class Kind { io, parse, version, hash, shape };

    BundleError(Kind kind, const std::string& what) : Error(what), kind_(kind) {}

    Kind kind() const noexcept { return kind_; }

private:
    Kind kind_;
};

}  // namespace qsearch
