#pragma once

#include <stdexcept>
#include <string>

namespace pbl {

/// Base class for every failure raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Bad or inconsistent user input (grid extents, config keys, flow parameters).
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Misuse of an API (invalid axis, mismatched grids, too few sweep points).
class UsageError : public Error {
public:
    using Error::Error;
};

/// A quantity left its admissible range (u_e <= 0, xi outside (0,1], U_s <= 0 under a square root).
class DomainError : public Error {
public:
    using Error::Error;
};

/// Linear or nonlinear solver failure.
class SolverError : public Error {
public:
    using Error::Error;
};

/// Solver finished but the residual check failed.
class AccuracyError : public Error {
public:
    using Error::Error;
};

/// Boundary-layer march failure at a given station.
class MarchError : public SolverError {
public:
    MarchError(const std::string& msg, int station) : SolverError(msg), station_(station) {}
    int station() const { return station_; }

private:
    int station_;
};

/// Wall shear lost its sign during the Prandtl march.
class SeparationError : public MarchError {
public:
    using MarchError::MarchError;
};

/// Grid cannot resolve the layer at the requested viscosity.
class ResolutionError : public Error {
public:
    ResolutionError(const std::string& msg, double eps) : Error(msg), eps_(eps) {}
    double eps() const { return eps_; }

private:
    double eps_;
};

/// Fixed-point iteration stopped contracting.
class DivergenceError : public SolverError {
public:
    using SolverError::SolverError;
};

} // namespace pbl
