#pragma once

#include <stdexcept>
#include <string>

namespace dnls {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid grid, scenario or config file contents.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// A sampled function returned NaN/Inf.
class SamplingError : public Error {
public:
    using Error::Error;
};

/// A field became non-finite.
class NonFiniteError : public Error {
public:
    using Error::Error;
};

/// Ground-state iteration failed; carries the last PDE residual.
class ConvergenceError : public Error {
public:
    ConvergenceError(const std::string& what, double last_residual)
        : Error(what), last_residual_(last_residual) {}

    double last_residual() const noexcept { return last_residual_; }

private:
    double last_residual_;
};

}  // namespace dnls
