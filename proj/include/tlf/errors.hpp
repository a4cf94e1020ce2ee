#pragma once

#include <stdexcept>
#include <string>

namespace tlf {

// Base of every error raised by the library. The CLI maps the subclasses to
// exit codes (config = 1, io = 2, numerical = 3).
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ShapeError : public Error {
public:
    using Error::Error;
};

// Invalid parameters, unsupported exponents, bad solver combinations.
class ConfigError : public Error {
public:
    using Error::Error;
};

// Malformed user data (non-binary mask, image smaller than SSIM window...).
class ValidationError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

class NumericalError : public Error {
public:
    NumericalError(const std::string& what, double residual = 0.0)
        : Error(what), residual_(residual) {}

    double residual() const noexcept { return residual_; }

private:
    double residual_;
};

// External or in-process denoiser failure. Solvers catch this and fall back.
class DenoiserError : public Error {
public:
    using Error::Error;
};

}  // namespace tlf
