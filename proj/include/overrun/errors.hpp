#pragma once

#include <stdexcept>
#include <string>

namespace overrun {

// Base for every error raised by the library. The CLI maps ConfigError and
// InputError to exit code 2 and NumericalError to exit code 3.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Argument outside the mathematical domain of a function (e.g. z_of(0)).
class DomainError : public Error {
public:
    using Error::Error;
};

// Invalid design or option settings.
class ConfigError : public Error {
public:
    using Error::Error;
};

// Observed data inconsistent with the design.
class InputError : public Error {
public:
    using Error::Error;
};

// Root search or iteration failure.
class NumericalError : public Error {
public:
    using Error::Error;
};

}  // namespace overrun
