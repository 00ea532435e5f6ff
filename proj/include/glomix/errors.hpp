#pragma once

#include <stdexcept>
#include <string>

namespace glomix {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DomainError : public Error {
public:
    using Error::Error;
};

/// Root finder did not reach the requested residual; the branch is malformed.
class ConvergenceError : public Error {
public:
    using Error::Error;
};

/// Branch endpoints are not consistent with surjectivity of the branches.
class EndpointMismatch : public Error {
public:
    using Error::Error;
};

/// Raised when the finite value of an infinite mass is requested.
class SingularMass : public Error {
public:
    using Error::Error;
};

class NonIntegrable : public Error {
public:
    using Error::Error;
};

class SamplingError : public Error {
public:
    using Error::Error;
};

class Overflow : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

} // namespace glomix
