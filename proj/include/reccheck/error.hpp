// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace reccheck {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Bad configuration or usage: unknown test, unsatisfiable spec, invalid parameters.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Malformed or inconsistent input data.
class DataError : public Error {
public:
    using Error::Error;
};

/// Network failure or malformed response from a remote model.
class RemoteError : public Error {
public:
    using Error::Error;
};

/// A local model returned predictions that break the prediction-list invariants.
class ContractViolation : public Error {
public:
    using Error::Error;
};

} // namespace reccheck
