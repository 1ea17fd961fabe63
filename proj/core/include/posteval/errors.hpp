#pragma once

#include <stdexcept>
#include <string>

namespace posteval {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Malformed or inconsistent evaluation data (bad counts, labels, folds).
class InputError : public Error {
public:
    explicit InputError(const std::string& what) : Error(what) {}
};

/// Invalid configuration or incompatible option combination.
class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& what) : Error(what) {}
};

/// Filesystem / serialization failure; message carries the path.
class IoError : public Error {
public:
    explicit IoError(const std::string& what) : Error(what) {}
};

} // namespace posteval
