#pragma once

#include <stdexcept>
#include <string>

namespace morl {

// Common failure taxonomy. The CLI maps these onto exit codes:
// usage/config/dimension problems -> 2, numeric failures -> 3.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

class ArgumentError : public Error {
public:
    explicit ArgumentError(const std::string& what) : Error(what) {}
};

// Shape/width mismatch between coupled objects.
class DimensionError : public Error {
public:
    explicit DimensionError(const std::string& what) : Error(what) {}
};

// Operation invoked in an invalid sequence (e.g. backward without forward).
class StateError : public Error {
public:
    explicit StateError(const std::string& what) : Error(what) {}
};

class NumericError : public Error {
public:
    explicit NumericError(const std::string& what) : Error(what) {}
};

class IoError : public Error {
public:
    explicit IoError(const std::string& what) : Error(what) {}
};

class UnsupportedError : public Error {
public:
    explicit UnsupportedError(const std::string& what) : Error(what) {}
};

} // namespace morl
