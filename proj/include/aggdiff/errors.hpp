#pragma once

#include <stdexcept>
#include <string>

namespace aggdiff {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Parameters outside the supercritical regime; the message names the violated inequality.
class RegimeError : public Error {
public:
    using Error::Error;
};

/// Argument outside the domain of a special-function formula.
class DomainError : public Error {
public:
    using Error::Error;
};

class UnsupportedDimension : public Error {
public:
    using Error::Error;
};

class ZeroField : public Error {
public:
    ZeroField() : Error("field is identically zero") {}
    explicit ZeroField(const std::string& what) : Error(what) {}
};

/// Field and kernel (or two fields) live on incompatible grids.
class GridMismatch : public Error {
public:
    using Error::Error;
};

/// Rescaling pushed a non-negligible part of the mass past r_max.
class SupportClipped : public Error {
public:
    using Error::Error;
};

class NonFiniteValue : public Error {
public:
    using Error::Error;
};

class InvalidField : public Error {
public:
    using Error::Error;
};

class NotConverged : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

} // namespace aggdiff
