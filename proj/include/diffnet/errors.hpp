#pragma once

#include <stdexcept>
#include <string>

namespace diffnet {

/// Base class for all diffnet errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

class DisconnectedGraphError : public Error {
public:
    using Error::Error;
};

class IndexOutOfRangeError : public Error {
public:
    using Error::Error;
};

class ConnectivityFailureError : public Error {
public:
    using Error::Error;
};

class DimensionMismatchError : public Error {
public:
    using Error::Error;
};

class NonSpdInputError : public Error {
public:
    using Error::Error;
};

class SingularSystemError : public Error {
public:
    using Error::Error;
};

class UnstableModelError : public Error {
public:
    using Error::Error;
};

class LyapunovSolveFailureError : public Error {
public:
    using Error::Error;
};

class TheoryNotApplicableError : public Error {
public:
    using Error::Error;
};

class AssumptionViolationError : public Error {
public:
    using Error::Error;
};

class UnknownPresetError : public Error {
public:
    using Error::Error;
};

class WindowTooLongError : public Error {
public:
    using Error::Error;
};

/// Configuration/schema errors carry the offending field path when known.
class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& msg, std::string field = "")
        : Error(msg), field_(std::move(field)) {}
    const std::string& field() const { return field_; }

private:
    std::string field_;
};

class DivergenceBudgetExceededError : public Error {
public:
    using Error::Error;
};

}  // namespace diffnet
