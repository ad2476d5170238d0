#pragma once

#include <stdexcept>
#include <string>

namespace gcsim {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Out-of-range physical parameter (non-positive length, fringing < 1, ...).
class DomainError : public Error {
public:
    using Error::Error;
};

/// Operation called on an element of the wrong kind.
class UsageError : public Error {
public:
    using Error::Error;
};

/// Malformed network, converter or scenario description.
class ConstructionError : public Error {
public:
    using Error::Error;
};

/// Singular system or other numerical breakdown outside a time step.
class NumericalError : public Error {
public:
    using Error::Error;
};

/// A transient step could not be completed.
class StepFailure : public Error {
public:
    StepFailure(const std::string& what, double time)
        : Error(what + " at t=" + std::to_string(time) + " s"), time_(time) {}
    [[nodiscard]] double time() const noexcept { return time_; }

private:
    double time_;
};

/// Waveform analysis could not be performed (missing channel, short window).
class ReportingError : public Error {
public:
    using Error::Error;
};

class CalibrationError : public Error {
public:
    CalibrationError(const std::string& what, double lo_value, double hi_value)
        : Error(what), lo_(lo_value), hi_(hi_value) {}
    /// Quantities observed at the two ends of the search bracket.
    [[nodiscard]] double lo_value() const noexcept { return lo_; }
    [[nodiscard]] double hi_value() const noexcept { return hi_; }

private:
    double lo_;
    double hi_;
};

class TuningError : public Error {
public:
    TuningError(const std::string& what, double last_stable_kp)
        : Error(what), last_stable_kp_(last_stable_kp) {}
    /// Largest proportional gain that produced a decaying response, or 0 if none.
    [[nodiscard]] double last_stable_kp() const noexcept { return last_stable_kp_; }

private:
    double last_stable_kp_;
};

/// Malformed or out-of-range configuration.
class ConfigError : public Error {
public:
    using Error::Error;
    /// Syntax error at a 1-based line and column.
    ConfigError(const std::string& what, int line, int column)
        : Error("line " + std::to_string(line) + ", column " + std::to_string(column) + ": " +
                what),
          line_(line), column_(column) {}
    /// Semantic error of one key, given as "section.key".
    ConfigError(const std::string& what, std::string key)
        : Error(key + ": " + what), key_(std::move(key)) {}

    [[nodiscard]] int line() const noexcept { return line_; }
    [[nodiscard]] int column() const noexcept { return column_; }
    [[nodiscard]] const std::string& key() const noexcept { return key_; }

private:
    int line_ = 0;
    int column_ = 0;
    std::string key_;
};

class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace gcsim
