#pragma once

#include <stdexcept>
#include <string>

namespace zxc {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
    virtual const char* kind() const noexcept { return "Error"; }
};

/// A precondition of an operation was violated by the caller.
class ContractError : public Error {
public:
    using Error::Error;
    const char* kind() const noexcept override { return "ContractError"; }
};

/// Malformed configuration or table description.
class ValidationError : public Error {
public:
    using Error::Error;
    const char* kind() const noexcept override { return "ValidationError"; }
};

/// Two translates of segments share a subsegment of positive length.
class OverlapDetected : public Error {
public:
    using Error::Error;
    const char* kind() const noexcept override { return "OverlapDetected"; }
};

class OverlappingObstacles : public Error {
public:
    using Error::Error;
    const char* kind() const noexcept override { return "OverlappingObstacles"; }
};

/// A free flight exceeded the declared horizon bound (or never ended).
class HorizonViolation : public Error {
public:
    HorizonViolation(const std::string& what, double flight)
        : Error(what), flight_(flight) {}
    double flight() const noexcept { return flight_; }
    const char* kind() const noexcept override { return "HorizonViolation"; }

private:
    double flight_;
};

/// The first obstacle hit is grazed; the caller resamples.
class TangentialHit : public Error {
public:
    using Error::Error;
    const char* kind() const noexcept override { return "TangentialHit"; }
};

class SpanTooSmall : public Error {
public:
    using Error::Error;
    const char* kind() const noexcept override { return "SpanTooSmall"; }
};

class DimensionMismatch : public Error {
public:
    using Error::Error;
    const char* kind() const noexcept override { return "DimensionMismatch"; }
};

/// A sampled arc meets one of its own vertical translates.
class BprimeViolation : public Error {
public:
    using Error::Error;
    const char* kind() const noexcept override { return "BprimeViolation"; }
};

inline void require(bool condition, const std::string& message) {
    if (!condition) throw ContractError(message);
}

}  // namespace zxc
