#pragma once

#include <stdexcept>
#include <string>

namespace gptcloak {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An argument lies outside the domain of the operation (non-positive radius, r < 0, ...).
class DomainError : public Error {
public:
    using Error::Error;
};

/// Radii/conductivities violate the layered-structure invariants.
class InvalidStructureError : public Error {
public:
    using Error::Error;
};

/// The cascade for some mode has a vanishing (2,2) entry, so M_k is undefined.
class SingularCascadeError : public Error {
public:
    SingularCascadeError(int mode, const std::string& what)
        : Error("mode " + std::to_string(mode) + ": " + what), mode_(mode) {}

    int mode() const noexcept { return mode_; }

private:
    int mode_;
};

/// The shrunken structure does not fit strictly inside the measurement disk.
class GeometryError : public Error {
public:
    using Error::Error;
};

/// The denominator of the DtN perturbation formula vanishes.
class PoleError : public Error {
public:
    using Error::Error;
};

/// A structural precondition (insulated core, fixed outer radius, background 1) is not met.
class ConstraintError : public Error {
public:
    using Error::Error;
};

/// A log-log fit cannot be formed (zero samples, fewer than two distinct abscissae).
class DegenerateFitError : public Error {
public:
    using Error::Error;
};

}  // namespace gptcloak
