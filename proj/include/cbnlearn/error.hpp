#pragma once

#include <stdexcept>
#include <string>

namespace cbnlearn {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed graph: dangling endpoint, self-loop, cycle, unknown variable.
class StructuralError : public Error {
public:
    using Error::Error;
};

/// Invalid scenario configuration (bad row counts, probabilities, options).
class ConfigError : public Error {
public:
    using Error::Error;
};

/// An intervention was requested on a variable that does not permit one.
class PolicyError : public Error {
public:
    using Error::Error;
};

/// The environment failed to produce the requested samples.
class EnvironmentError : public Error {
public:
    using Error::Error;
};

/// Network too large for exhaustive enumeration.
class CapacityError : public Error {
public:
    using Error::Error;
};

/// Evidence has probability zero under the network.
class ZeroProbabilityEvidence : public Error {
public:
    using Error::Error;
};

/// Belief propagation requested on a structure whose skeleton has a cycle.
class NotPolytreeError : public Error {
public:
    using Error::Error;
};

} // namespace cbnlearn
