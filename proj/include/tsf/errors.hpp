#pragma once

#include <stdexcept>
#include <string>

namespace tsf {

// Error taxonomy shared across the library. The CLI maps these onto exit
// codes; library code always throws rather than exiting.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Tensor extents do not line up (broadcast failure, inner-dim mismatch, ...).
struct ShapeError : Error {
    using Error::Error;
};

// An argument violates an operation's contract (bad dilation, short series, ...).
struct ParamError : Error {
    using Error::Error;
};

// Config file failed schema validation.
struct ConfigError : Error {
    using Error::Error;
};

// A simulated trajectory or an optimizer state went non-finite / out of guard.
struct InstabilityError : Error {
    using Error::Error;
};

// Malformed external data (CSV cells, manifests, checkpoints).
struct FormatError : Error {
    using Error::Error;
};

// API misuse: non-scalar backward target, intervention on a coupled pair, ...
struct UsageError : Error {
    using Error::Error;
};

// Filesystem failure.
struct IoError : Error {
    using Error::Error;
};

// Dataset on disk does not match the config that references it.
struct StaleDataError : Error {
    using Error::Error;
};

// Nothing to aggregate.
struct AggregateError : Error {
    using Error::Error;
};

}  // namespace tsf
