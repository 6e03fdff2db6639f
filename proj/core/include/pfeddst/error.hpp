#pragma once

#include <functional>
#include <stdexcept>
#include <string>

namespace pfeddst {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Tensor/layer dimension mismatch.
struct ShapeError : Error {
    using Error::Error;
};

/// Violated operation precondition (empty batch, bad range, ...).
struct PreconditionError : Error {
    using Error::Error;
};

/// Config file problems: missing/unknown keys, invalid values.
struct ConfigError : Error {
    using Error::Error;
};

/// Malformed data file (dataset flat files, cost matrices).
struct ParseError : Error {
    using Error::Error;
};

/// Runtime failure inside a simulation (non-finite loss, ...).
struct SimulationError : Error {
    using Error::Error;
};

/// Non-fatal diagnostics are routed through a pluggable sink so tests can
/// capture them. Default sink writes to stderr.
using WarnFn = std::function<void(const std::string&)>;

WarnFn stderr_warner();

} // namespace pfeddst
