#pragma once

#include <stdexcept>
#include <string>

namespace evonet {

// Thrown when tensor shapes do not chain (channel mismatch, kernel larger
// than its input, batch/spec disagreement).
struct ShapeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A layer's spatial output would shrink below 1x1 for the given input.
// Signals an architecture that cannot be instantiated; never repaired here.
struct ShapeUnderflow : ShapeError {
    using ShapeError::ShapeError;
};

struct FormatError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct CountMismatch : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct OddPoolSize : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct UnevaluatedIndividual : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct InsufficientCandidates : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Training loss became NaN/Inf; the caller decides how to score the run.
struct NonFiniteLoss : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct VersionMismatch : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ChecksumError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace evonet
