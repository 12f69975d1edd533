#pragma once

#include <stdexcept>
#include <string>

namespace gpn {

// Invalid tensor/matrix dimensions.
struct ShapeError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Invalid configuration value (probability out of range, empty mask, ...).
struct ParameterError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Argument outside a function's mathematical domain.
struct DomainError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Malformed caller-provided data (bad index, invalid simplex point, ...).
struct InputError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Non-finite value where finiteness is part of the contract.
struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Requested structural perturbation cannot be placed.
struct PerturbationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Dataset directory missing or inconsistent with its metadata.
struct LoadError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A class is too small to split at the requested ratios.
struct SplitError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Metric undefined for the given inputs (e.g. single-class AUC).
struct MetricError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Training diverged; message carries the epoch index.
struct TrainingError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace gpn
