#pragma once

#include <stdexcept>
#include <string>

namespace rfmtl {

// Base class for all toolkit errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// (modulation, signal) pair not present in the class table.
class ClassTableError : public Error {
public:
    using Error::Error;
};

// Shapes do not conform (kernel larger than map, length mismatch, ...).
class DimensionError : public Error {
public:
    using Error::Error;
};

// Non-finite values where finite ones are required.
class NumericInputError : public Error {
public:
    using Error::Error;
};

// Invalid configuration values.
class ConfigError : public Error {
public:
    using Error::Error;
};

// Operation called in the wrong state (e.g. backward without forward).
class StateError : public Error {
public:
    using Error::Error;
};

// Optimizer saw a non-finite gradient; message names the tensor.
class OptimizerError : public Error {
public:
    using Error::Error;
};

// A (class, SNR) cell is too small for the 70/20/10 split.
class SplitInfeasibleError : public Error {
public:
    using Error::Error;
};

// Calibration failed (empty calibration set, degenerate model, ...).
class CalibrationError : public Error {
public:
    using Error::Error;
};

// File format problems (bad magic, truncated payloads, ...).
class FormatError : public Error {
public:
    using Error::Error;
};

}  // namespace rfmtl
