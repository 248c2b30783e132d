#pragma once

#include <stdexcept>
#include <string>

namespace specmap {

/// Invalid or inconsistent problem input (bad scenario file, violated
/// model invariant, unusable output location). CLI exit code 2.
class ScenarioError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A numerical routine failed to meet its contract (root count mismatch,
/// non-convergence, residual above tolerance). CLI exit code 3.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// The request is well-formed but has no content for this instance
/// (e.g. a separation report for a single-cluster support). CLI exit code 4.
class VacuousRequestError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace specmap
