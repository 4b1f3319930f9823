#pragma once

#include <stdexcept>
#include <string>

namespace lhc {

// Input data failed validation (malformed ensemble, bad weights, ...).
struct ValidationError : std::runtime_error {
    explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

// A caller broke an operation's precondition.
struct ContractViolation : std::logic_error {
    explicit ContractViolation(const std::string& what) : std::logic_error(what) {}
};

// An exact sum was requested whose count-class table exceeds the compute
// budget. Callers are expected to fall back to Monte Carlo estimates.
struct BudgetExceeded : std::runtime_error {
    BudgetExceeded(const std::string& what, double classes)
        : std::runtime_error(what), class_count(classes) {}
    double class_count;
};

// A compressed message that cannot have been produced by the encoder.
struct MalformedMessage : std::runtime_error {
    explicit MalformedMessage(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace lhc
