#pragma once

#include <stdexcept>
#include <string>

namespace nodring {

// Domain errors carry a stable name so callers (and the CLI) can report
// which invariant was violated without parsing prose.
class Error : public std::runtime_error {
public:
    Error(std::string name, const std::string& what)
        : std::runtime_error(name + ": " + what), name_(std::move(name)) {}

    const std::string& name() const noexcept { return name_; }

private:
    std::string name_;
};

#define NODRING_ERROR(NAME)                                      \
    class NAME : public Error {                                  \
    public:                                                      \
        explicit NAME(const std::string& msg) : Error(#NAME, msg) {} \
    };

NODRING_ERROR(BadLength)
NODRING_ERROR(AsymmetricKernel)
NODRING_ERROR(DegenerateKernel)
NODRING_ERROR(NoUniqueDominantMode)
NODRING_ERROR(DominantModeNotPlanar)
NODRING_ERROR(AliasedHarmonic)
NODRING_ERROR(ZeroCubicCoefficient)
NODRING_ERROR(InvalidDelta)
NODRING_ERROR(NonFiniteState)
NODRING_ERROR(StepTooLarge)
NODRING_ERROR(NotAnEquilibrium)
NODRING_ERROR(NotSupercritical)
NODRING_ERROR(NotSubcritical)
NODRING_ERROR(NotInCoexistence)
NODRING_ERROR(InvalidParameter)
NODRING_ERROR(ConfigError)

#undef NODRING_ERROR

}  // namespace nodring
