#pragma once
#include <stdexcept>
#include <string>

// Error taxonomy. Three families, matching the CLI exit codes:
//   ConfigError   -> exit 1 (bad input: config text or parameter values)
//   NumericsError -> exit 2 (valid input, but the numerical contract is violated)
//   BlowupError   -> exit 3 (the computed state left the physical domain)
namespace aggsim {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct NumericsError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct BlowupError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// exit 1 family
struct ParseError : ConfigError {
    using ConfigError::ConfigError;
};
struct ValidationError : ConfigError {
    using ConfigError::ConfigError;
};
struct InvalidDimensional : ConfigError {
    using ConfigError::ConfigError;
};

// exit 2 family
struct CflViolation : NumericsError {
    using NumericsError::NumericsError;
};
struct ProbabilityOverflow : NumericsError {
    using NumericsError::NumericsError;
};
struct SingularSystem : NumericsError {
    using NumericsError::NumericsError;
};
struct InsufficientCoverage : NumericsError {
    using NumericsError::NumericsError;
};
struct EmptySample : NumericsError {
    using NumericsError::NumericsError;
};

// exit 3 family
struct FieldBlowup : BlowupError {
    using BlowupError::BlowupError;
};
struct NegativeDensity : BlowupError {
    using BlowupError::BlowupError;
};
struct DomainTooSmall : BlowupError {
    using BlowupError::BlowupError;
};
// A non-positive concentration makes log-sensing undefined; it signals a
// blown-up or otherwise invalid field.
struct NonPositiveConcentration : BlowupError {
    using BlowupError::BlowupError;
};

} // namespace aggsim
