#pragma once

#include <stdexcept>
#include <string>

namespace bbo {

// Base class for all harness errors so callers can catch the family at once.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A caller broke an API precondition (length mismatch, invalid config, ...).
struct ContractViolation : Error {
    using Error::Error;
};

// A candidate point contained NaN/Inf coordinates.
struct InvalidPoint : Error {
    using Error::Error;
};

// Requested benchmark function id is not in the implemented set.
struct UnsupportedFunction : Error {
    using Error::Error;
};

// Matrix factorization failed (non-positive-definite covariance etc.).
struct NumericalBreakdown : Error {
    using Error::Error;
};

// Transport-level completion failure after retries were exhausted.
struct BackendUnavailable : Error {
    using Error::Error;
};

// Strict replay mode saw a request that was never recorded.
struct ReplayMiss : Error {
    using Error::Error;
};

} // namespace bbo
