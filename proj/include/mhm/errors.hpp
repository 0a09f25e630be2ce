#pragma once

#include <stdexcept>
#include <string>

namespace mhm {

// Base class for everything this library throws on purpose. Input-validation
// failures and numeric failures are separated so the CLI can map them to
// distinct exit codes (2 and 3).
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct InputError : Error {
    using Error::Error;
};

struct NumericError : Error {
    using Error::Error;
};

// p <= q, or a parameter outside its admissible interval.
struct OrderViolation : InputError {
    using InputError::InputError;
};

// Expected-output signs wrong: needs v_bar > 0 under effort and v_lo < 0 under shirk.
struct SignViolation : InputError {
    using InputError::InputError;
};

// Output realizations must satisfy g > 0 > b.
struct OutputValueViolation : InputError {
    using InputError::InputError;
};

// Argument outside the domain of the requested operation (e.g. a promised
// utility off [0, U_bar]).
struct DomainError : InputError {
    using InputError::InputError;
};

// Operation requires the other cost regime.
struct RegimeError : InputError {
    using InputError::InputError;
};

// Requested simulation horizon leaves delta^horizon above the truncation
// tolerance, so discounted means could be off by more than intended.
struct TruncationWarning : InputError {
    using InputError::InputError;
};

// Iteration cap hit before the sup-norm stopping rule was met, or a converged
// value function failed its post-conditions.
struct NonConvergence : NumericError {
    using NumericError::NumericError;
};

// Brute-force optimality audit found a profitable deviation from the
// closed-form policy, or the value function is inconsistent with it.
struct OptimalityViolation : NumericError {
    using NumericError::NumericError;
};

// Upper-boundary slope past U_R must be negative for the weight cutoff
// beta_bar to exist.
struct SlopeSignError : NumericError {
    using NumericError::NumericError;
};

// No feasible recommendation mixture at the queried promised utility.
struct Infeasible : NumericError {
    using NumericError::NumericError;
};

// A quantity the search relies on to be monotone in delta came back
// decreasing beyond numerical tolerance.
struct NonMonotoneWarning : NumericError {
    using NumericError::NumericError;
};

} // namespace mhm
