#pragma once

#include "mhm/bellman.hpp"
#include "mhm/model.hpp"

#include <string>
#include <vector>

namespace mhm {

// Where a promise sits in the device's long-run anatomy. HighSecret mixes
// effort with paid shirking behind opaque recommendations; Effort recommends
// work transparently; Rationed sends some clients away to thin the promise;
// Absorbing promises are served forever by public play alone.
enum class RegionTag { HighSecret, Effort, Rationed, Absorbing };

const char* region_name(RegionTag tag);

// One period of the device at a given promise. U_g / U_b are the
// continuations after good / bad output under an effort recommendation.
// U_hat is the continuation for both paid shirking and rejection: neither
// conditions on output (shirk enforceability needs output-independence, and
// a rejected period produces no output at all).
struct PolicyStep {
    RegionTag region = RegionTag::Absorbing;
    double mu_e = 0.0, mu_s = 0.0, mu_o = 0.0;
    double U_g = 0.0, U_b = 0.0, U_hat = 0.0;
};

// Closed-form device step at promise U. Throws DomainError off [0, U_bar]
// or when mediation is trivial.
PolicyStep policy_at(const DerivedQuantities& d, double U);

// Worker value delivered by one step: expected stage payoff plus the
// discounted expected continuation. Equals the promise exactly.
double promise_value(const DerivedQuantities& d, const PolicyStep& step);

// Weight on the worker at which the firm is indifferent across the whole
// decreasing segment [U_R, U_bar] of the boundary: with s the segment's
// slope, beta_bar = -s/(1-s). Throws SlopeSignError if the measured slope
// is not negative.
double compute_beta_bar(const DerivedQuantities& d, const ValueFunction& F);

// Welfare-maximizing starting promise: U_R below beta_bar, U_bar above it.
// The tie at beta = beta_bar goes to U_R, the smaller promise.
double initial_utility(const DerivedQuantities& d, const ValueFunction& F);

struct ObedienceReport {
    bool pass = true;
    bool effort_wedge_binds = false; // U_g - U_b equals the wedge exactly
    bool acceptance_binds = false;   // conditional effort sits at alpha_lo
    std::vector<std::string> violations;
};

// Checks the enforceability constraints of a step: the effort wedge
// U_g - U_b >= x_delta, and conditional effort under acceptance at least
// alpha_lo. Failures are reported, not thrown.
ObedienceReport check_obedience(const DerivedQuantities& d, const PolicyStep& step);

} // namespace mhm
