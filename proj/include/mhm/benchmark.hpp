#pragma once

#include "mhm/model.hpp"

#include <array>
#include <cstdint>
#include <vector>

namespace mhm {

// What the relationship can sustain with public randomization but no
// mediation. Degenerate (permanent breakdown only) in the high-cost regime.
struct PpeSet {
    bool degenerate;
    double worker_lo;
    double worker_hi; // w - c when nondegenerate, else 0
    std::vector<std::array<double, 2>> vertices; // (worker, client) corners
};

PpeSet ppe_payoff_set(const DerivedQuantities& d);

// Best client payoff among no-mediation equilibria handing the worker U.
// Linear: G(U) = (v_bar / w) * U on [0, w - c]. Throws DomainError off the
// supported interval.
double upper_boundary_G(const DerivedQuantities& d, double U);

enum class AutomatonVariant { Pure, Mixed };

// Two-state trigger that attains the no-mediation frontier: cooperate in N,
// fall to permanent rejection P with probability gamma after a bad output.
// The pure variant plays effort in N and attains (w - c, v_bar*(w-c)/w); the
// mixed variant has the worker mix at the client break-even rate alpha_lo
// and attains (w - c, 0).
struct BenchmarkAutomaton {
    AutomatonVariant variant;
    double effort_prob_in_N;
    double gamma;
    double W_N, W_P; // worker continuation values
    double V_N, V_P; // client continuation values
};

// Throws RegimeError outside the low-cost regime (the trigger would need
// gamma > 1).
BenchmarkAutomaton build_automaton(const DerivedQuantities& d, AutomatonVariant variant);

struct AutomatonSimStats {
    long n_paths;
    int horizon;
    double worker_mean, worker_se;
    double client_mean, client_se;
};

// Monte Carlo cross-check of the automaton's promised values. Worker payoff
// uses the realized wage stream, client payoff the realized outputs.
AutomatonSimStats simulate_automaton(const DerivedQuantities& d,
                                     const BenchmarkAutomaton& automaton,
                                     int horizon, long n_paths, std::uint64_t seed);

} // namespace mhm
