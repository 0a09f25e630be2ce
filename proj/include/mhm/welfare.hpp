#pragma once

#include "mhm/bellman.hpp"
#include "mhm/model.hpp"

#include <vector>

namespace mhm {

// Pareto frontier of the feasible, individually rational payoff set: the
// segment from (w, v_bar) to (U_star, 0), where U_star is where the
// effort-to-shirk edge of the feasible triangle crosses V = 0.
struct FrontierSegment {
    double U_lo = 0.0, V_lo = 0.0; // (w, v_bar)
    double U_hi = 0.0, V_hi = 0.0; // (U_star, 0)
};

struct FirstBest {
    double W_star = 0.0; // max of beta U + (1 - beta) V over the frontier
    FrontierSegment L;
};

// Vertex enumeration of co{(0,0), (w, v_bar), (w + r, v_lo)} clipped to the
// nonnegative quadrant. The welfare maximum sits on the frontier segment, so
// evaluating its endpoints is exact.
FirstBest first_best(const ModelParams& par);

struct MediatedValue {
    double value = 0.0;    // max of beta U + (1 - beta) F(U)
    double argmax_U = 0.0; // U_R or U_bar; ties go to U_R
};

// The objective is affine in the mixture past U_R and F increases up to it,
// so only the two candidate launch points need evaluating.
MediatedValue mediated_value(const DerivedQuantities& d, const ValueFunction& F);

// Welfare at the Pareto-optimal payoff of the no-mediation benchmark set:
// beta (w-c) + (1-beta) v_bar (w-c) / w in the low-cost regime, 0 otherwise.
double benchmark_value(const DerivedQuantities& d);

struct DeltaStarResult {
    double delta_star = 0.0;
    bool attained = false; // false: no delta below 1 reaches the target
    double bracket_lo = 0.0, bracket_hi = 0.0; // final bisection bracket
    int iterations = 0;                        // solver probes spent
    double target = 0.0;       // v_bar (w - c) / w
    double feasible_cap = 0.0; // best client value any play can give at U_bar
    double beta_bar = 0.0;          // bias cutoff at the diagnostic solve
    bool bias_below_cutoff = false; // beta <= beta_bar: optimum sits at U_R
    double F_at_Ubar = 0.0;         // client value at U_bar, diagnostic solve
};

// Smallest delta at which the client weakly gains from launching at U_bar:
// bisection over the monotone map delta -> F_delta(U_bar) on [delta_lo, 1),
// re-deriving and re-solving at every probe, down to bracket width tol.
//
// The target value can sit at or above the feasibility ceiling on client
// payoffs at U_bar (the canonical parameters do this exactly); then
// F_delta(U_bar) approaches the target from below without ever reaching it,
// no such delta exists, and the result reports delta_star = 1 with attained
// = false instead of a bracket. When beta <= beta_bar the optimum launch is
// U_R and both sides already gain at delta_lo, so delta_star reports
// delta_lo; diagnostics are kept either way (evaluated at the bisection
// solution when attained, otherwise at the configured delta floored at
// delta_lo). Throws NonMonotoneWarning if probed values decrease in delta
// beyond numerical tolerance, NonConvergence if a crossing should exist but
// cannot be bracketed below delta = 0.9999.
DeltaStarResult find_delta_star(const ModelParams& par, double tol,
                                int grid_n = 1001, double solve_tol = 1e-8);

struct SweepRow {
    double delta = 0.0;
    double U_bar = 0.0;
    double F_at_Ubar = 0.0;
    double W_star = 0.0;
    double W_mediated = 0.0;
    double gap = 0.0; // W_star - W_mediated
};

struct SweepResult {
    std::vector<SweepRow> rows;   // in input delta order
    double min_gap = 0.0;         // empirical lower-bound witness for the gap
};

// Evaluates the anti-folk gap at each delta. Below delta_lo the device is
// worthless and the row reports W_mediated = 0; otherwise the value function
// is re-solved at that delta. Throws DomainError for an empty list or a
// delta off (0,1).
SweepResult antifolk_sweep(const ModelParams& par, const std::vector<double>& deltas,
                           int grid_n = 1001, double solve_tol = 1e-8);

struct WelfareReport {
    double W_star = 0.0;
    double W_mediated = 0.0;
    double W_benchmark = 0.0;
    double gap = 0.0;
    double delta_star = 0.0;
    double beta_bar = 0.0;
    FrontierSegment frontier_L;
};

// One-stop assembly at the configured delta. With trivial mediation the
// mediated value is 0 and the gap is the whole first best; delta_star and
// beta_bar come from the bisection either way (delta_star = 1 when the
// client's target share is unattainable below 1).
WelfareReport welfare_report(const ModelParams& par, double delta_star_tol = 1e-3,
                             int grid_n = 1001, double solve_tol = 1e-8);

} // namespace mhm
