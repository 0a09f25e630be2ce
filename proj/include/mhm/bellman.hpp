#pragma once

#include "mhm/model.hpp"

#include <vector>

namespace mhm {

struct UtilityGrid {
    double lo = 0.0;
    double hi = 0.0; // U_bar
    int n = 0;
    double h = 0.0;  // nominal spacing hi / (n - 1)
    std::vector<double> nodes;
};

// n nominally uniform nodes on [0, U_bar], with the policy breakpoints
// {U_P, U_I, U_R_lo, U_R, U_bar - x_delta} snapped onto their nearest
// interior node so the piecewise structure sits exactly on the grid.
// Throws DomainError when mediation is trivial or n < 2.
UtilityGrid make_grid(const DerivedQuantities& d, int n);

// Piecewise-linear interpolant of client values over promised utilities.
struct ValueFunction {
    UtilityGrid grid;
    std::vector<double> values;

    // Linear interpolation; throws DomainError off [lo, hi] (up to the
    // boundary tolerance, inside which the query is clamped).
    double operator()(double U) const;
};

// A feasible recommendation mixture at one promised utility.
//   mu_e: (accept, effort)   -> continuation U_g on good output, U_b on bad
//   mu_s: (accept, shirk)    -> continuation U_hat, output-independent
//   mu_o: (reject, shirk)    -> continuation U_hat
// value is the client payoff where known, NaN otherwise.
struct BellmanSolution {
    double mu_e = 0.0, mu_s = 0.0, mu_o = 0.0;
    double U_g = 0.0, U_b = 0.0, U_hat = 0.0;
    double value = 0.0;
};

// Optimal mixture at U in closed form. Throws DomainError off [0, U_bar]
// or when mediation is trivial.
BellmanSolution closed_form_policy(const DerivedQuantities& d, double U);

struct SolveReport {
    int iterations = 0;
    double final_change = 0.0;    // sup-norm change of the last sweep
    double certified_error = 0.0; // final_change * delta / (1 - delta)
    bool converged = false;
};

// Client value of one closed-form policy step at U, continuations priced
// by F.
double policy_step_value(const DerivedQuantities& d, const ValueFunction& F, double U);

// Evaluates the closed-form policy by value iteration from F = 0, stopping
// once the sup-norm sweep change is at most tol*(1-delta)/delta, which
// certifies a sup error of at most tol. Throws NonConvergence if the
// iteration cap (default 10*log(tol)/log(delta)) is exhausted first.
ValueFunction policy_evaluate(const DerivedQuantities& d, const UtilityGrid& grid,
                              double tol, SolveReport* report = nullptr,
                              int max_iterations = 0);

struct OracleSearch {
    double prob_step = 1e-2; // mu_e, mu_s search resolution
    double ug_step = 1e-2;   // U_g search resolution on [x_delta, U_bar]
};

// Brute-force one-step optimum at U against continuation values F. Searches
// mixture pairs and U_g on grids, pins U_hat through promise keeping, keeps
// only mixtures the client would accept, and additionally tries exact
// pure-effort and pure-rejection candidates. Throws Infeasible when no
// candidate satisfies the constraints.
BellmanSolution bellman_optimality_step(const DerivedQuantities& d, const ValueFunction& F,
                                        double U, const OracleSearch& search = {});

struct NodeAudit {
    double U = 0.0;
    double policy_value = 0.0; // one closed-form step priced by F
    double oracle_value = 0.0;
    double gap = 0.0;          // oracle_value - policy_value
    double residual = 0.0;     // |policy_value - F(U)|
};

struct OptimalityReport {
    std::vector<NodeAudit> nodes;
    double max_gap = 0.0;
    double worst_gap_U = 0.0;
    double max_residual = 0.0;
    double max_second_difference = 0.0; // most convex spot found
};

// Audits F at every grid node: fixed-point residual, brute-force gap, and
// discrete concavity. Throws OptimalityViolation if the policy is beaten by
// more than tol_gap anywhere, the residual exceeds residual_tol, or a
// second difference exceeds concavity_tol.
OptimalityReport verify_policy_optimality(const DerivedQuantities& d, const ValueFunction& F,
                                          double tol_gap = 5e-3, double residual_tol = 1e-6,
                                          double concavity_tol = 1e-9,
                                          const OracleSearch& search = {});

// Second differences of grid values, nonuniformity removed: entry i is
// (slope(i, i+1) - slope(i-1, i)) * h for interior nodes.
std::vector<double> second_differences(const ValueFunction& F);

} // namespace mhm
