#include "mhm/bellman.hpp"
#include "mhm/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace mhm {

namespace {

double boundary_slack(const DerivedQuantities& d) {
    return kBoundaryRelTol * std::max(1.0, d.U_bar);
}

double clamp_domain(const DerivedQuantities& d, double U, const char* what) {
    if (U < -boundary_slack(d) || U > d.U_bar + boundary_slack(d))
        throw DomainError(std::string(what) + ": promised utility off [0, U_bar]");
    return std::min(std::max(U, 0.0), d.U_bar);
}

struct Stencil {
    int j;
    double t;
};

Stencil locate(const std::vector<double>& x, double z) {
    auto it = std::upper_bound(x.begin(), x.end(), z);
    int j = static_cast<int>(std::clamp<long>(it - x.begin() - 1, 0, static_cast<long>(x.size()) - 2));
    double t = (z - x[j]) / (x[j + 1] - x[j]);
    return {j, std::min(std::max(t, 0.0), 1.0)};
}

} // namespace

UtilityGrid make_grid(const DerivedQuantities& d, int n) {
    if (!d.mediation_nontrivial)
        throw DomainError("make_grid: mediation is trivial, there is no utility interval to grid");
    if (n < 2)
        throw DomainError("make_grid: need at least two nodes");

    UtilityGrid grid;
    grid.lo = 0.0;
    grid.hi = d.U_bar;
    grid.n = n;
    grid.h = d.U_bar / (n - 1);
    grid.nodes.resize(n);
    for (int i = 0; i < n; ++i)
        grid.nodes[i] = grid.h * i;
    grid.nodes[n - 1] = d.U_bar;

    // Snap policy breakpoints onto their nearest interior node. Breakpoints
    // can coincide (at delta = delta_lo all three collapse), so a node
    // already carrying the same value is fine; a node carrying a different
    // breakpoint pushes the snap to a neighbor or drops it.
    std::vector<char> claimed(n, 0);
    const double same = 1e-14 * std::max(1.0, d.U_bar);
    const double breakpoints[] = {d.U_P, d.U_I, d.U_R_lo, d.U_R, d.U_bar - d.x_delta};
    for (double bp : breakpoints) {
        long nearest = std::lround(bp / grid.h);
        if (nearest <= 0 || nearest >= n - 1)
            continue;
        for (long cand : {nearest, nearest - 1, nearest + 1}) {
            if (cand <= 0 || cand >= n - 1)
                continue;
            if (std::fabs(bp - grid.h * static_cast<double>(cand)) > 0.5 * grid.h * (1.0 + 1e-9))
                continue;
            if (claimed[cand]) {
                if (std::fabs(grid.nodes[cand] - bp) <= same)
                    break; // this breakpoint is already on the grid
                continue;
            }
            grid.nodes[cand] = bp;
            claimed[cand] = 1;
            break;
        }
    }
    for (int i = 1; i < n; ++i)
        if (!(grid.nodes[i] > grid.nodes[i - 1]))
            throw DomainError("make_grid: grid too coarse to separate the policy breakpoints");
    return grid;
}

double ValueFunction::operator()(double U) const {
    double slack = kBoundaryRelTol * std::max(1.0, grid.hi);
    if (U < grid.lo - slack || U > grid.hi + slack)
        throw DomainError("value function queried off its grid");
    double z = std::min(std::max(U, grid.lo), grid.hi);
    Stencil st = locate(grid.nodes, z);
    return (1.0 - st.t) * values[st.j] + st.t * values[st.j + 1];
}

BellmanSolution closed_form_policy(const DerivedQuantities& d, double U) {
    if (!d.mediation_nontrivial)
        throw DomainError("closed_form_policy: mediation is trivial");
    const ModelParams& par = d.params;
    double Uc = clamp_domain(d, U, "closed_form_policy");

    BellmanSolution s;
    s.value = std::numeric_limits<double>::quiet_NaN();

    if (Uc <= 0.0) {
        // Settled: reject forever, all continuations stay at zero.
        s.mu_o = 1.0;
        return s;
    }
    if (Uc > d.U_R) {
        // Opaque region: recommendations hide whether effort or paid
        // shirking was drawn, so acceptance stays worthwhile for the client.
        double num = (1.0 - par.delta) * (par.w + par.r - Uc);
        double den = (1.0 - par.delta) * (par.w + par.r) + par.delta * Uc - d.U_R;
        double alpha = std::min(std::max(num / den, d.alpha_lo), 1.0);
        s.mu_e = alpha;
        s.mu_s = 1.0 - alpha;
        s.U_g = d.U_bar;
        s.U_b = std::max(d.U_bar - d.x_delta, 0.0);
        s.U_hat = Uc;
        return s;
    }
    if (Uc >= d.U_P) {
        // Transparent effort: the promise climbs on good output and drops by
        // exactly the incentive wedge on bad output.
        s.mu_e = 1.0;
        double ug = (Uc - (1.0 - par.delta) * (par.w - d.c)) / par.delta;
        ug = std::min(std::max(ug, d.x_delta), d.U_bar);
        s.U_g = ug;
        s.U_b = std::max(ug - d.x_delta, 0.0);
        s.U_hat = ug; // unreached: acceptance and effort are certain here
        return s;
    }
    // Rationed acceptance: thin the promise down by sometimes sending the
    // client away, keeping the effort wedge intact when work does happen.
    s.mu_e = Uc / d.U_P;
    s.mu_o = 1.0 - s.mu_e;
    s.U_g = d.x_delta;
    s.U_b = 0.0;
    s.U_hat = 0.0;
    return s;
}

double policy_step_value(const DerivedQuantities& d, const ValueFunction& F, double U) {
    const ModelParams& par = d.params;
    BellmanSolution s = closed_form_policy(d, U);
    double effort_branch = (1.0 - par.delta) * d.v_bar +
                           par.delta * (par.p * F(s.U_g) + (1.0 - par.p) * F(s.U_b));
    double shirk_branch = (1.0 - par.delta) * d.v_lo + par.delta * F(s.U_hat);
    double reject_branch = par.delta * F(s.U_hat);
    return s.mu_e * effort_branch + s.mu_s * shirk_branch + s.mu_o * reject_branch;
}

ValueFunction policy_evaluate(const DerivedQuantities& d, const UtilityGrid& grid,
                              double tol, SolveReport* report, int max_iterations) {
    if (!(tol > 0.0))
        throw DomainError("policy_evaluate: tol must be positive");
    const ModelParams& par = d.params;
    const int n = grid.n;

    // The policy does not move during evaluation, so each node reduces to a
    // constant plus a fixed 6-point stencil on the previous sweep.
    struct NodeOp {
        double constant;
        double coef[3];
        Stencil st[3];
    };
    std::vector<NodeOp> ops(n);
    for (int i = 0; i < n; ++i) {
        BellmanSolution s = closed_form_policy(d, grid.nodes[i]);
        NodeOp& op = ops[i];
        op.constant = (1.0 - par.delta) * (s.mu_e * d.v_bar + s.mu_s * d.v_lo);
        op.coef[0] = s.mu_e * par.delta * par.p;
        op.coef[1] = s.mu_e * par.delta * (1.0 - par.p);
        op.coef[2] = (s.mu_s + s.mu_o) * par.delta;
        op.st[0] = locate(grid.nodes, s.U_g);
        op.st[1] = locate(grid.nodes, s.U_b);
        op.st[2] = locate(grid.nodes, s.U_hat);
    }

    const double stop = tol * (1.0 - par.delta) / par.delta;
    int cap = max_iterations > 0
                  ? max_iterations
                  : static_cast<int>(std::ceil(10.0 * std::log(tol) / std::log(par.delta)));
    cap = std::max(cap, 16);

    std::vector<double> cur(n, 0.0), next(n, 0.0);
    double change = std::numeric_limits<double>::infinity();
    int it = 0;
    while (it < cap) {
        change = 0.0;
        for (int i = 0; i < n; ++i) {
            const NodeOp& op = ops[i];
            double acc = op.constant;
            for (int k = 0; k < 3; ++k) {
                const Stencil& st = op.st[k];
                acc += op.coef[k] * ((1.0 - st.t) * cur[st.j] + st.t * cur[st.j + 1]);
            }
            next[i] = acc;
            change = std::max(change, std::fabs(acc - cur[i]));
        }
        cur.swap(next);
        ++it;
        if (change <= stop)
            break;
    }
    if (!(change <= stop))
        throw NonConvergence("policy_evaluate: iteration cap hit before the stopping rule was met");

    for (double v : cur)
        if (!std::isfinite(v))
            throw NonConvergence("policy_evaluate: non-finite value");
    if (cur[0] != 0.0)
        throw NonConvergence("policy_evaluate: value at U = 0 drifted off zero");

    if (report) {
        report->iterations = it;
        report->final_change = change;
        report->certified_error = change * par.delta / (1.0 - par.delta);
        report->converged = true;
    }

    ValueFunction F;
    F.grid = grid;
    F.values = std::move(cur);
    return F;
}

BellmanSolution bellman_optimality_step(const DerivedQuantities& d, const ValueFunction& F,
                                        double U, const OracleSearch& search) {
    if (!d.mediation_nontrivial)
        throw DomainError("bellman_optimality_step: mediation is trivial");
    if (!(search.prob_step > 0.0 && search.prob_step <= 0.5))
        throw DomainError("bellman_optimality_step: prob_step outside (0, 0.5]");
    if (!(search.ug_step > 0.0))
        throw DomainError("bellman_optimality_step: ug_step must be positive");

    const ModelParams& par = d.params;
    const double Uc = clamp_domain(d, U, "bellman_optimality_step");
    const std::vector<double>& x = F.grid.nodes;
    const std::vector<double>& fv = F.values;
    const int n = F.grid.n;
    const double inv_h = 1.0 / F.grid.h;
    const double slack = boundary_slack(d);

    // Nodes sit within h/2 of their uniform positions, so the cell index is
    // off by at most one in either direction: O(1) lookup without a search.
    auto interp = [&](double z) {
        if (z <= x.front())
            return fv.front();
        if (z >= x.back())
            return fv.back();
        int j = std::clamp(static_cast<int>(z * inv_h), 0, n - 2);
        while (j > 0 && x[j] > z)
            --j;
        while (j < n - 2 && x[j + 1] < z)
            ++j;
        double t = (z - x[j]) / (x[j + 1] - x[j]);
        return (1.0 - t) * fv[j] + t * fv[j + 1];
    };

    std::vector<double> ug;
    for (double v = d.x_delta; v < d.U_bar; v += search.ug_step)
        ug.push_back(v);
    ug.push_back(d.U_bar);
    const int K = static_cast<int>(ug.size());

    // Effort-branch values per U_g candidate: what the client gets (A) and
    // what the worker is promised (Ee).
    std::vector<double> A(K), Ee(K);
    for (int j = 0; j < K; ++j) {
        A[j] = (1.0 - par.delta) * d.v_bar +
               par.delta * (par.p * interp(ug[j]) +
                            (1.0 - par.p) * interp(std::max(ug[j] - d.x_delta, 0.0)));
        Ee[j] = (1.0 - par.delta) * (par.w - d.c) + par.delta * ug[j];
    }

    const double k_shirk = (1.0 - par.delta) * (par.w + par.r);
    const double accept_tol = kBoundaryRelTol * std::max(1.0, -d.v_lo);

    BellmanSolution best;
    double best_value = -std::numeric_limits<double>::infinity();
    bool have_best = false;
    auto consider = [&](double mu_e, double mu_s, double ug_v, double uhat, double value) {
        if (!have_best || value > best_value) {
            best_value = value;
            best.mu_e = mu_e;
            best.mu_s = mu_s;
            best.mu_o = 1.0 - mu_e - mu_s;
            best.U_g = ug_v;
            best.U_b = mu_e > 0.0 ? std::max(ug_v - d.x_delta, 0.0) : 0.0;
            best.U_hat = uhat;
            best.value = value;
            have_best = true;
        }
    };

    // Pure rejection: deliver the promise by waiting.
    {
        double uhat = Uc / par.delta;
        if (uhat <= d.U_bar + slack) {
            uhat = std::min(uhat, d.U_bar);
            consider(0.0, 0.0, 0.0, uhat, par.delta * interp(uhat));
        }
    }
    // Pure effort: U_g is pinned exactly by promise keeping.
    {
        double ug_v = (Uc - (1.0 - par.delta) * (par.w - d.c)) / par.delta;
        if (ug_v >= d.x_delta - slack && ug_v <= d.U_bar + slack) {
            ug_v = std::min(std::max(ug_v, d.x_delta), d.U_bar);
            double value = (1.0 - par.delta) * d.v_bar +
                           par.delta * (par.p * interp(ug_v) +
                                        (1.0 - par.p) * interp(std::max(ug_v - d.x_delta, 0.0)));
            consider(1.0, 0.0, ug_v, ug_v, value);
        }
    }

    const int m = static_cast<int>(std::lround(1.0 / search.prob_step));
    for (int ie = 1; ie < m; ++ie) {
        const double mu_e = static_cast<double>(ie) / m;
        const double denom = (1.0 - mu_e) * par.delta;
        const double inv_denom = 1.0 / denom;
        for (int is = 0; is + ie <= m; ++is) {
            const double mu_s = static_cast<double>(is) / m;
            // Acceptance must at least break even for the client; more shirk
            // weight only hurts, so the row ends here.
            if (mu_e * d.v_bar + mu_s * d.v_lo < -accept_tol)
                break;
            const double base = Uc - mu_s * k_shirk;
            const double fixed = mu_s * (1.0 - par.delta) * d.v_lo;
            for (int j = 0; j < K; ++j) {
                double uhat = (base - mu_e * Ee[j]) * inv_denom;
                if (uhat > d.U_bar + slack)
                    continue; // raising U_g lowers uhat; keep going
                if (uhat < -slack)
                    break; // from here it only falls further
                uhat = std::min(std::max(uhat, 0.0), d.U_bar);
                double value = mu_e * A[j] + fixed + denom * interp(uhat);
                if (value > best_value || !have_best)
                    consider(mu_e, mu_s, ug[j], uhat, value);
            }
        }
    }

    if (!have_best)
        throw Infeasible("bellman_optimality_step: no feasible mixture at this promise");
    return best;
}

std::vector<double> second_differences(const ValueFunction& F) {
    const std::vector<double>& x = F.grid.nodes;
    const std::vector<double>& v = F.values;
    const int n = F.grid.n;
    std::vector<double> out;
    if (n < 3)
        return out;
    out.reserve(n - 2);
    for (int i = 1; i + 1 < n; ++i) {
        double left = (v[i] - v[i - 1]) / (x[i] - x[i - 1]);
        double right = (v[i + 1] - v[i]) / (x[i + 1] - x[i]);
        out.push_back((right - left) * F.grid.h);
    }
    return out;
}

OptimalityReport verify_policy_optimality(const DerivedQuantities& d, const ValueFunction& F,
                                          double tol_gap, double residual_tol,
                                          double concavity_tol, const OracleSearch& search) {
    OptimalityReport report;
    report.nodes.reserve(F.grid.n);

    for (int i = 0; i < F.grid.n; ++i) {
        NodeAudit audit;
        audit.U = F.grid.nodes[i];
        audit.policy_value = policy_step_value(d, F, audit.U);
        audit.oracle_value = bellman_optimality_step(d, F, audit.U, search).value;
        audit.gap = audit.oracle_value - audit.policy_value;
        audit.residual = std::fabs(audit.policy_value - F.values[i]);
        if (audit.gap > report.max_gap) {
            report.max_gap = audit.gap;
            report.worst_gap_U = audit.U;
        }
        report.max_residual = std::max(report.max_residual, audit.residual);
        report.nodes.push_back(audit);
    }

    std::vector<double> d2 = second_differences(F);
    report.max_second_difference = d2.empty() ? 0.0 : *std::max_element(d2.begin(), d2.end());

    if (report.max_residual > residual_tol)
        throw OptimalityViolation("value function is not a fixed point of its own policy (residual " +
                                  std::to_string(report.max_residual) + ")");
    if (report.max_second_difference > concavity_tol)
        throw OptimalityViolation("value function lost concavity (second difference " +
                                  std::to_string(report.max_second_difference) + ")");
    if (report.max_gap > tol_gap)
        throw OptimalityViolation("brute-force search beats the closed-form policy by " +
                                  std::to_string(report.max_gap) + " at U = " +
                                  std::to_string(report.worst_gap_U));
    return report;
}

} // namespace mhm
