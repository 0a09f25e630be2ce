#include "mhm/welfare.hpp"

#include "mhm/benchmark.hpp"
#include "mhm/device.hpp"
#include "mhm/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

namespace mhm {

FirstBest first_best(const ModelParams& par) {
    validate(par);
    double v_bar = par.p * par.g + (1.0 - par.p) * par.b;
    double v_lo = par.q * par.g + (1.0 - par.q) * par.b;
    // Feasible triangle co{(0,0), (w, v_bar), (w+r, v_lo)} clipped to the
    // nonnegative quadrant: the shirk vertex sits below V = 0, so the clip
    // replaces it with the crossing of the effort-shirk edge, and the
    // surviving vertices are (0,0), (w, v_bar), (U_star, 0). Only the
    // northeast edge is undominated.
    double U_star = par.w + par.r * v_bar / (v_bar - v_lo);

    FirstBest fb;
    fb.L.U_lo = par.w;
    fb.L.V_lo = v_bar;
    fb.L.U_hi = U_star;
    fb.L.V_hi = 0.0;
    double at_lo = par.beta * fb.L.U_lo + (1.0 - par.beta) * fb.L.V_lo;
    double at_hi = par.beta * fb.L.U_hi + (1.0 - par.beta) * fb.L.V_hi;
    fb.W_star = std::max(at_lo, at_hi);
    return fb;
}

MediatedValue mediated_value(const DerivedQuantities& d, const ValueFunction& F) {
    double beta = d.params.beta;
    double at_R = beta * d.U_R + (1.0 - beta) * F(d.U_R);
    double at_bar = beta * d.U_bar + (1.0 - beta) * F(d.U_bar);
    if (at_bar > at_R)
        return {at_bar, d.U_bar};
    return {at_R, d.U_R};
}

double benchmark_value(const DerivedQuantities& d) {
    PpeSet set = ppe_payoff_set(d);
    if (set.degenerate)
        return 0.0;
    const std::array<double, 2>& top = set.vertices.back();
    return d.params.beta * top[0] + (1.0 - d.params.beta) * top[1];
}

namespace {

// Full re-solve at one discount factor; U_bar moves with delta, so nothing
// can be reused across probes.
double client_value_at_top(const ModelParams& par, double delta, int grid_n,
                           double solve_tol) {
    ModelParams pd = par;
    pd.delta = delta;
    DerivedQuantities dd = derive(pd);
    UtilityGrid grid = make_grid(dd, grid_n);
    ValueFunction F = policy_evaluate(dd, grid, solve_tol);
    return F(dd.U_bar);
}

// Upper edge of the feasible payoff triangle at worker payoff U: no play,
// mediated or not, can hand the client more than this.
double feasible_client_cap(const DerivedQuantities& d, double U) {
    const ModelParams& par = d.params;
    if (U <= par.w)
        return d.v_bar * U / par.w;
    return d.v_bar + (U - par.w) * (d.v_lo - d.v_bar) / par.r;
}

} // namespace

DeltaStarResult find_delta_star(const ModelParams& par, double tol, int grid_n,
                                double solve_tol) {
    if (!(tol > 0.0))
        throw DomainError("find_delta_star needs tol > 0");
    validate(par);
    DerivedQuantities base = derive(par);
    if (!(base.delta_lo < 1.0))
        throw DomainError("no discount factor below 1 gives mediation value");

    DeltaStarResult res;
    res.target = base.v_bar * (par.w - base.c) / par.w;
    res.feasible_cap = feasible_client_cap(base, base.U_bar); // U_bar is delta-free

    std::vector<std::pair<double, double>> probes;
    auto probe = [&](double delta) {
        double val = client_value_at_top(par, delta, grid_n, solve_tol);
        probes.emplace_back(delta, val);
        ++res.iterations;
        return val;
    };

    double lo = base.delta_lo;
    double hi = lo;
    if (geq_tol(res.target, res.feasible_cap)) {
        // The target sits at or above the feasibility ceiling, so
        // F_delta(U_bar) approaches it from below without reaching it and no
        // crossing exists. The canonical parameter set lands exactly on this
        // degenerate surface: v_bar r (w - c) = -v_lo c w.
        res.attained = false;
        res.delta_star = 1.0;
        res.bracket_lo = lo;
        res.bracket_hi = 1.0;
    } else {
        res.attained = true;
        if (probe(lo) < res.target) {
            // Walk toward 1 until the target is bracketed. Value iteration
            // slows like 1/(1-delta), so give up past 0.9999 rather than
            // stall.
            hi = std::max(0.999, 0.5 * (1.0 + lo));
            double f_hi = probe(hi);
            while (f_hi < res.target && 1.0 - hi > 1e-4) {
                hi = 0.5 * (1.0 + hi);
                f_hi = probe(hi);
            }
            if (f_hi < res.target)
                throw NonConvergence(
                    "client value at U_bar stays below the first-best share up to delta = 0.9999");
            while (hi - lo > tol) {
                double mid = 0.5 * (lo + hi);
                if (probe(mid) >= res.target)
                    hi = mid;
                else
                    lo = mid;
            }
        }
        res.bracket_lo = lo;
        res.bracket_hi = hi;
        res.delta_star = hi;
    }

    std::sort(probes.begin(), probes.end());
    for (std::size_t i = 1; i < probes.size(); ++i)
        if (probes[i].second < probes[i - 1].second - 1e-6)
            throw NonMonotoneWarning("client value at U_bar decreased between probes");

    double diag_delta = res.attained ? res.delta_star
                                     : std::max(par.delta, base.delta_lo);
    ModelParams pd = par;
    pd.delta = diag_delta;
    DerivedQuantities dd = derive(pd);
    UtilityGrid grid = make_grid(dd, grid_n);
    ValueFunction F = policy_evaluate(dd, grid, solve_tol);
    res.F_at_Ubar = F(dd.U_bar);
    res.beta_bar = compute_beta_bar(dd, F);
    res.bias_below_cutoff = par.beta <= res.beta_bar;
    // Below the bias cutoff the launch point is U_R, where the client value
    // is already positive at delta_lo; no extra patience is needed.
    if (res.bias_below_cutoff)
        res.delta_star = base.delta_lo;
    return res;
}

SweepResult antifolk_sweep(const ModelParams& par, const std::vector<double>& deltas,
                           int grid_n, double solve_tol) {
    if (deltas.empty())
        throw DomainError("antifolk_sweep needs at least one delta");
    validate(par);
    FirstBest fb = first_best(par);

    SweepResult out;
    out.min_gap = std::numeric_limits<double>::infinity();
    for (double delta : deltas) {
        if (!(delta > 0.0) || !(delta < 1.0))
            throw DomainError("swept delta outside (0, 1)");
        ModelParams pd = par;
        pd.delta = delta;
        DerivedQuantities dd = derive(pd);

        SweepRow row;
        row.delta = delta;
        row.U_bar = dd.U_bar;
        row.W_star = fb.W_star;
        if (dd.mediation_nontrivial) {
            UtilityGrid grid = make_grid(dd, grid_n);
            ValueFunction F = policy_evaluate(dd, grid, solve_tol);
            row.F_at_Ubar = F(dd.U_bar);
            row.W_mediated = mediated_value(dd, F).value;
        }
        row.gap = fb.W_star - row.W_mediated;
        out.min_gap = std::min(out.min_gap, row.gap);
        out.rows.push_back(row);
    }
    return out;
}

WelfareReport welfare_report(const ModelParams& par, double delta_star_tol, int grid_n,
                             double solve_tol) {
    FirstBest fb = first_best(par);
    DerivedQuantities d = derive(par);

    WelfareReport rep;
    rep.W_star = fb.W_star;
    rep.frontier_L = fb.L;
    rep.W_benchmark = benchmark_value(d);
    if (d.mediation_nontrivial) {
        UtilityGrid grid = make_grid(d, grid_n);
        ValueFunction F = policy_evaluate(d, grid, solve_tol);
        rep.W_mediated = mediated_value(d, F).value;
    }
    rep.gap = rep.W_star - rep.W_mediated;

    DeltaStarResult ds = find_delta_star(par, delta_star_tol, grid_n, solve_tol);
    rep.delta_star = ds.delta_star;
    rep.beta_bar = ds.beta_bar;
    return rep;
}

} // namespace mhm
