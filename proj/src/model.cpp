#include "mhm/model.hpp"
#include "mhm/errors.hpp"

#include <algorithm>
#include <cmath>

namespace mhm {

bool geq_tol(double a, double b) {
    double scale = std::max({1.0, std::fabs(a), std::fabs(b)});
    return a >= b - kBoundaryRelTol * scale;
}

void validate(const ModelParams& par) {
    const double* fields[] = {&par.p, &par.q, &par.g, &par.b,
                              &par.w, &par.r, &par.delta, &par.beta};
    for (const double* f : fields) {
        if (!std::isfinite(*f))
            throw OrderViolation("parameter is not finite");
    }
    if (!(par.p > 0.0 && par.p < 1.0))
        throw OrderViolation("p must lie in (0,1)");
    if (!(par.q > 0.0 && par.q < 1.0))
        throw OrderViolation("q must lie in (0,1)");
    if (!(par.p > par.q))
        throw OrderViolation("effort must raise the good-output probability: p > q");
    if (!(par.delta > 0.0 && par.delta < 1.0))
        throw OrderViolation("delta must lie in (0,1)");
    if (!(par.beta >= 0.0 && par.beta <= 1.0))
        throw OrderViolation("beta must lie in [0,1]");
    if (!(par.w > 0.0))
        throw OrderViolation("wage w must be positive");
    if (!(par.r > 0.0))
        throw OrderViolation("shirking gain r must be positive");
    if (!(par.g > 0.0) || !(par.b < 0.0))
        throw OutputValueViolation("output values must satisfy g > 0 > b");

    double v_bar = par.p * par.g + (1.0 - par.p) * par.b;
    double v_lo = par.q * par.g + (1.0 - par.q) * par.b;
    if (!(v_bar > 0.0))
        throw SignViolation("expected output under effort must be positive");
    if (!(v_lo < 0.0))
        throw SignViolation("expected output under shirk must be negative");
}

DerivedQuantities derive(const ModelParams& par) {
    validate(par);
    DerivedQuantities d;
    d.params = par;

    d.v_bar = par.p * par.g + (1.0 - par.p) * par.b;
    d.v_lo = par.q * par.g + (1.0 - par.q) * par.b;

    double spread = par.p - par.q;
    d.c = par.r * (1.0 - par.p) / spread;
    d.x_delta = (1.0 - par.delta) * par.r / (par.delta * spread);
    d.alpha_lo = -d.v_lo / (d.v_bar - d.v_lo);
    d.U_bar = d.alpha_lo * (par.w - d.c) + (1.0 - d.alpha_lo) * (par.w + par.r);
    // With U_bar <= 0 the promise ceiling is useless at any discount; report
    // the cutoff as 1 so no delta in (0,1) clears it.
    d.delta_lo = d.U_bar > 0.0 ? par.r / (par.r + spread * d.U_bar) : 1.0;

    d.U_P = (1.0 - par.delta) * (par.w - d.c) + par.delta * d.x_delta;
    d.U_R = (1.0 - par.delta) * (par.w - d.c) + par.delta * d.U_bar;
    d.U_R_lo = (1.0 - par.delta) * (par.w - d.c) + par.delta * d.U_R;

    d.regime = geq_tol(par.w - d.c, d.x_delta) ? Regime::LowCost : Regime::HighCost;
    d.U_I = d.regime == Regime::LowCost ? par.w - d.c : d.U_P;

    if (d.regime == Regime::LowCost) {
        // Failure rate of the punishment trigger calibrated so that the
        // worker's shirking gain is exactly offset:
        // delta*gamma*(p-q)*(w-c) = (1-delta)*r, i.e. gamma = x_delta/(w-c).
        d.gamma = d.x_delta / (par.w - d.c);
    }

    // Equivalent to delta >= delta_lo whenever the cutoff is meaningful, and
    // correctly false when U_bar <= 0.
    d.mediation_nontrivial = geq_tol(d.U_bar, d.x_delta);
    return d;
}

OutputDistribution output_distribution(const ModelParams& par,
                                       ClientAction client, WorkerAction worker) {
    if (client == ClientAction::Reject)
        return {0.0, 0.0, 1.0};
    double good = worker == WorkerAction::Effort ? par.p : par.q;
    return {good, 1.0 - good, 0.0};
}

StagePayoffs stage_payoffs(const ModelParams& par,
                           ClientAction client, WorkerAction worker) {
    if (client == ClientAction::Reject)
        return {0.0, 0.0};
    if (worker == WorkerAction::Effort)
        return {par.w, par.p * par.g + (1.0 - par.p) * par.b};
    return {par.w + par.r, par.q * par.g + (1.0 - par.q) * par.b};
}

const char* regime_name(Regime regime) {
    return regime == Regime::LowCost ? "LowCost" : "HighCost";
}

} // namespace mhm
