#include "mhm/device.hpp"
#include "mhm/errors.hpp"

#include <cmath>

namespace mhm {

const char* region_name(RegionTag tag) {
    switch (tag) {
    case RegionTag::HighSecret: return "HighSecret";
    case RegionTag::Effort: return "Effort";
    case RegionTag::Rationed: return "Rationed";
    default: return "Absorbing";
    }
}

PolicyStep policy_at(const DerivedQuantities& d, double U) {
    BellmanSolution s = closed_form_policy(d, U);
    double Uc = std::min(std::max(U, 0.0), d.U_bar);

    PolicyStep step;
    step.mu_e = s.mu_e;
    step.mu_s = s.mu_s;
    step.mu_o = s.mu_o;
    step.U_g = s.U_g;
    step.U_b = s.U_b;
    step.U_hat = s.U_hat;

    // Tags follow the half-open region boundaries: U_R still recommends
    // transparent effort, U_I still belongs to the low band.
    if (Uc > d.U_R)
        step.region = RegionTag::HighSecret;
    else if (Uc > d.U_I)
        step.region = RegionTag::Effort;
    else if (d.regime == Regime::LowCost)
        // The low band is forward-invariant here: once the promise falls to
        // U_I the device never needs secrecy again.
        step.region = RegionTag::Absorbing;
    else
        step.region = Uc > 0.0 ? RegionTag::Rationed : RegionTag::Absorbing;
    return step;
}

double promise_value(const DerivedQuantities& d, const PolicyStep& step) {
    const ModelParams& par = d.params;
    double effort = (1.0 - par.delta) * par.w +
                    par.delta * (par.p * step.U_g + (1.0 - par.p) * step.U_b);
    double shirk = (1.0 - par.delta) * (par.w + par.r) + par.delta * step.U_hat;
    double reject = par.delta * step.U_hat;
    return step.mu_e * effort + step.mu_s * shirk + step.mu_o * reject;
}

double compute_beta_bar(const DerivedQuantities& d, const ValueFunction& F) {
    double s = (F(d.U_bar) - F(d.U_R)) / (d.U_bar - d.U_R);
    if (!(s < 0.0))
        throw SlopeSignError("compute_beta_bar: boundary is not decreasing past U_R");
    return -s / (1.0 - s);
}

double initial_utility(const DerivedQuantities& d, const ValueFunction& F) {
    return d.params.beta > compute_beta_bar(d, F) ? d.U_bar : d.U_R;
}

ObedienceReport check_obedience(const DerivedQuantities& d, const PolicyStep& step) {
    ObedienceReport report;
    const double scale = std::max(1.0, d.U_bar);

    if (step.mu_e > 0.0) {
        double wedge = step.U_g - step.U_b;
        if (!geq_tol(wedge, d.x_delta)) {
            report.pass = false;
            report.violations.push_back("effort wedge U_g - U_b falls short of x_delta");
        }
        report.effort_wedge_binds = std::fabs(wedge - d.x_delta) <= kBoundaryRelTol * scale;
    }
    // Shirk enforceability asks for a continuation gap of at most x_delta
    // after a shirk recommendation; a PolicyStep carries one U_hat for both
    // outputs, so that gap is zero by construction.
    double accept_mass = step.mu_e + step.mu_s;
    if (accept_mass > 0.0) {
        double effort_given_accept = step.mu_e / accept_mass;
        if (!geq_tol(effort_given_accept, d.alpha_lo)) {
            report.pass = false;
            report.violations.push_back(
                "conditional effort under acceptance falls below the break-even probability");
        }
        report.acceptance_binds =
            std::fabs(effort_given_accept - d.alpha_lo) <= kBoundaryRelTol;
    }
    return report;
}

} // namespace mhm
