#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "mhm/device.hpp"
#include "mhm/errors.hpp"

#include <algorithm>
#include <cmath>
#include <random>

using namespace mhm;

namespace {

ModelParams canonical() {
    return {0.75, 0.25, 1.0, -1.0, 1.0, 1.0, 0.9, 1.0};
}

doctest::Approx tight(double x) {
    return doctest::Approx(x).epsilon(1e-12);
}

ValueFunction solve_canonical(int n = 2001) {
    DerivedQuantities d = derive(canonical());
    return policy_evaluate(d, make_grid(d, n), 1e-8);
}

// Rewrites the boundary past U_R as a straight line with the given slope.
ValueFunction with_tail_slope(const ValueFunction& F, double U_R, double slope) {
    ValueFunction out = F;
    double vR = F(U_R);
    for (int i = 0; i < out.grid.n; ++i)
        if (out.grid.nodes[i] > U_R)
            out.values[i] = vR + slope * (out.grid.nodes[i] - U_R);
    return out;
}

} // namespace

TEST_CASE("policy regions and worked mixtures") {
    DerivedQuantities d = derive(canonical());

    SUBCASE("opaque mixing above the ceiling") {
        PolicyStep s = policy_at(d, 1.2);
        CHECK(s.region == RegionTag::HighSecret);
        CHECK(s.mu_e == tight(16.0 / 21.0));
        CHECK(s.mu_s == tight(5.0 / 21.0));
        CHECK(s.U_g == tight(1.25));
        CHECK(s.U_b == tight(1.25 - 2.0 / 9.0));
        CHECK(s.U_hat == tight(1.2)); // paid shirking leaves the promise put
    }
    SUBCASE("transparent effort in the middle band") {
        PolicyStep s = policy_at(d, 0.8);
        CHECK(s.region == RegionTag::Effort);
        CHECK(s.mu_e == 1.0);
        CHECK(s.U_g == tight(0.75 / 0.9));
        CHECK(s.U_b == tight(0.75 / 0.9 - 2.0 / 9.0));
        // Good output nudges the promise up a little, bad output drops it by
        // the rest of the wedge.
        CHECK(s.U_g - 0.8 == tight(0.75 / 0.9 - 0.8));
        CHECK(s.U_g - 0.8 > 0.0);
        CHECK(s.U_b - 0.8 < 0.0);
    }
    SUBCASE("region boundaries sit where the intervals close") {
        CHECK(policy_at(d, d.U_R).region == RegionTag::Effort);
        CHECK(policy_at(d, d.U_R + 1e-9).region == RegionTag::HighSecret);
        CHECK(policy_at(d, d.U_I).region == RegionTag::Absorbing);
        CHECK(policy_at(d, d.U_I + 1e-9).region == RegionTag::Effort);
        CHECK(policy_at(d, d.U_bar).region == RegionTag::HighSecret);
    }
    SUBCASE("settled at zero") {
        PolicyStep s = policy_at(d, 0.0);
        CHECK(s.region == RegionTag::Absorbing);
        CHECK(s.mu_o == 1.0);
        CHECK(s.U_hat == 0.0);
    }
    SUBCASE("whole low band is absorbing in the low-cost regime") {
        CHECK(policy_at(d, 0.1).region == RegionTag::Absorbing);
        CHECK(policy_at(d, 0.3).region == RegionTag::Absorbing);
        CHECK(policy_at(d, 0.5).region == RegionTag::Absorbing);
    }
    SUBCASE("domain guard") {
        CHECK_THROWS_AS(policy_at(d, -0.2), DomainError);
        CHECK_THROWS_AS(policy_at(d, 1.3), DomainError);
    }
}

TEST_CASE("high-cost regime rations instead of absorbing") {
    ModelParams par = canonical();
    par.delta = 0.65;
    DerivedQuantities d = derive(par);
    REQUIRE(d.regime == Regime::HighCost);
    REQUIRE(d.U_I == tight(d.U_P));

    CHECK(policy_at(d, 0.0).region == RegionTag::Absorbing);
    CHECK(policy_at(d, 0.3).region == RegionTag::Rationed);
    CHECK(policy_at(d, d.U_I).region == RegionTag::Rationed);
    CHECK(policy_at(d, d.U_I + 1e-9).region == RegionTag::Effort);

    // Below the participation promise the device gambles on the wedge: the
    // promise either jumps above the low band or collapses to zero.
    std::mt19937 rng(77001u);
    std::uniform_real_distribution<double> draw(1e-6, d.U_I);
    for (int k = 0; k < 500; ++k) {
        PolicyStep s = policy_at(d, draw(rng));
        CHECK(s.mu_s == 0.0);
        CHECK(s.U_g == tight(d.x_delta));
        CHECK(s.U_b == 0.0);
        CHECK(s.U_g > d.U_I);
        if (s.mu_o > 0.0)
            CHECK(s.U_hat == 0.0);
    }
}

TEST_CASE("every step keeps the promise exactly") {
    const DerivedQuantities points[] = {
        derive(canonical()),
        derive({0.75, 0.25, 1.0, -1.0, 1.0, 1.0, 0.65, 1.0}),
        derive({0.9, 0.5, 1.0, -2.0, 1.0, 0.5, 0.95, 0.5}),
    };
    std::mt19937 rng(77002u);
    for (const DerivedQuantities& d : points) {
        std::uniform_real_distribution<double> draw(0.0, d.U_bar);
        for (int k = 0; k < 2000; ++k) {
            double U = draw(rng);
            PolicyStep s = policy_at(d, U);
            CHECK(std::fabs(promise_value(d, s) - U) <= 1e-12 * std::max(1.0, U));
            CHECK(s.mu_e + s.mu_s + s.mu_o == doctest::Approx(1.0).epsilon(1e-12));
            CHECK(s.U_g >= 0.0);
            CHECK(s.U_g <= d.U_bar);
            CHECK(s.U_b >= 0.0);
            CHECK(s.U_b <= d.U_bar);
            CHECK(s.U_hat >= 0.0);
            CHECK(s.U_hat <= d.U_bar);
        }
    }
}

TEST_CASE("low band is forward-invariant in the low-cost regime") {
    DerivedQuantities d = derive(canonical());
    std::mt19937 rng(77003u);
    std::uniform_real_distribution<double> draw(0.0, d.U_I);
    for (int k = 0; k < 2000; ++k) {
        PolicyStep s = policy_at(d, draw(rng));
        CHECK(s.U_g <= d.U_I + 1e-12);
        CHECK(s.U_b <= d.U_I + 1e-12);
        CHECK(s.U_hat <= d.U_I + 1e-12);
    }
}

TEST_CASE("secrecy share falls as the promise climbs") {
    DerivedQuantities d = derive(canonical());
    double prev = 1.0 + 1e-9;
    for (int k = 1; k <= 40; ++k) {
        double U = d.U_R + (d.U_bar - d.U_R) * k / 40.0;
        PolicyStep s = policy_at(d, U);
        CHECK(s.mu_e < prev);
        CHECK(s.mu_e >= d.alpha_lo - 1e-12);
        CHECK(s.U_hat == tight(U));
        prev = s.mu_e;
    }
    CHECK(policy_at(d, d.U_bar).mu_e == tight(d.alpha_lo));
}

TEST_CASE("obedience holds along the policy and binds where it should") {
    DerivedQuantities d = derive(canonical());
    std::mt19937 rng(77004u);
    std::uniform_real_distribution<double> draw(0.0, d.U_bar);
    for (int k = 0; k < 2000; ++k) {
        PolicyStep s = policy_at(d, draw(rng));
        ObedienceReport rep = check_obedience(d, s);
        CHECK(rep.pass);
        CHECK(rep.violations.empty());
        if (s.mu_e > 0.0)
            CHECK(rep.effort_wedge_binds);
    }
    ObedienceReport top = check_obedience(d, policy_at(d, d.U_bar));
    CHECK(top.pass);
    CHECK(top.acceptance_binds);
}

TEST_CASE("obedience failures are reported as data") {
    DerivedQuantities d = derive(canonical());

    PolicyStep thin = policy_at(d, 0.8);
    thin.U_b = thin.U_g - d.x_delta / 2.0;
    ObedienceReport wedge = check_obedience(d, thin);
    CHECK_FALSE(wedge.pass);
    REQUIRE(wedge.violations.size() == 1);
    CHECK(wedge.violations[0].find("wedge") != std::string::npos);

    PolicyStep lazy;
    lazy.mu_e = 0.3;
    lazy.mu_s = 0.7;
    lazy.U_g = d.x_delta;
    lazy.U_b = 0.0;
    ObedienceReport accept = check_obedience(d, lazy);
    CHECK_FALSE(accept.pass);
    REQUIRE(accept.violations.size() == 1);
    CHECK(accept.violations[0].find("effort under acceptance") != std::string::npos);

    PolicyStep idle;
    idle.mu_o = 1.0;
    CHECK(check_obedience(d, idle).pass);
}

TEST_CASE("indifference weight from the tail slope") {
    DerivedQuantities d = derive(canonical());
    ValueFunction F = solve_canonical();

    double s = (F(d.U_bar) - F(d.U_R)) / (d.U_bar - d.U_R);
    REQUIRE(s < 0.0);
    double bb = compute_beta_bar(d, F);
    CHECK(bb == tight(-s / (1.0 - s)));
    CHECK(bb > 0.0);
    CHECK(bb < 1.0);

    // At beta_bar the weighted objective is flat across the whole segment.
    double lo = 1e300, hi = -1e300;
    for (double u : {d.U_R, 1.19, 1.21, 1.23, d.U_bar}) {
        double obj = bb * u + (1.0 - bb) * F(u);
        lo = std::min(lo, obj);
        hi = std::max(hi, obj);
    }
    CHECK(hi - lo <= 1e-8);

    CHECK(compute_beta_bar(d, with_tail_slope(F, d.U_R, -1.0)) == tight(0.5));
    CHECK(compute_beta_bar(d, with_tail_slope(F, d.U_R, -0.25)) == tight(0.2));
    CHECK_THROWS_AS(compute_beta_bar(d, with_tail_slope(F, d.U_R, 0.1)), SlopeSignError);
}

TEST_CASE("starting promise tracks the worker weight") {
    ValueFunction F = solve_canonical();
    ModelParams par = canonical();

    par.beta = 0.0;
    CHECK(initial_utility(derive(par), F) == tight(1.175));
    par.beta = 1.0;
    CHECK(initial_utility(derive(par), F) == tight(1.25));

    // The tie goes to the smaller promise.
    par.beta = compute_beta_bar(derive(par), F);
    CHECK(initial_utility(derive(par), F) == tight(1.175));
    par.beta = std::nextafter(par.beta, 1.0);
    CHECK(initial_utility(derive(par), F) == tight(1.25));
}

TEST_CASE("region names are stable strings") {
    CHECK(std::string(region_name(RegionTag::HighSecret)) == "HighSecret");
    CHECK(std::string(region_name(RegionTag::Effort)) == "Effort");
    CHECK(std::string(region_name(RegionTag::Rationed)) == "Rationed");
    CHECK(std::string(region_name(RegionTag::Absorbing)) == "Absorbing");
}
