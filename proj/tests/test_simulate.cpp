#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "mhm/errors.hpp"
#include "mhm/simulate.hpp"

#include <cmath>

using namespace mhm;

namespace {

ModelParams canonical() { return {0.75, 0.25, 1.0, -1.0, 1.0, 1.0, 0.9, 0.5}; }

doctest::Approx tight(double x) { return doctest::Approx(x).epsilon(1e-12); }

struct Solved {
    DerivedQuantities d;
    ValueFunction F;
};

Solved solve(const ModelParams& par, int n = 2001) {
    DerivedQuantities d = derive(par);
    UtilityGrid grid = make_grid(d, n);
    return {d, policy_evaluate(d, grid, 1e-8)};
}

} // namespace

TEST_CASE("default horizon clears the tail tolerance") {
    Solved s = solve(canonical());
    int T = default_horizon(s.d);
    CHECK(T == 138);
    double scale = s.d.params.w + s.d.params.r;
    CHECK(std::pow(0.9, T) * scale < 1e-6);
    CHECK(std::pow(0.9, T - 1) * scale >= 1e-6);

    ModelParams hp = canonical();
    hp.delta = 0.65;
    CHECK(default_horizon(derive(hp)) == 34);
}

TEST_CASE("absorbing region depends on the regime") {
    DerivedQuantities lo = derive(canonical());
    CHECK(absorbed(lo, 0.0));
    CHECK(absorbed(lo, 0.3));
    CHECK(absorbed(lo, lo.U_I));
    CHECK_FALSE(absorbed(lo, lo.U_I + 1e-6));
    CHECK_FALSE(absorbed(lo, lo.U_R));

    ModelParams hp = canonical();
    hp.delta = 0.65;
    DerivedQuantities hi = derive(hp);
    CHECK(absorbed(hi, 0.0));
    CHECK(absorbed(hi, 1e-15));
    CHECK_FALSE(absorbed(hi, 0.01));
    CHECK_FALSE(absorbed(hi, 0.5)); // below U_I, still not absorbing when rationed
}

TEST_CASE("payoff means track promised values from both launch points") {
    Solved s = solve(canonical());
    for (double U0 : {s.d.U_R, s.d.U_bar}) {
        CAPTURE(U0);
        SimulationStats st = simulate(s.d, s.F, U0, 300, 10000, 1u);
        CHECK(st.n_paths == 10000);
        CHECK(st.horizon == 300);
        CHECK(st.worker_se > 0.0);
        CHECK(st.client_se > 0.0);
        CHECK(std::abs(st.worker_mean - U0) <= 3.0 * st.worker_se);
        CHECK(st.client_reference == tight(s.F(U0)));
        CHECK(std::abs(st.client_mean - st.client_reference) <= 3.0 * st.client_se);
        CHECK(st.acceptance_frequency > 0.0);
        CHECK(st.acceptance_frequency < 1.0);
        CHECK(st.tail_bound == tight(2.0 * std::pow(0.9, 300)));
        CHECK(st.absorption_times.size() + st.not_absorbed ==
              static_cast<std::size_t>(st.n_paths));
    }
}

TEST_CASE("same seed reproduces the run, a different seed does not") {
    Solved s = solve(canonical(), 501);
    SimulationStats a = simulate(s.d, s.F, s.d.U_R, 300, 2000, 42u);
    SimulationStats b = simulate(s.d, s.F, s.d.U_R, 300, 2000, 42u);
    CHECK(a.worker_mean == b.worker_mean);
    CHECK(a.worker_se == b.worker_se);
    CHECK(a.client_mean == b.client_mean);
    CHECK(a.acceptance_frequency == b.acceptance_frequency);
    CHECK(a.absorption_times == b.absorption_times);
    CHECK(a.not_absorbed == b.not_absorbed);

    SimulationStats c = simulate(s.d, s.F, s.d.U_R, 300, 2000, 43u);
    CHECK(a.worker_mean != c.worker_mean);
}

TEST_CASE("zero start is perpetual rejection") {
    Solved s = solve(canonical(), 501);
    SimulationStats st = simulate(s.d, s.F, 0.0, 300, 100, 7u);
    CHECK(st.worker_mean == 0.0);
    CHECK(st.worker_se == 0.0);
    CHECK(st.client_mean == 0.0);
    CHECK(st.acceptance_frequency == 0.0);
    CHECK(st.absorption_times.size() == 100);
    for (int T : st.absorption_times)
        CHECK(T == 0);
}

TEST_CASE("low-cost absorbing band keeps paths and payoffs inside") {
    Solved s = solve(canonical(), 501);
    std::vector<TrajectoryRecord> path;
    SimulationStats st = simulate(s.d, s.F, 0.3, 300, 500, 7u, &path);
    CHECK(st.absorption_times.size() == 500);
    for (int T : st.absorption_times)
        CHECK(T == 0);
    CHECK(std::abs(st.worker_mean - 0.3) <= 3.0 * st.worker_se);
    for (const TrajectoryRecord& rec : path) {
        CHECK(rec.U <= s.d.U_I + 1e-12);
        // Post-absorption play never pays for shirking.
        bool paid_shirk = rec.rec_client == ClientAction::Accept &&
                          rec.rec_worker == WorkerAction::Shirk;
        CHECK_FALSE(paid_shirk);
    }
}

TEST_CASE("dumped trajectory is internally consistent") {
    Solved s = solve(canonical());
    std::vector<TrajectoryRecord> path;
    simulate(s.d, s.F, s.d.U_R, 300, 3, 20240817u, &path);
    REQUIRE(!path.empty());
    CHECK(path.size() <= 300);
    CHECK(path.front().U == s.d.U_R);

    const ModelParams& par = s.d.params;
    for (std::size_t i = 0; i < path.size(); ++i) {
        const TrajectoryRecord& rec = path[i];
        CHECK(rec.t == static_cast<int>(i));
        CHECK(rec.action == rec.rec_worker);
        if (rec.rec_client == ClientAction::Reject) {
            CHECK(rec.output == Output::None);
            CHECK(rec.u == 0.0);
            CHECK(rec.v == 0.0);
        } else {
            CHECK(rec.output != Output::None);
            CHECK(rec.v == (rec.output == Output::Good ? par.g : par.b));
            CHECK(rec.u == (rec.action == WorkerAction::Effort ? par.w : par.w + par.r));
        }
        // Promise keeping holds analytically at every visited state.
        PolicyStep step = policy_at(s.d, rec.U);
        CHECK(promise_value(s.d, step) == doctest::Approx(rec.U).epsilon(1e-11));
    }

    auto T = absorption_time(path, s.d);
    REQUIRE(T.has_value());
    CHECK(*T == 30); // pinned by the seed
    for (const TrajectoryRecord& rec : path)
        if (rec.t >= *T) {
            bool paid_shirk = rec.rec_client == ClientAction::Accept &&
                              rec.rec_worker == WorkerAction::Shirk;
            CHECK_FALSE(paid_shirk);
        }

    CHECK_FALSE(absorption_time({}, s.d).has_value());
}

TEST_CASE("absorption accounting over a long horizon") {
    Solved s = solve(canonical(), 501);
    SimulationStats st = simulate(s.d, s.F, s.d.U_R, 1000, 5000, 31415u);
    CHECK(st.absorption_times.size() + st.not_absorbed == 5000);
    CHECK(st.absorption_times.size() >= 4990); // nearly sure by t = 1000
    for (std::size_t i = 1; i < st.absorption_times.size(); ++i)
        CHECK(st.absorption_times[i - 1] <= st.absorption_times[i]);

    // Cumulative absorbed fraction is nondecreasing in the horizon cutoff.
    double prev = 0.0;
    for (int cut : {50, 100, 200, 300, 500, 1000}) {
        long cnt = 0;
        for (int T : st.absorption_times)
            if (T < cut)
                ++cnt;
        double frac = static_cast<double>(cnt) / 5000.0;
        CHECK(frac >= prev);
        prev = frac;
    }
    CHECK(prev >= 0.99);
}

TEST_CASE("high-cost paths absorb at zero and keep their promises") {
    ModelParams hp = canonical();
    hp.delta = 0.65;
    Solved s = solve(hp, 1001);
    SimulationStats st = simulate(s.d, s.F, s.d.U_R, 60, 5000, 5u);
    CHECK(std::abs(st.worker_mean - s.d.U_R) <= 3.0 * st.worker_se);
    CHECK(std::abs(st.client_mean - st.client_reference) <= 3.0 * st.client_se);
    CHECK(st.absorption_times.size() > 4900);
    CHECK(st.not_absorbed < 100);
}

TEST_CASE("acceptance frequency regression at the opaque launch point") {
    Solved s = solve(canonical());
    SimulationStats st = simulate(s.d, s.F, s.d.U_R, 300, 10000, 20240817u);
    CHECK(st.acceptance_frequency == doctest::Approx(0.95511381).epsilon(1e-8));
}

TEST_CASE("one-shot deviations never profit on the equilibrium path") {
    Solved s = solve(canonical(), 501);
    DeviationReport rep = deviation_audit(s.d, s.d.U_R, 200, 99u);
    CHECK(rep.states_checked > 1000);
    CHECK(rep.max_effort_violation <= 1e-12);
    CHECK(rep.max_effort_violation >= -1e-12); // wedge binds, so the gain is zero
    CHECK(rep.max_shirk_violation == tight(-0.1)); // forfeits (1-delta) r
    CHECK(rep.worst_U >= 0.0);
    CHECK(rep.worst_U <= s.d.U_bar);

    DeviationReport vac = deviation_audit(s.d, 0.0, 50, 99u);
    CHECK(vac.states_checked == 0);
    CHECK(vac.max_effort_violation == 0.0);
    CHECK(vac.max_shirk_violation == 0.0);
}

TEST_CASE("audit flags an injected continuation fault") {
    DerivedQuantities d = derive(canonical());
    PolicyStep step = policy_at(d, 0.8);
    StepAudit clean = audit_step(d, step);
    CHECK(std::abs(clean.effort_violation) <= 1e-15);
    CHECK(clean.shirk_violation == 0.0); // no paid shirking recommended here

    step.U_g -= 0.01;
    StepAudit faulty = audit_step(d, step);
    CHECK(faulty.effort_violation == tight(0.9 * 0.5 * 0.01));

    PolicyStep top = policy_at(d, d.U_bar);
    StepAudit at_top = audit_step(d, top);
    CHECK(std::abs(at_top.effort_violation) <= 1e-15);
    CHECK(at_top.shirk_violation == tight(-0.1));
}

TEST_CASE("input guards") {
    Solved s = solve(canonical(), 501);
    CHECK_THROWS_AS(simulate(s.d, s.F, -0.1, 300, 10, 1u), DomainError);
    CHECK_THROWS_AS(simulate(s.d, s.F, s.d.U_bar + 0.1, 300, 10, 1u), DomainError);
    CHECK_THROWS_AS(simulate(s.d, s.F, 0.5, 0, 10, 1u), DomainError);
    CHECK_THROWS_AS(simulate(s.d, s.F, 0.5, 300, 0, 1u), DomainError);
    CHECK_THROWS_AS(simulate(s.d, s.F, 0.5, 50, 10, 1u), TruncationWarning);
    CHECK_THROWS_AS(deviation_audit(s.d, -0.1, 10, 1u), DomainError);
    CHECK_THROWS_AS(deviation_audit(s.d, 0.5, 0, 1u), DomainError);
}
