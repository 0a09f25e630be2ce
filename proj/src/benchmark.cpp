#include "mhm/benchmark.hpp"
#include "mhm/errors.hpp"
#include "mhm/rng.hpp"

#include <cmath>

namespace mhm {

PpeSet ppe_payoff_set(const DerivedQuantities& d) {
    PpeSet set;
    set.degenerate = d.regime == Regime::HighCost;
    set.worker_lo = 0.0;
    if (set.degenerate) {
        set.worker_hi = 0.0;
        set.vertices = {{0.0, 0.0}};
        return set;
    }
    double top = d.params.w - d.c;
    set.worker_hi = top;
    set.vertices = {{0.0, 0.0}, {top, 0.0}, {top, d.v_bar * top / d.params.w}};
    return set;
}

double upper_boundary_G(const DerivedQuantities& d, double U) {
    PpeSet set = ppe_payoff_set(d);
    if (!geq_tol(U, set.worker_lo) || !geq_tol(set.worker_hi, U))
        throw DomainError("U outside the no-mediation payoff interval");
    return d.v_bar / d.params.w * U;
}

BenchmarkAutomaton build_automaton(const DerivedQuantities& d, AutomatonVariant variant) {
    if (d.regime != Regime::LowCost)
        throw RegimeError("no-mediation trigger automaton needs the low-cost regime");

    BenchmarkAutomaton a;
    a.variant = variant;
    a.effort_prob_in_N = variant == AutomatonVariant::Pure ? 1.0 : d.alpha_lo;
    a.gamma = *d.gamma;
    // With the trigger calibrated to make the effort constraint bind, the
    // worker keeps exactly the always-shirk value: the recursion
    // (1-delta)w / (1 - delta(1 - gamma(1-p))) telescopes to w - c.
    a.W_N = d.params.w - d.c;
    a.W_P = 0.0;
    // Client value scales with the same survival factor: W_N / w per unit of
    // expected stage output. The mixed variant holds the client at zero.
    a.V_N = variant == AutomatonVariant::Pure ? d.v_bar * a.W_N / d.params.w : 0.0;
    a.V_P = 0.0;
    return a;
}

AutomatonSimStats simulate_automaton(const DerivedQuantities& d,
                                     const BenchmarkAutomaton& automaton,
                                     int horizon, long n_paths, std::uint64_t seed) {
    if (horizon <= 0 || n_paths <= 0)
        throw DomainError("simulate_automaton needs a positive horizon and path count");

    const ModelParams& par = d.params;
    double sum_u = 0.0, sumsq_u = 0.0;
    double sum_v = 0.0, sumsq_v = 0.0;

    for (long i = 0; i < n_paths; ++i) {
        std::mt19937_64 eng = path_engine(seed, static_cast<std::uint64_t>(i));
        double disc = 1.0;
        double u_acc = 0.0, v_acc = 0.0;
        bool punishing = false;
        for (int t = 0; t < horizon && !punishing; ++t) {
            bool effort = automaton.effort_prob_in_N >= 1.0 ||
                          uniform01(eng) < automaton.effort_prob_in_N;
            double good_prob = effort ? par.p : par.q;
            bool good = uniform01(eng) < good_prob;
            u_acc += disc * (effort ? par.w : par.w + par.r);
            v_acc += disc * (good ? par.g : par.b);
            if (!good && uniform01(eng) < automaton.gamma)
                punishing = true; // zeros from here on
            disc *= par.delta;
        }
        double u_path = (1.0 - par.delta) * u_acc;
        double v_path = (1.0 - par.delta) * v_acc;
        sum_u += u_path;
        sumsq_u += u_path * u_path;
        sum_v += v_path;
        sumsq_v += v_path * v_path;
    }

    AutomatonSimStats stats;
    stats.n_paths = n_paths;
    stats.horizon = horizon;
    double n = static_cast<double>(n_paths);
    stats.worker_mean = sum_u / n;
    stats.client_mean = sum_v / n;
    double var_u = (sumsq_u - n * stats.worker_mean * stats.worker_mean) / (n - 1.0);
    double var_v = (sumsq_v - n * stats.client_mean * stats.client_mean) / (n - 1.0);
    stats.worker_se = std::sqrt(std::max(var_u, 0.0) / n);
    stats.client_se = std::sqrt(std::max(var_v, 0.0) / n);
    return stats;
}

} // namespace mhm
