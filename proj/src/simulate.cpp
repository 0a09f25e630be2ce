#include "mhm/simulate.hpp"

#include "mhm/errors.hpp"
#include "mhm/rng.hpp"

#include <algorithm>
#include <cmath>

namespace mhm {

namespace {

constexpr double kTruncationTol = 1e-6;

// One period of obedient play: draw the recommendation from the mixture,
// then the output where one is produced. Returns the next promised utility;
// fills rec with what happened.
double play_period(const ModelParams& par, const PolicyStep& step, std::mt19937_64& eng,
                   TrajectoryRecord& rec) {
    double x = uniform01(eng);
    if (x < step.mu_e) {
        rec.rec_client = ClientAction::Accept;
        rec.rec_worker = WorkerAction::Effort;
    } else if (x < step.mu_e + step.mu_s) {
        rec.rec_client = ClientAction::Accept;
        rec.rec_worker = WorkerAction::Shirk;
    } else {
        rec.rec_client = ClientAction::Reject;
        rec.rec_worker = WorkerAction::Shirk;
    }
    rec.action = rec.rec_worker;
    rec.u = stage_payoffs(par, rec.rec_client, rec.rec_worker).u;
    rec.output = Output::None;
    rec.v = 0.0;

    if (rec.rec_client == ClientAction::Reject)
        return step.U_hat;

    OutputDistribution dist = output_distribution(par, rec.rec_client, rec.rec_worker);
    bool good = uniform01(eng) < dist.good;
    rec.output = good ? Output::Good : Output::Bad;
    rec.v = good ? par.g : par.b;
    if (rec.rec_worker == WorkerAction::Shirk)
        return step.U_hat;
    return good ? step.U_g : step.U_b;
}

double domain_checked(const DerivedQuantities& d, double U0) {
    if (!geq_tol(U0, 0.0) || !geq_tol(d.U_bar, U0))
        throw DomainError("initial promised utility outside [0, U_bar]");
    return std::clamp(U0, 0.0, d.U_bar);
}

} // namespace

int default_horizon(const DerivedQuantities& d) {
    double scale = d.params.w + d.params.r;
    int t = static_cast<int>(
        std::ceil(std::log(kTruncationTol / scale) / std::log(d.params.delta)));
    t = std::max(t, 1);
    while (std::pow(d.params.delta, t) * scale >= kTruncationTol)
        ++t;
    return t;
}

bool absorbed(const DerivedQuantities& d, double U) {
    if (d.regime == Regime::LowCost)
        return geq_tol(d.U_I, U);
    return geq_tol(0.0, U);
}

SimulationStats simulate(const DerivedQuantities& d, const ValueFunction& F, double U0,
                         int horizon, long n_paths, std::uint64_t seed,
                         std::vector<TrajectoryRecord>* first_path) {
    double U_start = domain_checked(d, U0);
    if (horizon <= 0 || n_paths <= 0)
        throw DomainError("simulate needs a positive horizon and path count");
    const ModelParams& par = d.params;
    if (std::pow(par.delta, horizon) > kTruncationTol)
        throw TruncationWarning("horizon leaves delta^horizon above 1e-6; lengthen it");

    if (first_path)
        first_path->clear();

    double sum_u = 0.0, sumsq_u = 0.0;
    double sum_v = 0.0, sumsq_v = 0.0;
    double sum_acc = 0.0;
    std::vector<int> times;
    long not_absorbed = 0;

    for (long i = 0; i < n_paths; ++i) {
        std::mt19937_64 eng = path_engine(seed, static_cast<std::uint64_t>(i));
        double U = U_start;
        double disc = 1.0;
        double u_acc = 0.0, v_acc = 0.0, a_acc = 0.0;
        std::optional<int> T;
        for (int t = 0; t < horizon; ++t) {
            if (!T && absorbed(d, U))
                T = t;
            PolicyStep step = policy_at(d, U);
            TrajectoryRecord rec;
            rec.t = t;
            rec.U = U;
            double U_next = play_period(par, step, eng, rec);
            u_acc += disc * rec.u;
            v_acc += disc * rec.v;
            if (rec.rec_client == ClientAction::Accept)
                a_acc += disc;
            if (first_path && i == 0)
                first_path->push_back(rec);
            disc *= par.delta;
            // Exactly zero is perpetual rejection; every later period repeats
            // this one with zero payoffs.
            if (U == 0.0 && U_next == 0.0)
                break;
            U = U_next;
        }
        double norm = 1.0 - par.delta;
        double wu = norm * u_acc;
        double wv = norm * v_acc;
        sum_u += wu;
        sumsq_u += wu * wu;
        sum_v += wv;
        sumsq_v += wv * wv;
        sum_acc += norm * a_acc;
        if (T)
            times.push_back(*T);
        else
            ++not_absorbed;
    }

    std::sort(times.begin(), times.end());

    SimulationStats stats;
    stats.n_paths = n_paths;
    stats.horizon = horizon;
    double n = static_cast<double>(n_paths);
    stats.worker_mean = sum_u / n;
    stats.client_mean = sum_v / n;
    if (n_paths > 1) {
        double var_u = (sumsq_u - n * stats.worker_mean * stats.worker_mean) / (n - 1.0);
        double var_v = (sumsq_v - n * stats.client_mean * stats.client_mean) / (n - 1.0);
        stats.worker_se = std::sqrt(std::max(var_u, 0.0) / n);
        stats.client_se = std::sqrt(std::max(var_v, 0.0) / n);
    }
    stats.client_reference = F(U_start);
    stats.acceptance_frequency = sum_acc / n;
    stats.tail_bound = (par.w + par.r) * std::pow(par.delta, horizon);
    stats.absorption_times = std::move(times);
    stats.not_absorbed = not_absorbed;
    return stats;
}

std::optional<int> absorption_time(const std::vector<TrajectoryRecord>& path,
                                   const DerivedQuantities& d) {
    for (const TrajectoryRecord& rec : path)
        if (absorbed(d, rec.U))
            return rec.t;
    return std::nullopt;
}

StepAudit audit_step(const DerivedQuantities& d, const PolicyStep& step) {
    const ModelParams& par = d.params;
    StepAudit audit;
    if (step.mu_e > 0.0) {
        // Told effort, shirk once: the flow gains r, the continuation loses
        // the output-tilt delta (p - q)(U_g - U_b).
        audit.effort_violation = (1.0 - par.delta) * par.r -
                                 par.delta * (par.p - par.q) * (step.U_g - step.U_b);
    }
    if (step.mu_s > 0.0) {
        // Told paid shirk, work once: the continuation is output-independent,
        // so the deviation just forfeits the flow rent.
        audit.shirk_violation = -(1.0 - par.delta) * par.r;
    }
    return audit;
}

DeviationReport deviation_audit(const DerivedQuantities& d, double U0, long n_paths,
                                std::uint64_t seed) {
    double U_start = domain_checked(d, U0);
    if (n_paths <= 0)
        throw DomainError("deviation_audit needs a positive path count");
    const ModelParams& par = d.params;
    int horizon = default_horizon(d);

    DeviationReport report;
    bool have_effort = false, have_shirk = false;
    for (long i = 0; i < n_paths; ++i) {
        std::mt19937_64 eng = path_engine(seed, static_cast<std::uint64_t>(i));
        double U = U_start;
        for (int t = 0; t < horizon; ++t) {
            PolicyStep step = policy_at(d, U);
            bool live_e = step.mu_e > 0.0;
            bool live_s = step.mu_s > 0.0;
            if (live_e || live_s) {
                StepAudit audit = audit_step(d, step);
                ++report.states_checked;
                if (live_e) {
                    if (!have_effort || audit.effort_violation > report.max_effort_violation) {
                        report.max_effort_violation = audit.effort_violation;
                        report.worst_U = U;
                    }
                    have_effort = true;
                }
                if (live_s) {
                    if (!have_shirk || audit.shirk_violation > report.max_shirk_violation)
                        report.max_shirk_violation = audit.shirk_violation;
                    have_shirk = true;
                }
            }
            TrajectoryRecord rec;
            double U_next = play_period(par, step, eng, rec);
            if (U == 0.0 && U_next == 0.0)
                break;
            U = U_next;
        }
    }
    return report;
}

} // namespace mhm
