#pragma once

#include "mhm/bellman.hpp"
#include "mhm/device.hpp"
#include "mhm/model.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace mhm {

// One period of a simulated path. The worker is obedient by construction,
// so action always equals rec_worker; the field is kept so a dumped
// trajectory stands on its own.
struct TrajectoryRecord {
    int t = 0;
    double U = 0.0; // promised utility entering the period
    ClientAction rec_client = ClientAction::Reject;
    WorkerAction rec_worker = WorkerAction::Shirk;
    WorkerAction action = WorkerAction::Shirk;
    Output output = Output::None;
    double u = 0.0; // worker stage payoff
    double v = 0.0; // client stage payoff, the realized output value
};

struct SimulationStats {
    int n_paths = 0;
    int horizon = 0;
    double worker_mean = 0.0; // mean of (1-delta) sum delta^t u_t across paths
    double worker_se = 0.0;
    double client_mean = 0.0; // same for v_t
    double client_se = 0.0;
    double client_reference = 0.0;     // F(U0), the value client_mean estimates
    double acceptance_frequency = 0.0; // mean of (1-delta) sum delta^t 1{accept}
    double tail_bound = 0.0;           // (w + r) * delta^horizon
    std::vector<int> absorption_times; // one entry per absorbed path, ascending
    long not_absorbed = 0;             // paths never entering the absorbing region
};

// Smallest T with delta^T * (w + r) < 1e-6, so truncating at T moves no
// discounted mean by more than 1e-6.
int default_horizon(const DerivedQuantities& d);

// Whether U lies in the absorbing region: [0, U_I] in the low-cost regime
// (forward-invariant under the policy), {0} in the high-cost one.
bool absorbed(const DerivedQuantities& d, double U);

// Plays n_paths obedient paths of length horizon from U0. Recommendations
// and outputs are drawn from one engine per path seeded by (seed, path
// index), so results do not depend on the order paths are run in.
// Continuation utilities are carried exactly as the policy hands them out;
// F is consulted only for the client-value reference. Pass first_path to
// receive path 0's records. Throws DomainError for U0 off [0, U_bar] or
// nonpositive sizes, TruncationWarning when delta^horizon > 1e-6.
SimulationStats simulate(const DerivedQuantities& d, const ValueFunction& F, double U0,
                         int horizon, long n_paths, std::uint64_t seed,
                         std::vector<TrajectoryRecord>* first_path = nullptr);

// First period whose promised utility lies in the absorbing region, or
// nullopt if the path never got there.
std::optional<int> absorption_time(const std::vector<TrajectoryRecord>& path,
                                   const DerivedQuantities& d);

// One-shot deviation gains at a single policy step, each net of the obedient
// value: positive means the deviation profits. Gains are 0 when the
// corresponding recommendation has zero weight.
struct StepAudit {
    double effort_violation = 0.0; // shirk when told effort; 0 when the wedge binds
    double shirk_violation = 0.0;  // work when told paid shirk; -(1-delta)r when live
};

StepAudit audit_step(const DerivedQuantities& d, const PolicyStep& step);

struct DeviationReport {
    long states_checked = 0; // visited states carrying an auditable recommendation
    double max_effort_violation = 0.0;
    double max_shirk_violation = 0.0;
    double worst_U = 0.0; // state attaining max_effort_violation
};

// Simulates n_paths obedient paths from U0 (same substream scheme as
// simulate) and audits every visited state. Maxima stay 0 when no visited
// state carries an auditable recommendation.
DeviationReport deviation_audit(const DerivedQuantities& d, double U0, long n_paths,
                                std::uint64_t seed);

} // namespace mhm
