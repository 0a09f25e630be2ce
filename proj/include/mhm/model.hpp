#pragma once

#include <optional>

namespace mhm {

// Stage game: a client decides whether to hire, the worker then exerts
// costly effort or shirks. Output is good (value g), bad (value b), or
// absent when the client walked away.

enum class ClientAction { Accept, Reject };
enum class WorkerAction { Effort, Shirk };
enum class Output { Good, Bad, None };

enum class Regime {
    LowCost,  // w - c >= x_delta: full acceptance is self-enforcing at the bottom
    HighCost, // w - c <  x_delta: acceptance has to be rationed near the bottom
};

struct ModelParams {
    double p;     // P(good | effort), in (0,1)
    double q;     // P(good | shirk), in (0,1), q < p
    double g;     // client value of a good output, > 0
    double b;     // client value of a bad output, < 0
    double w;     // wage paid on acceptance, > 0
    double r;     // worker's saving from shirking, > 0
    double delta; // common discount factor, in (0,1)
    double beta;  // welfare weight on the worker, in [0,1]
};

// Everything downstream consumes these instead of re-deriving. All formula
// fields are populated whether or not mediation has bite; the flag says
// which interpretation applies.
struct DerivedQuantities {
    ModelParams params;

    double v_bar;    // expected client value under effort, p*g + (1-p)*b
    double v_lo;     // expected client value under shirk, q*g + (1-q)*b
    double c;        // moral-hazard cost: expected wage burn to discipline shirking
    double x_delta;  // minimal continuation-utility wedge making effort incentive-compatible
    double alpha_lo; // effort probability at which the client just breaks even
    double delta_lo; // discount threshold below which mediation is worthless
    double U_bar;    // worker's highest enforceable promised utility (delta-free)

    double U_P;      // top of the rationed-acceptance segment
    double U_R;      // promised utility past which recommendations go opaque
    double U_R_lo;   // preimage of U_R under the pure-effort update
    double U_I;      // bottom-region boundary: w - c (low cost) or U_P (high cost)

    // Failure probability of the trigger that enforces effort without
    // mediation. Only meaningful in the low-cost regime.
    std::optional<double> gamma;

    Regime regime;
    bool mediation_nontrivial; // delta >= delta_lo up to tolerance
};

// Relative tolerance for knife-edge boundary comparisons (regime
// classification, delta vs delta_lo, domain checks on [0, U_bar]).
inline constexpr double kBoundaryRelTol = 1e-12;

// a >= b up to kBoundaryRelTol * max(1, |a|, |b|).
bool geq_tol(double a, double b);

// Throws OrderViolation / SignViolation / OutputValueViolation.
void validate(const ModelParams& params);

DerivedQuantities derive(const ModelParams& params);

struct OutputDistribution {
    double good;
    double bad;
    double none;
};

OutputDistribution output_distribution(const ModelParams& params,
                                       ClientAction client, WorkerAction worker);

struct StagePayoffs {
    double u; // worker
    double v; // client
};

StagePayoffs stage_payoffs(const ModelParams& params,
                           ClientAction client, WorkerAction worker);

const char* regime_name(Regime regime);

} // namespace mhm
