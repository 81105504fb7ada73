#pragma once

#include "relmart/decomposition.hpp"

namespace relmart {

/// Skew parameters: alpha in [0,1] (or a schedule) and delta in (-1, 1).
struct SkewParams {
    double alpha = 0.5;
    double delta = 0.0;

    SkewParams(double a, double d) : alpha(a), delta(d) {
        if (!(a >= 0.0 && a <= 1.0))
            throw std::invalid_argument("SkewParams: alpha must lie in [0, 1]");
        if (!(d > -1.0 && d < 1.0))
            throw std::invalid_argument("SkewParams: delta must lie in (-1, 1)");
    }
};

/// Inverse of the quadratic-variation clock: tau[j] = first source node s with
/// QV(s) > j * dt_out. Nondecreasing; tau[0] is the first node where QV
/// exceeds 0.
struct TimeChange {
    TimeGrid grid;  // output grid
    std::vector<std::size_t> tau;
};

/// Thrown when the requested output horizon exceeds the available QV budget:
/// the time change is undefined beyond <X, X>_T.
struct truncation_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

TimeChange build_time_change(const SamplePath& qv, const TimeGrid& out_grid);

/// Output of an excursion-flipping construction.
struct SkewConstruction {
    SamplePath Y;         // the weak solution, started at 0
    SamplePath X_delta;   // sqrt(1-d^2) B + d |D|
    SamplePath product;   // Z^W frozen at the last zero of X^delta, times X^delta
    SamplePath ZW;        // Eq.-(1) sign process over D's excursions (0 on H)
    SamplePath Z1;        // sign process over the product's excursions (0 on H)
    SamplePath driving_M; // reconstructed driving martingale (a BM; QV_t = t)
};

/// Weak solution of the homogeneous skew equation
///   Y_t = B'_t + (2 alpha - 1) L0_t(Y),  Y_0 = 0,
/// built from X^delta by the flip pipeline. The marks stream is forked
/// internally: fork(1) for Z^W, fork(2) for Z^1.
SkewConstruction construct_Y_delta_1(const SamplePath& B, const SamplePath& D,
                                     const SkewParams& params, const RngStream& marks);

/// Time-inhomogeneous variant: each excursion of the product is signed once
/// with probability alpha(t at its opening node).
SkewConstruction construct_Y_delta_2(const SamplePath& B, const SamplePath& D,
                                     const AlphaSchedule& sched, double delta,
                                     const RngStream& marks);

struct RelmartConstruction {
    SamplePath Y;  // on the output grid
    TimeChange time_change;
    SamplePath product;               // Z^D frozen at the last zero of X, times X
    SamplePath time_changed_product;  // product read through tau
};

/// Weak solution built from an arbitrary continuous class-M(H) process X via
/// the QV time change (homogeneous marks).
RelmartConstruction construct_from_relmart(const Decomposition& X, double alpha,
                                           const TimeGrid& out_grid,
                                           const RngStream& marks);
/// Schedule variant.
RelmartConstruction construct_from_relmart(const Decomposition& X,
                                           const AlphaSchedule& sched,
                                           const TimeGrid& out_grid,
                                           const RngStream& marks);

// ---------------------------------------------------------------------------
// Exact-law oracles
// ---------------------------------------------------------------------------

/// Density of the skew BM started at 0 at time t: 2 alpha phi_t(x) for x > 0,
/// 2 (1-alpha) phi_t(x) for x < 0.
double skew_pdf(double alpha, double t, double x);
double skew_cdf(double alpha, double t, double x);

/// Azzalini skew normal: density 2 phi(u) Phi(lambda u).
double azzalini_pdf(double lambda, double x);
/// CDF via Owen's T: Phi(x) - 2 T(x, lambda); absolute error well below 1e-8.
double azzalini_cdf(double lambda, double x);

}  // namespace relmart
