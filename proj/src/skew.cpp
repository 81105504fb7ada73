#include "relmart/skew.hpp"

#include <cmath>

namespace relmart {

namespace {

inline double sign0(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

/// Z^W frozen at the last zero of X (right-limit mark at the freeze node, so
/// the degenerate case "g_t is itself a zero of the mark's source" picks the
/// mark of the excursion opening there), times X.
SamplePath freeze_and_multiply(const SamplePath& ZW, const SamplePath& X) {
    const HMask maskX = detect_zero_set(X, default_epsilon(X.grid));
    const auto lz = last_zero_profile(maskX);
    const SamplePath ZWr = extend_marks(ZW, /*forward=*/false);
    SamplePath A(X.grid);
    for (std::size_t k = 0; k < X.size(); ++k) {
        const std::size_t g = lz[k] < 0 ? 0 : static_cast<std::size_t>(lz[k]);
        A[k] = ZWr[g] * X[k];
    }
    return A;
}

/// Final stage shared by the Eq.-(4)/(5) pipelines: sign each excursion of the
/// product by its mark. The mark multiplies |A| (the flip sets the excursion
/// sign), and is carried across detected-H stretches by the previous mark so Y
/// vanishes exactly where the product vanishes, not on the whole band.
SamplePath flip_reflected(const SamplePath& A, const SamplePath& Z1) {
    const SamplePath Z1e = extend_marks(Z1, /*forward=*/true);
    SamplePath Y(A.grid);
    for (std::size_t k = 0; k < A.size(); ++k) Y[k] = Z1e[k] * std::abs(A[k]);
    return Y;
}

/// Driving martingale of the Prop-9 proof:
/// dM = zeta1 sign(A) Z^W (sqrt(1-d^2) dB + d sign(D) dD), all factors +-1.
SamplePath reconstruct_driving(const SamplePath& B, const SamplePath& D, double delta,
                               const SamplePath& ZW, const SamplePath& A,
                               const SamplePath& Z1) {
    const double c = std::sqrt(1.0 - delta * delta);
    const SamplePath z1e = extend_marks(Z1, true);
    const SamplePath zwe = extend_marks(ZW, true);
    SamplePath sA(A.grid), sD(D.grid);
    for (std::size_t k = 0; k < A.size(); ++k) sA[k] = sign0(A[k]);
    for (std::size_t k = 0; k < D.size(); ++k) sD[k] = sign0(D[k]);
    const SamplePath sAe = extend_marks(sA, true);
    const SamplePath sDe = extend_marks(sD, true);
    SamplePath M(B.grid);
    double acc = 0.0;
    for (std::size_t k = 1; k < B.size(); ++k) {
        const double w = z1e[k - 1] * sAe[k - 1] * zwe[k - 1];
        acc += w * (c * (B[k] - B[k - 1]) +
                    delta * sDe[k - 1] * (D[k] - D[k - 1]));
        M[k] = acc;
    }
    return M;
}

SkewConstruction construct_pipeline(const SamplePath& B, const SamplePath& D,
                                    double delta, const RngStream& marks,
                                    double zw_alpha,
                                    const AlphaSchedule& final_sched,
                                    bool final_const) {
    const Decomposition Xd = ito_mckean(B, D, delta);
    const ExcursionSet excD = extract_excursions(D, Xd.H_ref);
    SkewConstruction out;
    out.X_delta = Xd.M;
    out.ZW = sign_process_const(excD, D.grid, zw_alpha, marks.fork(1)).Z;
    out.product = freeze_and_multiply(out.ZW, out.X_delta);

    const HMask maskA = detect_zero_set(out.product, default_epsilon(D.grid));
    const ExcursionSet excA = extract_excursions(out.product, maskA);
    out.Z1 = final_const
                 ? sign_process_const(excA, D.grid, final_sched.values[0], marks.fork(2)).Z
                 : sign_process_cell_at_open(excA, D.grid, final_sched, marks.fork(2)).Z;
    out.Y = flip_reflected(out.product, out.Z1);
    out.driving_M = reconstruct_driving(B, D, delta, out.ZW, out.product, out.Z1);
    return out;
}

}  // namespace

SkewConstruction construct_Y_delta_1(const SamplePath& B, const SamplePath& D,
                                     const SkewParams& params, const RngStream& marks) {
    return construct_pipeline(B, D, params.delta, marks, params.alpha,
                              AlphaSchedule::constant(params.alpha), true);
}

SkewConstruction construct_Y_delta_2(const SamplePath& B, const SamplePath& D,
                                     const AlphaSchedule& sched, double delta,
                                     const RngStream& marks) {
    if (!(delta > -1.0 && delta < 1.0))
        throw std::invalid_argument("construct_Y_delta_2: delta must lie in (-1, 1)");
    return construct_pipeline(B, D, delta, marks, sched.values.front(), sched, false);
}

TimeChange build_time_change(const SamplePath& qv, const TimeGrid& out_grid) {
    if (qv.values.back() < out_grid.horizon)
        throw truncation_error("time change undefined beyond <X,X>_T = " +
                               std::to_string(qv.values.back()) +
                               " < requested horizon " +
                               std::to_string(out_grid.horizon));
    TimeChange tc;
    tc.grid = out_grid;
    tc.tau.resize(out_grid.size());
    std::size_t s = 0;
    for (std::size_t j = 0; j < tc.tau.size(); ++j) {
        const double u = out_grid.time(j);
        while (s < qv.size() && !(qv[s] > u)) ++s;
        tc.tau[j] = std::min(s, qv.size() - 1);
    }
    return tc;
}

namespace {

RelmartConstruction from_relmart_impl(const Decomposition& X,
                                      const AlphaSchedule& sched, bool use_const,
                                      const TimeGrid& out_grid, const RngStream& marks) {
    RelmartConstruction out;
    // Z^D over the excursions of the reference mask; the fork indices mirror
    // the X^delta pipeline.
    const ExcursionSet excD = extract_excursions(X.H_ref);
    const SamplePath ZD =
        sign_process_const(excD, X.M.grid, sched.values.front(), marks.fork(1)).Z;
    out.product = freeze_and_multiply(ZD, X.M);

    const SamplePath qv = quadratic_variation(X.M);
    out.time_change = build_time_change(qv, out_grid);

    out.time_changed_product = SamplePath(out_grid);
    for (std::size_t j = 0; j < out_grid.size(); ++j)
        out.time_changed_product[j] = out.product[out.time_change.tau[j]];

    const HMask maskA = detect_zero_set(out.time_changed_product, default_epsilon(out_grid));
    const ExcursionSet excA = extract_excursions(out.time_changed_product, maskA);
    const SamplePath Z1 =
        use_const
            ? sign_process_const(excA, out_grid, sched.values[0], marks.fork(2)).Z
            : sign_process_cell_at_open(excA, out_grid, sched, marks.fork(2)).Z;
    out.Y = flip_reflected(out.time_changed_product, Z1);
    return out;
}

}  // namespace

RelmartConstruction construct_from_relmart(const Decomposition& X, double alpha,
                                           const TimeGrid& out_grid,
                                           const RngStream& marks) {
    return from_relmart_impl(X, AlphaSchedule::constant(alpha), true, out_grid, marks);
}

RelmartConstruction construct_from_relmart(const Decomposition& X,
                                           const AlphaSchedule& sched,
                                           const TimeGrid& out_grid,
                                           const RngStream& marks) {
    return from_relmart_impl(X, sched, false, out_grid, marks);
}

double skew_pdf(double alpha, double t, double x) {
    if (!(t > 0.0)) throw std::invalid_argument("skew_pdf: t must be > 0");
    const double s = std::sqrt(t);
    const double phi = normal_pdf(x / s) / s;
    if (x > 0.0) return 2.0 * alpha * phi;
    if (x < 0.0) return 2.0 * (1.0 - alpha) * phi;
    return phi;
}

double skew_cdf(double alpha, double t, double x) {
    if (!(t > 0.0)) throw std::invalid_argument("skew_cdf: t must be > 0");
    const double u = normal_cdf(x / std::sqrt(t));
    if (x <= 0.0) return 2.0 * (1.0 - alpha) * u;
    return (1.0 - alpha) + 2.0 * alpha * (u - 0.5);
}

double azzalini_pdf(double lambda, double x) {
    return 2.0 * normal_pdf(x) * normal_cdf(lambda * x);
}

double azzalini_cdf(double lambda, double x) {
    return normal_cdf(x) - 2.0 * owen_t(x, lambda);
}

}  // namespace relmart
