#pragma once

#include <functional>
#include <optional>

#include "relmart/excursions.hpp"
#include "relmart/local_time.hpp"
#include "relmart/paths.hpp"
#include "relmart/stats.hpp"

namespace relmart {

/// A relative-martingale witness: M = m + v with m the martingale part
/// (m(0) = 0), v finite variation (v(0) = 0) whose increments are carried by
/// the reference set H_ref. M equals m + v up to accumulation rounding.
struct Decomposition {
    SamplePath M;
    SamplePath m;
    SamplePath v;
    HMask H_ref;
};

/// M is formed as m + v nodewise.
Decomposition make_decomposition(SamplePath m, SamplePath v, HMask H_ref);
/// v is formed as M - m nodewise (used where M has a pointwise-exact
/// definition of its own, e.g. the min/max family).
Decomposition decomposition_from_total(SamplePath M, SamplePath m, HMask H_ref);

Decomposition linear_combination(double a, const Decomposition& A, double b,
                                 const Decomposition& B);

/// Mass of dv outside H relative to the total variation of v:
/// sum_{k notin H} |dv_k| / max(TV(v), dt); passes iff <= tol.
TestReport carried_by_check(const Decomposition& dec, double tol);

/// W = |D| decomposed via Tanaka: m = sum sign(D) dD (a BM by Levy), v = L0(D).
Decomposition reflected_decomposition(const SamplePath& D, double epsilon);
inline Decomposition reflected_decomposition(const SamplePath& D) {
    return reflected_decomposition(D, default_epsilon(D.grid));
}

/// X^delta = sqrt(1-delta^2) B + delta |D|, the geometric Ito-McKean skew BM;
/// requires |delta| < 1 and independent B, D streams.
Decomposition ito_mckean(const SamplePath& B, const SamplePath& D, double delta);

/// Left-point stochastic integral of h against M: (sum h dm, sum h dv).
Decomposition integral_against(const SamplePath& h, const Decomposition& dec);

/// M W - [M, W] with the v-part assembled exactly from the input
/// decompositions: dv' = M dv_W + W dv_M.
Decomposition product_minus_bracket(const Decomposition& A, const Decomposition& B);

/// The six min/max combinations of Lemma-4 type: closed forms
///   X1 = M - W/2 - |W|/2   X2 = M + W/2 - |W|/2   X3 = M - |W|
///   X4 = M - W/2 + |W|/2   X5 = M + W/2 + |W|/2   X6 = M + |W|
/// The returned total path is the pointwise min/max itself; the containment
/// report checks zeros(W) against H at mask level.
struct MinmaxResult {
    Decomposition dec;
    TestReport containment;
};
MinmaxResult minmax_family(const Decomposition& M, const Decomposition& W, int which);

/// Last-zero transform over H_ref: returns (M - M_{gamma .}, M_{gamma .}).
/// Where no H node precedes t, gamma_t = 0 is used and flagged.
struct LastZeroTransform {
    SamplePath transform;  // M - M_{gamma_t}; exactly 0 at H nodes
    SamplePath frozen;     // M_{gamma_t}
    bool had_undefined_gamma = false;
};
LastZeroTransform last_zero_transform(const Decomposition& dec);

/// Predictable balayage residual (k frozen at the last zero of M itself):
/// max_t | k_{g_t} M_t - k_{g_0} M_0 - sum k_{g_s} dM_s |.
/// Passes iff residual <= c_res * dt^{1/4}.
TestReport balayage_predictable(const SamplePath& k_values, const Decomposition& M,
                                double c_res = 1.0);

/// Progressive balayage residual, homogeneous marks:
/// R(t) = Z_t Y_t - sum Z dY - (2 alpha - 1) L0_t(Z Y); statistic = max|R|.
TestReport balayage_progressive_residual(const SamplePath& Z, const SamplePath& Y,
                                         double alpha, double threshold = 1.0);
/// Piecewise variant: the last term is sum (2 alpha(t_k) - 1) dL0_k(Z Y).
TestReport balayage_progressive_residual(const SamplePath& Z, const SamplePath& Y,
                                         const AlphaSchedule& sched,
                                         double threshold = 1.0);
/// Signed terminal residual R(T) (used for the coefficient-kill noise test).
double balayage_progressive_residual_terminal(const SamplePath& Z, const SamplePath& Y,
                                              double alpha);

/// Accumulates per-path values of a process at checkpoint fractions of T and
/// tests |mean(P(t_j) - P(0))| <= 3 SE at each checkpoint.
class CheckpointMeanTest {
public:
    explicit CheckpointMeanTest(std::vector<double> fractions = {0.25, 0.5, 0.75, 1.0})
        : fractions_(std::move(fractions)), stats_(fractions_.size()) {}

    void add_path(const SamplePath& P);
    void merge(const CheckpointMeanTest& o);
    /// statistic = max_j |mean_j| / SE_j, threshold 3.
    TestReport report(std::string name, std::uint64_t seed) const;
    const std::vector<RunningStat>& stats() const { return stats_; }

private:
    std::vector<double> fractions_;
    std::vector<RunningStat> stats_;
};

enum class BracketVariant {
    lemma3_carried,    // carried_by_check of MW - [M,W]'s exact v-part
    corollary3_mean,   // checkpoint mean-stationarity of MW - [M,W]
};

/// Runs the product-bracket test over a deterministic per-index batch.
TestReport product_bracket_test(
    const std::function<std::pair<Decomposition, Decomposition>(std::size_t)>& make_pair,
    std::size_t n_paths, BracketVariant variant, std::string name, std::uint64_t seed,
    double carried_tol = 0.05);

}  // namespace relmart
