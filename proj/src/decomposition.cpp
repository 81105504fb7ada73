#include "relmart/decomposition.hpp"

#include <cmath>
#include <stdexcept>

#include "relmart/parallel.hpp"

namespace relmart {

namespace {

inline double sign0(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

void require_same_grid(const SamplePath& a, const SamplePath& b, const char* who) {
    if (!(a.grid == b.grid)) throw std::invalid_argument(std::string(who) + ": grid mismatch");
}

}  // namespace

Decomposition make_decomposition(SamplePath m, SamplePath v, HMask H_ref) {
    require_same_grid(m, v, "make_decomposition");
    Decomposition dec;
    dec.M = m + v;
    dec.m = std::move(m);
    dec.v = std::move(v);
    dec.H_ref = std::move(H_ref);
    return dec;
}

Decomposition decomposition_from_total(SamplePath M, SamplePath m, HMask H_ref) {
    require_same_grid(M, m, "decomposition_from_total");
    Decomposition dec;
    dec.v = M - m;
    dec.M = std::move(M);
    dec.m = std::move(m);
    dec.H_ref = std::move(H_ref);
    return dec;
}

Decomposition linear_combination(double a, const Decomposition& A, double b,
                                 const Decomposition& B) {
    require_same_grid(A.M, B.M, "linear_combination");
    return make_decomposition(a * A.m + b * B.m, a * A.v + b * B.v, A.H_ref);
}

TestReport carried_by_check(const Decomposition& dec, double tol) {
    if (!(tol > 0.0)) throw std::invalid_argument("carried_by_check: tol must be > 0");
    double outside = 0.0, tv = 0.0;
    for (std::size_t k = 0; k + 1 < dec.v.size(); ++k) {
        const double dv = std::abs(dec.v[k + 1] - dec.v[k]);
        tv += dv;
        if (!dec.H_ref[k]) outside += dv;
    }
    const double ratio = outside / std::max(tv, dec.v.grid.dt());
    return make_report("carried_by_check", ratio, tol, dec.v.grid.n_steps, 0, ratio <= tol);
}

Decomposition reflected_decomposition(const SamplePath& D, double epsilon) {
    SamplePath m(D.grid);
    double acc = 0.0;
    for (std::size_t k = 1; k < D.size(); ++k) {
        acc += sign0(D[k - 1]) * (D[k] - D[k - 1]);
        m[k] = acc;
    }
    SamplePath v = local_time_tanaka(D).as_path();
    return make_decomposition(std::move(m), std::move(v), detect_zero_set(D, epsilon));
}

Decomposition ito_mckean(const SamplePath& B, const SamplePath& D, double delta) {
    require_same_grid(B, D, "ito_mckean");
    if (!(delta > -1.0 && delta < 1.0))
        throw std::invalid_argument("ito_mckean: delta must lie strictly inside (-1, 1)");
    const double c = std::sqrt(1.0 - delta * delta);
    Decomposition refl = reflected_decomposition(D);
    return make_decomposition(c * B + delta * refl.m, delta * refl.v, refl.H_ref);
}

Decomposition integral_against(const SamplePath& h, const Decomposition& dec) {
    require_same_grid(h, dec.M, "integral_against");
    SamplePath im(dec.M.grid), iv(dec.M.grid);
    double am = 0.0, av = 0.0;
    for (std::size_t k = 1; k < h.size(); ++k) {
        am += h[k - 1] * (dec.m[k] - dec.m[k - 1]);
        av += h[k - 1] * (dec.v[k] - dec.v[k - 1]);
        im[k] = am;
        iv[k] = av;
    }
    return make_decomposition(std::move(im), std::move(iv), dec.H_ref);
}

Decomposition product_minus_bracket(const Decomposition& A, const Decomposition& B) {
    require_same_grid(A.M, B.M, "product_minus_bracket");
    SamplePath pm(A.M.grid), pv(A.M.grid);
    double am = 0.0, av = 0.0;
    for (std::size_t k = 1; k < A.M.size(); ++k) {
        const double a = A.M[k - 1], b = B.M[k - 1];
        am += a * (B.m[k] - B.m[k - 1]) + b * (A.m[k] - A.m[k - 1]);
        av += a * (B.v[k] - B.v[k - 1]) + b * (A.v[k] - A.v[k - 1]);
        pm[k] = am;
        pv[k] = av;
    }
    return make_decomposition(std::move(pm), std::move(pv), A.H_ref);
}

MinmaxResult minmax_family(const Decomposition& M, const Decomposition& W, int which) {
    require_same_grid(M.M, W.M, "minmax_family");
    if (which < 1 || which > 6)
        throw std::invalid_argument("minmax_family: which must be in 1..6");

    // zeros(W) subset of H, checked at mask level
    HMask wmask = detect_zero_set(W.M, W.H_ref.epsilon);
    std::size_t viol = 0, tot = 0;
    for (std::size_t k = 0; k < wmask.size(); ++k) {
        if (wmask[k]) {
            ++tot;
            if (!M.H_ref[k]) ++viol;
        }
    }
    const double ratio = tot > 0 ? static_cast<double>(viol) / static_cast<double>(tot) : 0.0;
    TestReport containment = make_report("minmax_zeroset_containment", ratio, 0.05,
                                         tot, 0, ratio <= 0.05);

    // |W| split exactly: m_abs = sum sign(W) dm_W, v_abs = sum sign(W) dv_W + rawL(W)
    SamplePath raw = local_time_tanaka_raw(W.M);
    SamplePath mabs(W.M.grid), vabs(W.M.grid);
    double am = 0.0, av = 0.0;
    for (std::size_t k = 1; k < W.M.size(); ++k) {
        const double s = sign0(W.M[k - 1]);
        am += s * (W.m[k] - W.m[k - 1]);
        av += s * (W.v[k] - W.v[k - 1]);
        mabs[k] = am;
        vabs[k] = av + raw[k];
    }

    static const double coef_w[] = {0, -0.5, 0.5, 0.0, -0.5, 0.5, 0.0};
    static const double coef_abs[] = {0, -0.5, -0.5, -1.0, 0.5, 0.5, 1.0};
    const double aw = coef_w[which], aa = coef_abs[which];

    // total path is the defining pointwise min/max, exactly
    SamplePath total(M.M.grid);
    for (std::size_t k = 0; k < total.size(); ++k) {
        const double mm = M.M[k], ww = W.M[k];
        double x = 0.0;
        switch (which) {
            case 1: x = std::min(mm, mm - ww); break;
            case 2: x = std::min(mm, mm + ww); break;
            case 3: x = std::min(mm - ww, mm + ww); break;
            case 4: x = std::max(mm, mm - ww); break;
            case 5: x = std::max(mm, mm + ww); break;
            case 6: x = std::max(mm - ww, mm + ww); break;
        }
        total[k] = x;
    }
    SamplePath mx = M.m + aw * W.m + aa * mabs;
    MinmaxResult res{decomposition_from_total(std::move(total), std::move(mx), M.H_ref),
                     containment};
    return res;
}

LastZeroTransform last_zero_transform(const Decomposition& dec) {
    const auto lz = last_zero_profile(dec.H_ref);
    LastZeroTransform out;
    out.frozen = SamplePath(dec.M.grid);
    out.transform = SamplePath(dec.M.grid);
    for (std::size_t k = 0; k < dec.M.size(); ++k) {
        double frozen;
        if (lz[k] < 0) {
            frozen = dec.M[0];
            out.had_undefined_gamma = true;
        } else {
            frozen = dec.M[static_cast<std::size_t>(lz[k])];
        }
        out.frozen[k] = frozen;
        out.transform[k] = dec.M[k] - frozen;
    }
    return out;
}

TestReport balayage_predictable(const SamplePath& k_values, const Decomposition& M,
                                double c_res) {
    require_same_grid(k_values, M.M, "balayage_predictable");
    HMask own = detect_zero_set(M.M, default_epsilon(M.M.grid));
    const auto lz = last_zero_profile(own);
    auto k_at = [&](std::size_t j) {
        return lz[j] < 0 ? k_values[0] : k_values[static_cast<std::size_t>(lz[j])];
    };
    double rhs = k_at(0) * M.M[0];
    double residual = std::abs(k_at(0) * M.M[0] - rhs);
    for (std::size_t j = 1; j < M.M.size(); ++j) {
        rhs += k_at(j - 1) * (M.M[j] - M.M[j - 1]);
        residual = std::max(residual, std::abs(k_at(j) * M.M[j] - rhs));
    }
    const double thr = c_res * std::pow(M.M.grid.dt(), 0.25);
    return make_report("balayage_predictable", residual, thr, M.M.grid.n_steps, 0,
                       residual <= thr);
}

namespace {

TestReport progressive_residual_impl(const SamplePath& Z, const SamplePath& Y,
                                     const AlphaSchedule& sched, double threshold,
                                     double* terminal_signed) {
    require_same_grid(Z, Y, "balayage_progressive_residual");
    SamplePath ZY(Z.grid);
    for (std::size_t k = 0; k < Z.size(); ++k) ZY[k] = Z[k] * Y[k];
    const SamplePath L = local_time_tanaka(ZY).as_path();

    double integral = 0.0, comp = 0.0, residual = 0.0, last = 0.0;
    for (std::size_t j = 1; j < Z.size(); ++j) {
        integral += Z[j - 1] * (Y[j] - Y[j - 1]);
        const double w = 2.0 * sched.value_at(Z.grid.time(j - 1)) - 1.0;
        comp += w * (L[j] - L[j - 1]);
        last = ZY[j] - ZY[0] - integral - comp;
        residual = std::max(residual, std::abs(last));
    }
    if (terminal_signed) *terminal_signed = last;
    return make_report("balayage_progressive", residual, threshold, Z.grid.n_steps, 0,
                       residual <= threshold);
}

}  // namespace

TestReport balayage_progressive_residual(const SamplePath& Z, const SamplePath& Y,
                                         double alpha, double threshold) {
    return progressive_residual_impl(Z, Y, AlphaSchedule::constant(alpha), threshold,
                                     nullptr);
}

TestReport balayage_progressive_residual(const SamplePath& Z, const SamplePath& Y,
                                         const AlphaSchedule& sched, double threshold) {
    return progressive_residual_impl(Z, Y, sched, threshold, nullptr);
}

double balayage_progressive_residual_terminal(const SamplePath& Z, const SamplePath& Y,
                                              double alpha) {
    double term = 0.0;
    progressive_residual_impl(Z, Y, AlphaSchedule::constant(alpha), 1.0, &term);
    return term;
}

void CheckpointMeanTest::add_path(const SamplePath& P) {
    const double p0 = P[0];
    for (std::size_t j = 0; j < fractions_.size(); ++j) {
        const auto idx = static_cast<std::size_t>(
            std::llround(fractions_[j] * static_cast<double>(P.grid.n_steps)));
        stats_[j].add(P[idx] - p0);
    }
}

void CheckpointMeanTest::merge(const CheckpointMeanTest& o) {
    for (std::size_t j = 0; j < stats_.size(); ++j) stats_[j].merge(o.stats_[j]);
}

TestReport CheckpointMeanTest::report(std::string name, std::uint64_t seed) const {
    double stat = 0.0;
    for (const auto& s : stats_) {
        const double se = s.std_error();
        stat = std::max(stat, se > 0.0 ? std::abs(s.mean) / se
                                       : (s.mean == 0.0 ? 0.0 : 1e300));
    }
    return make_report(std::move(name), stat, 3.0, stats_.empty() ? 0 : stats_[0].n, seed,
                       stat <= 3.0);
}

TestReport product_bracket_test(
    const std::function<std::pair<Decomposition, Decomposition>(std::size_t)>& make_pair,
    std::size_t n_paths, BracketVariant variant, std::string name, std::uint64_t seed,
    double carried_tol) {
    if (variant == BracketVariant::lemma3_carried) {
        std::vector<RunningStat> partial((n_paths + 63) / 64);
        parallel_chunks(n_paths, 64, [&](std::size_t c, std::size_t b, std::size_t e) {
            for (std::size_t i = b; i < e; ++i) {
                auto [A, B] = make_pair(i);
                Decomposition P = product_minus_bracket(A, B);
                partial[c].add(carried_by_check(P, carried_tol).statistic);
            }
        });
        RunningStat all;
        for (const auto& s : partial) all.merge(s);
        return make_report(std::move(name), all.mean, carried_tol, n_paths, seed,
                           all.mean <= carried_tol);
    }
    std::vector<CheckpointMeanTest> partial((n_paths + 63) / 64);
    parallel_chunks(n_paths, 64, [&](std::size_t c, std::size_t b, std::size_t e) {
        for (std::size_t i = b; i < e; ++i) {
            auto [A, B] = make_pair(i);
            SamplePath P = A.M;
            const SamplePath br = bracket(A.M, B.M);
            for (std::size_t k = 0; k < P.size(); ++k) P[k] = A.M[k] * B.M[k] - br[k];
            partial[c].add_path(P);
        }
    });
    CheckpointMeanTest all;
    for (const auto& s : partial) all.merge(s);
    return all.report(std::move(name), seed);
}

}  // namespace relmart
