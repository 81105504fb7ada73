#include "relmart/validation.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "relmart/parallel.hpp"
#include "relmart/sde.hpp"
#include "relmart/skew.hpp"

namespace relmart {

namespace {

using nlohmann::json;

struct Ctx {
    bool fast;
    std::uint64_t seed;

    std::size_t paths(std::size_t n) const {
        return fast ? std::max<std::size_t>(n / 16, 64) : n;
    }
    std::size_t steps(std::size_t n) const {
        return fast ? std::max<std::size_t>(n / 4, 256) : n;
    }
};

Ctx ctx_of(const SuiteConfig& cfg) { return Ctx{cfg.suite == "fast", cfg.seed}; }

struct PathStreams {
    RngStream b, d, marks;
};

PathStreams path_streams(const RngStream& base, std::size_t i) {
    const RngStream s = base.fork(i);
    return {s.fork(0), s.fork(1), s.fork(2)};
}

Decomposition bm_as_decomposition(SamplePath D, HMask mask) {
    SamplePath zero(D.grid);
    return make_decomposition(std::move(D), std::move(zero), std::move(mask));
}

// ---------------------------------------------------------------------------
// Criterion 1: P(Y_T > 0) = alpha for the Prop-9 and Prop-11 constructions.
// ---------------------------------------------------------------------------
void criterion_1(const SuiteConfig& cfg, std::vector<TestReport>& out) {
    const Ctx c = ctx_of(cfg);
    const std::size_t N = c.paths(100000);
    const std::size_t n = c.steps(10000);
    const double delta = 0.6;

    for (double alpha : {0.25, 0.5, 0.75}) {
        // Prop 9
        {
            const TimeGrid grid(1.0, n);
            const RngStream base(c.seed, "c1/prop9/alpha=" + std::to_string(alpha));
            std::vector<std::uint64_t> hits((N + 255) / 256, 0);
            parallel_chunks(N, 256, [&](std::size_t ci, std::size_t b, std::size_t e) {
                std::uint64_t h = 0;
                for (std::size_t i = b; i < e; ++i) {
                    const auto st = path_streams(base, i);
                    const SamplePath B = simulate_brownian(grid, st.b);
                    const SamplePath D = simulate_driver_D(grid, st.d);
                    const SkewConstruction y =
                        construct_Y_delta_1(B, D, SkewParams(alpha, delta), st.marks);
                    if (y.Y.back() > 0.0) ++h;
                }
                hits[ci] = h;
            });
            std::uint64_t total = 0;
            for (auto h : hits) total += h;
            out.push_back(proportion_test(total, N, alpha,
                                          "c1/skew-sign/prop9/alpha=" + std::to_string(alpha),
                                          c.seed));
        }
        // Prop 11 with X = D itself
        {
            const TimeGrid src_grid(1.25, n + n / 4);
            const TimeGrid out_grid(1.0, n);
            const RngStream base(c.seed, "c1/prop11/alpha=" + std::to_string(alpha));
            struct Part { std::uint64_t hits = 0, used = 0; };
            std::vector<Part> parts((N + 255) / 256);
            parallel_chunks(N, 256, [&](std::size_t ci, std::size_t b, std::size_t e) {
                for (std::size_t i = b; i < e; ++i) {
                    const auto st = path_streams(base, i);
                    SamplePath D = simulate_driver_D(src_grid, st.d);
                    HMask mask = detect_zero_set(D, default_epsilon(src_grid));
                    Decomposition X = bm_as_decomposition(std::move(D), std::move(mask));
                    try {
                        const RelmartConstruction y =
                            construct_from_relmart(X, alpha, out_grid, st.marks);
                        ++parts[ci].used;
                        if (y.Y.back() > 0.0) ++parts[ci].hits;
                    } catch (const truncation_error&) {
                        // QV budget short on this path; excluded and counted
                    }
                }
            });
            std::uint64_t hits = 0, used = 0;
            for (const auto& p : parts) { hits += p.hits; used += p.used; }
            out.push_back(proportion_test(hits, used, alpha,
                                          "c1/skew-sign/prop11/alpha=" + std::to_string(alpha),
                                          c.seed));
        }
    }
}

// ---------------------------------------------------------------------------
// Criterion 2: reconstructed driving martingale is a BM: QV(1) within 0.02,
// KS of M_1 against N(0,1).
// ---------------------------------------------------------------------------
void criterion_2(const SuiteConfig& cfg, std::vector<TestReport>& out) {
    const Ctx c = ctx_of(cfg);
    const std::size_t N = c.paths(20000);
    const std::size_t n = c.steps(10000);
    const TimeGrid grid(1.0, n);
    const RngStream base(c.seed, "c2/driving-martingale");

    std::vector<std::vector<double>> terminals((N + 127) / 128);
    std::vector<RunningStat> qv_stats((N + 127) / 128);
    parallel_chunks(N, 128, [&](std::size_t ci, std::size_t b, std::size_t e) {
        for (std::size_t i = b; i < e; ++i) {
            const auto st = path_streams(base, i);
            const SamplePath B = simulate_brownian(grid, st.b);
            const SamplePath D = simulate_driver_D(grid, st.d);
            const SkewConstruction y =
                construct_Y_delta_1(B, D, SkewParams(0.75, 0.6), st.marks);
            terminals[ci].push_back(y.driving_M.back());
            qv_stats[ci].add(quadratic_variation(y.driving_M).back());
        }
    });
    std::vector<double> m1;
    m1.reserve(N);
    RunningStat qv;
    for (std::size_t ci = 0; ci < terminals.size(); ++ci) {
        m1.insert(m1.end(), terminals[ci].begin(), terminals[ci].end());
        qv.merge(qv_stats[ci]);
    }
    const double qv_dev = std::abs(qv.mean - 1.0);
    out.push_back(make_report("c2/driving-qv", qv_dev, 0.02, N, c.seed, qv_dev <= 0.02));
    out.push_back(ks_test(std::move(m1), [](double x) { return normal_cdf(x); },
                          "c2/driving-ks-normal", c.seed));
}

// ---------------------------------------------------------------------------
// Criterion 3: Azzalini marginal of X^delta_1, delta = 0.6, lambda = 0.75.
// ---------------------------------------------------------------------------
void criterion_3(const SuiteConfig& cfg, std::vector<TestReport>& out) {
    const Ctx c = ctx_of(cfg);
    const std::size_t N = c.paths(20000);
    const TimeGrid grid(1.0, 1024);
    const RngStream base(c.seed, "c3/azzalini");

    std::vector<std::vector<double>> parts((N + 255) / 256);
    parallel_chunks(N, 256, [&](std::size_t ci, std::size_t b, std::size_t e) {
        for (std::size_t i = b; i < e; ++i) {
            const auto st = path_streams(base, i);
            const SamplePath B = simulate_brownian(grid, st.b);
            const SamplePath D = simulate_driver_D(grid, st.d);
            parts[ci].push_back(ito_mckean(B, D, 0.6).M.back());
        }
    });
    std::vector<double> samples;
    samples.reserve(N);
    for (auto& p : parts) samples.insert(samples.end(), p.begin(), p.end());
    out.push_back(ks_test(std::move(samples),
                          [](double x) { return azzalini_cdf(0.75, x); },
                          "c3/azzalini-ks", c.seed));
}

// ---------------------------------------------------------------------------
// Criterion 4: E[L0_1(BM)] = sqrt(2/pi) +- 0.01; tanaka-vs-occupation <= 15%.
// ---------------------------------------------------------------------------
void criterion_4(const SuiteConfig& cfg, std::vector<TestReport>& out) {
    const Ctx c = ctx_of(cfg);
    {
        const std::size_t N = c.paths(100000);
        const std::size_t n = c.steps(100000);
        const TimeGrid grid(1.0, n);
        const RngStream base(c.seed, "c4/tanaka-mean");
        std::vector<RunningStat> parts((N + 63) / 64);
        parallel_chunks(N, 64, [&](std::size_t ci, std::size_t b, std::size_t e) {
            for (std::size_t i = b; i < e; ++i) {
                const SamplePath B = simulate_brownian(grid, base.fork(i));
                parts[ci].add(local_time_tanaka(B).back());
            }
        });
        RunningStat all;
        for (const auto& p : parts) all.merge(p);
        const double target = std::sqrt(2.0 / 3.14159265358979323846);
        const double dev = std::abs(all.mean - target);
        out.push_back(make_report("c4/tanaka-mean", dev, 0.01, N, c.seed, dev <= 0.01,
                                  "mean=" + std::to_string(all.mean)));
    }
    {
        const std::size_t N = c.paths(1000);
        const std::size_t n = c.steps(100000);
        const TimeGrid grid(1.0, n);
        const double eps = std::sqrt(grid.dt());
        const RngStream base(c.seed, "c4/tanaka-vs-occupation");
        std::vector<RunningStat> parts((N + 15) / 16);
        parallel_chunks(N, 16, [&](std::size_t ci, std::size_t b, std::size_t e) {
            for (std::size_t i = b; i < e; ++i) {
                const SamplePath B = simulate_brownian(grid, base.fork(i));
                const double lt = local_time_tanaka(B).back();
                const double lo = local_time_occupation(B, eps).back();
                parts[ci].add(std::abs(lt - lo) / std::max(lt, grid.dt()));
            }
        });
        RunningStat all;
        for (const auto& p : parts) all.merge(p);
        out.push_back(make_report("c4/tanaka-vs-occupation", all.mean, 0.15, N, c.seed,
                                  all.mean <= 0.15));
    }
}

// ---------------------------------------------------------------------------
// Criterion 5: balayage residuals shrink under refinement; coefficient-kill
// noise floor. Carriers are |D| (see decisions on nonnegative carriers).
// ---------------------------------------------------------------------------
struct BalayageLevels {
    std::vector<double> residual;   // mean over paths of max_t |R|
    std::vector<double> floor;      // alpha = 1/2 twin on the same seeds
    double kill_mean = 0.0;         // signed R_half(T) mean at the finest level
    double kill_se = 1.0;
};

BalayageLevels run_balayage(const Ctx& c, const std::string& tag, int which,
                            std::size_t N, const std::vector<std::size_t>& levels) {
    // which: 0 = Prop 2 (predictable), 1 = Prop 5 (const marks),
    //        2 = Prop 6 (schedule marks at excursion open)
    BalayageLevels lv;
    const AlphaSchedule sched({0.0, 0.5}, {0.25, 0.75});
    for (std::size_t li = 0; li < levels.size(); ++li) {
        const TimeGrid grid(1.0, levels[li]);
        const RngStream base(c.seed, "c5/" + tag + "/level=" + std::to_string(li));
        std::vector<RunningStat> rs((N + 15) / 16), fs((N + 15) / 16), ks((N + 15) / 16);
        parallel_chunks(N, 16, [&](std::size_t ci, std::size_t b, std::size_t e) {
            for (std::size_t i = b; i < e; ++i) {
                const auto st = path_streams(base, i);
                const SamplePath D = simulate_driver_D(grid, st.d);
                if (which == 0) {
                    const Decomposition M = reflected_decomposition(D);
                    SamplePath k(grid);
                    for (std::size_t j = 0; j < k.size(); ++j)
                        k[j] = std::cos(3.0 * M.v[j]);
                    rs[ci].add(balayage_predictable(k, M).statistic);
                    continue;
                }
                const SamplePath Y = abs_path(D);
                const HMask mask = detect_zero_set(Y, default_epsilon(grid));
                const ExcursionSet exc = extract_excursions(Y, mask);
                SamplePath Z, Zhalf;
                if (which == 1) {
                    Z = sign_process_const(exc, grid, 0.75, st.marks).Z;
                } else {
                    Z = sign_process_cell_at_open(exc, grid, sched, st.marks).Z;
                }
                Zhalf = sign_process_const(exc, grid, 0.5, st.marks.fork(99)).Z;
                const double r =
                    which == 1
                        ? balayage_progressive_residual(Z, Y, 0.75).statistic
                        : balayage_progressive_residual(Z, Y, sched).statistic;
                rs[ci].add(r);
                fs[ci].add(balayage_progressive_residual(Zhalf, Y, 0.5).statistic);
                if (li + 1 == levels.size())
                    ks[ci].add(balayage_progressive_residual_terminal(Zhalf, Y, 0.5));
            }
        });
        RunningStat r, f, k;
        for (std::size_t ci = 0; ci < rs.size(); ++ci) {
            r.merge(rs[ci]);
            f.merge(fs[ci]);
            k.merge(ks[ci]);
        }
        lv.residual.push_back(r.mean);
        lv.floor.push_back(f.mean);
        if (li + 1 == levels.size() && which != 0) {
            lv.kill_mean = k.mean;
            lv.kill_se = k.std_error();
        }
    }
    return lv;
}

void criterion_5(const SuiteConfig& cfg, std::vector<TestReport>& out) {
    const Ctx c = ctx_of(cfg);
    const std::size_t N = c.paths(256);
    const std::vector<std::size_t> levels = {c.steps(2000), c.steps(4000), c.steps(8000),
                                             c.steps(16000)};

    auto trend_report = [&](const std::string& name, const std::vector<double>& r) {
        bool mono = true;
        for (std::size_t i = 1; i < r.size(); ++i) mono = mono && r[i] < r[i - 1];
        const double ratio = r.back() / r.front();
        out.push_back(make_report(name, ratio, 1.0, N, c.seed, mono && ratio < 1.0,
                                  "levels: " + std::to_string(r[0]) + " " +
                                      std::to_string(r[1]) + " " + std::to_string(r[2]) +
                                      " " + std::to_string(r[3])));
    };

    // Prop 2 with k = f(v_{gamma_t}); plus the k == 1 exact-telescoping case
    {
        const BalayageLevels lv = run_balayage(c, "prop2", 0, N, levels);
        trend_report("c5/prop2-trend", lv.residual);

        const TimeGrid grid(1.0, levels.back());
        const SamplePath D =
            simulate_driver_D(grid, RngStream(c.seed, "c5/prop2-kone").fork(0));
        const Decomposition M = reflected_decomposition(D);
        SamplePath ones(grid);
        for (auto& v : ones.values) v = 1.0;
        const double r1 = balayage_predictable(ones, M).statistic;
        out.push_back(make_report("c5/prop2-k-one", r1, 1e-10, 1, c.seed, r1 <= 1e-10));
    }
    // Prop 5, alpha = 0.75
    {
        const BalayageLevels lv = run_balayage(c, "prop5", 1, N, levels);
        trend_report("c5/prop5-trend", lv.residual);
        const double ratio = lv.residual.back() / std::max(lv.floor.back(), 1e-300);
        out.push_back(make_report("c5/prop5-floor", ratio, 10.0, N, c.seed, ratio <= 10.0,
                                  "floor=" + std::to_string(lv.floor.back())));
        const double z = lv.kill_se > 0 ? std::abs(lv.kill_mean) / lv.kill_se : 0.0;
        out.push_back(make_report("c5/prop5-kill-mean", z, 3.0, N, c.seed, z <= 3.0));
    }
    // Prop 6, schedule {0.25 on [0, 1/2), 0.75 on [1/2, 1]}
    {
        const BalayageLevels lv = run_balayage(c, "prop6", 2, N, levels);
        trend_report("c5/prop6-trend", lv.residual);
        const double ratio = lv.residual.back() / std::max(lv.floor.back(), 1e-300);
        out.push_back(make_report("c5/prop6-floor", ratio, 10.0, N, c.seed, ratio <= 10.0,
                                  "floor=" + std::to_string(lv.floor.back())));
    }
}

// ---------------------------------------------------------------------------
// Criterion 6: class-membership checks (carried_by_check and the exact
// Lemma-2 assertion).
// ---------------------------------------------------------------------------
void criterion_6(const SuiteConfig& cfg, std::vector<TestReport>& out) {
    const Ctx c = ctx_of(cfg);
    const std::size_t N = c.paths(64);
    const std::size_t n = c.steps(16384);
    const TimeGrid grid(1.0, n);
    const RngStream base(c.seed, "c6/class-membership");

    struct Acc {
        RunningStat reflected, ito, lemma2, vecspace, lemma5;
        RunningStat minmax[6];
        double lemma2_exact = 0.0;
    };
    std::vector<Acc> parts((N + 7) / 8);
    parallel_chunks(N, 8, [&](std::size_t ci, std::size_t b, std::size_t e) {
        for (std::size_t i = b; i < e; ++i) {
            const auto st = path_streams(base, i);
            const SamplePath B = simulate_brownian(grid, st.b);
            const SamplePath D = simulate_driver_D(grid, st.d);
            const Decomposition refl = reflected_decomposition(D);
            const Decomposition ito = ito_mckean(B, D, 0.6);
            Acc& a = parts[ci];
            a.reflected.add(carried_by_check(refl, 0.05).statistic);
            a.ito.add(carried_by_check(ito, 0.05).statistic);
            for (int w = 1; w <= 6; ++w) {
                const MinmaxResult mm = minmax_family(ito, refl, w);
                a.minmax[w - 1].add(carried_by_check(mm.dec, 0.05).statistic);
            }
            // Lemma 2 with bounded h
            SamplePath h(grid), h0(grid);
            for (std::size_t k = 0; k < h.size(); ++k) {
                h[k] = std::cos(3.0 * ito.M[k]);
                h0[k] = refl.H_ref[k] ? 0.0 : std::cos(3.0 * grid.time(k));
            }
            a.lemma2.add(carried_by_check(integral_against(h, ito), 0.05).statistic);
            // Lemma 2 item 2: h null on H => the v-part is exactly zero
            a.lemma2_exact =
                std::max(a.lemma2_exact, max_abs(integral_against(h0, refl).v));
            // vector-space closure
            a.vecspace.add(
                carried_by_check(linear_combination(0.7, refl, 1.3, ito), 0.05).statistic);
            // Lemma 5: k_g M with M = |D|, H replaced by the zero mask of M
            {
                const HMask mown = detect_zero_set(refl.M, default_epsilon(grid));
                const auto lz = last_zero_profile(mown);
                SamplePath kg(grid);
                for (std::size_t k = 0; k < kg.size(); ++k) {
                    const std::size_t g = lz[k] < 0 ? 0 : static_cast<std::size_t>(lz[k]);
                    kg[k] = 1.0 / (1.0 + refl.v[g]);
                }
                SamplePath total(grid), mpart(grid);
                double acc = 0.0;
                for (std::size_t k = 0; k < kg.size(); ++k) total[k] = kg[k] * refl.M[k];
                for (std::size_t k = 1; k < kg.size(); ++k) {
                    acc += kg[k - 1] * (refl.m[k] - refl.m[k - 1]);
                    mpart[k] = acc;
                }
                Decomposition kgM = decomposition_from_total(total, mpart, mown);
                a.lemma5.add(carried_by_check(kgM, 0.05).statistic);
            }
        }
    });
    Acc all;
    for (const auto& p : parts) {
        all.reflected.merge(p.reflected);
        all.ito.merge(p.ito);
        all.lemma2.merge(p.lemma2);
        all.vecspace.merge(p.vecspace);
        all.lemma5.merge(p.lemma5);
        for (int w = 0; w < 6; ++w) all.minmax[w].merge(p.minmax[w]);
        all.lemma2_exact = std::max(all.lemma2_exact, p.lemma2_exact);
    }
    auto push = [&](const std::string& name, double stat, double thr) {
        out.push_back(make_report(name, stat, thr, N, c.seed, stat <= thr));
    };
    push("c6/carried/reflected", all.reflected.mean, 0.05);
    push("c6/carried/ito-mckean", all.ito.mean, 0.05);
    for (int w = 0; w < 6; ++w)
        push("c6/carried/minmax-x" + std::to_string(w + 1), all.minmax[w].mean, 0.05);
    push("c6/carried/lemma2-integral", all.lemma2.mean, 0.05);
    push("c6/lemma2-null-integrand-exact", all.lemma2_exact, 0.0);
    push("c6/carried/vector-space", all.vecspace.mean, 0.05);
    push("c6/carried/lemma5-balayage", all.lemma5.mean, 0.05);
}

// ---------------------------------------------------------------------------
// Criterion 7: martingale mean-stationarity at checkpoints.
// ---------------------------------------------------------------------------
void criterion_7(const SuiteConfig& cfg, std::vector<TestReport>& out) {
    const Ctx c = ctx_of(cfg);
    const std::size_t N = c.paths(100000);

    // Corollary 3: M = X^delta (0.5), W = D
    {
        const std::size_t n = c.steps(4096);
        const TimeGrid grid(1.0, n);
        const RngStream base(c.seed, "c7/cor3");
        std::vector<CheckpointMeanTest> parts((N + 255) / 256);
        parallel_chunks(N, 256, [&](std::size_t ci, std::size_t b, std::size_t e) {
            for (std::size_t i = b; i < e; ++i) {
                const auto st = path_streams(base, i);
                const SamplePath B = simulate_brownian(grid, st.b);
                const SamplePath D = simulate_driver_D(grid, st.d);
                const Decomposition M = ito_mckean(B, D, 0.5);
                const SamplePath br = bracket(M.M, D);
                SamplePath P(grid);
                for (std::size_t k = 0; k < P.size(); ++k) P[k] = M.M[k] * D[k] - br[k];
                parts[ci].add_path(P);
            }
        });
        CheckpointMeanTest all;
        for (const auto& p : parts) all.merge(p);
        out.push_back(all.report("c7/cor3-product-bracket", c.seed));
    }
    // Prop 7: M = B + 0.8 L0(D) (null bracket against D); gate then transform
    {
        const std::size_t n = c.steps(20000);
        const TimeGrid grid(1.0, n);
        const RngStream base(c.seed, "c7/prop7");
        struct Part {
            CheckpointMeanTest cm;
            RunningStat gate;
        };
        std::vector<Part> parts((N + 127) / 128);
        parallel_chunks(N, 128, [&](std::size_t ci, std::size_t b, std::size_t e) {
            for (std::size_t i = b; i < e; ++i) {
                const auto st = path_streams(base, i);
                const SamplePath B = simulate_brownian(grid, st.b);
                const SamplePath D = simulate_driver_D(grid, st.d);
                const Decomposition refl = reflected_decomposition(D);
                const Decomposition M =
                    make_decomposition(B, 0.8 * refl.v, refl.H_ref);
                parts[ci].gate.add(bracket(M.M, D).back());
                parts[ci].cm.add_path(last_zero_transform(M).transform);
            }
        });
        CheckpointMeanTest cm;
        RunningStat gate;
        for (const auto& p : parts) {
            cm.merge(p.cm);
            gate.merge(p.gate);
        }
        const double gz = gate.std_error() > 0 ? std::abs(gate.mean) / gate.std_error() : 0.0;
        out.push_back(make_report("c7/prop7-bracket-gate", gz, 3.0, N, c.seed, gz <= 3.0));
        out.push_back(cm.report("c7/prop7-transform", c.seed));
    }
    // Corollary 5 bridge: f(v) M - int f(v) dv for M = |D|
    {
        const std::size_t n = c.steps(4096);
        const TimeGrid grid(1.0, n);
        const RngStream base(c.seed, "c7/cor5");
        std::vector<CheckpointMeanTest> parts((N + 255) / 256);
        parallel_chunks(N, 256, [&](std::size_t ci, std::size_t b, std::size_t e) {
            for (std::size_t i = b; i < e; ++i) {
                const SamplePath D = simulate_driver_D(grid, base.fork(i));
                const Decomposition refl = reflected_decomposition(D);
                SamplePath S(grid);
                double integral = 0.0;
                S[0] = refl.M[0] / (1.0 + refl.v[0]);
                for (std::size_t k = 1; k < S.size(); ++k) {
                    integral += (refl.v[k] - refl.v[k - 1]) / (1.0 + refl.v[k - 1]);
                    S[k] = refl.M[k] / (1.0 + refl.v[k]) - integral;
                }
                parts[ci].add_path(S);
            }
        });
        CheckpointMeanTest all;
        for (const auto& p : parts) all.merge(p);
        out.push_back(all.report("c7/cor5-bridge", c.seed));
    }
    // Controls: D^2 - t must pass; injected drift must fail
    {
        const std::size_t n = c.steps(4096);
        const TimeGrid grid(1.0, n);
        const RngStream base(c.seed, "c7/controls");
        std::vector<CheckpointMeanTest> pos((N + 255) / 256), neg((N + 255) / 256);
        parallel_chunks(N, 256, [&](std::size_t ci, std::size_t b, std::size_t e) {
            for (std::size_t i = b; i < e; ++i) {
                const SamplePath D = simulate_driver_D(grid, base.fork(i));
                const SamplePath qv = quadratic_variation(D);
                SamplePath P(grid), Q(grid);
                for (std::size_t k = 0; k < P.size(); ++k) {
                    P[k] = D[k] * D[k] - qv[k];
                    Q[k] = P[k] + 0.05 * grid.time(k);
                }
                pos[ci].add_path(P);
                neg[ci].add_path(Q);
            }
        });
        CheckpointMeanTest p, q;
        for (std::size_t ci = 0; ci < pos.size(); ++ci) {
            p.merge(pos[ci]);
            q.merge(neg[ci]);
        }
        out.push_back(p.report("c7/control-positive", c.seed));
        const TestReport inner = q.report("c7/control-negative", c.seed);
        out.push_back(make_report("c7/control-negative", inner.statistic, inner.threshold,
                                  N, c.seed, !inner.pass,
                                  "drift 0.05 t must be detected"));
    }
}

// ---------------------------------------------------------------------------
// Criterion 8: Picard convergence shape.
// ---------------------------------------------------------------------------
void criterion_8(const SuiteConfig& cfg, std::vector<TestReport>& out) {
    const Ctx c = ctx_of(cfg);
    const std::size_t N = c.paths(128);
    const std::size_t n = c.steps(4096);
    const TimeGrid grid(1.0, n);
    const RngStream base(c.seed, "c8/picard");

    const CoeffSpec lin = make_coeff_spec(
        "picard-linear",
        [](double, double x, double) { return 0.25 * x; },
        [](double, double x, double) { return 0.15 * x; }, 0.4, 0.4, false, 1.0);

    std::vector<SdeProblem> batch;
    batch.reserve(N);
    for (std::size_t i = 0; i < N; ++i) {
        const SamplePath D = simulate_driver_D(grid, base.fork(i));
        SdeProblem prob;
        prob.coeffs = lin;
        prob.driver = reflected_decomposition(D);
        prob.D_path = D;
        prob.H_mask = prob.driver.H_ref;
        prob.z0 = 1.0;
        prob.zeta = 0.3;
        batch.push_back(std::move(prob));
    }
    const PicardResult res = picard_solve_batch(batch, 15, 1e-4);
    const auto& d = res.distances;

    out.push_back(make_report("c8/picard-converged", res.converged ? 1.0 : 0.0, 1.0, N,
                              c.seed, res.converged,
                              "iterations=" + std::to_string(res.iterations)));
    bool dec = d.size() >= 4;
    for (std::size_t p = 2; p + 1 < d.size(); ++p) dec = dec && d[p + 1] < d[p];
    out.push_back(make_report("c8/picard-strictly-decreasing", dec ? 0.0 : 1.0, 0.0, N,
                              c.seed, dec));
    double total = 0.0, tail = 0.0;
    for (std::size_t p = 0; p < d.size(); ++p) {
        total += d[p];
        if (p + 3 >= d.size()) tail += d[p];
    }
    const double tail_ratio = total > 0 ? tail / total : 0.0;
    out.push_back(make_report("c8/picard-cauchy-tail", tail_ratio, 0.05, N, c.seed,
                              tail_ratio <= 0.05));
    // factorial-bound shape on squared distances: q_p (p+1)/T bounded by the
    // early-fitted constant
    {
        const double T = 1.0;
        bool ok = d.size() >= 6;
        double bhat = 0.0;
        if (ok) {
            for (std::size_t p = 2; p <= 3; ++p) {
                const double q = (d[p + 1] * d[p + 1]) / (d[p] * d[p]);
                bhat = std::max(bhat, q * static_cast<double>(p + 1) / T);
            }
            for (std::size_t p = 4; p + 1 < d.size(); ++p) {
                const double q = (d[p + 1] * d[p + 1]) / (d[p] * d[p]);
                ok = ok && q <= 1.5 * bhat * T / static_cast<double>(p + 1);
            }
        }
        out.push_back(make_report("c8/picard-factorial-shape", ok ? 0.0 : 1.0, 0.0, N,
                                  c.seed, ok, "fitted B=" + std::to_string(bhat)));
    }
}

// ---------------------------------------------------------------------------
// Criterion 9: coincidence with the classical equation (Props 13-16).
// ---------------------------------------------------------------------------
void criterion_9(const SuiteConfig& cfg, std::vector<TestReport>& out) {
    const Ctx c = ctx_of(cfg);
    CoincidenceParams params;
    params.n_paths = c.paths(1000);
    params.calib_paths = 32;
    params.n_steps = c.steps(8192);
    params.seed = c.seed;

    const double eta = 0.15;  // aux-vanishing scale, well above sqrt(dt)
    const CoeffSpec p13 = make_coeff_spec(
        "p13-aux-vanishing",
        [eta](double, double x, double aux) {
            return (0.8 + 0.4 * std::cos(x)) * std::tanh(aux * aux / (eta * eta));
        },
        [](double, double x, double) { return 0.3 - 0.2 * x; }, 1.6, 0.65, true, 1.0);
    const CoeffSpec p14 = make_coeff_spec(
        "p14-generic",
        [](double, double x, double) { return 0.6 + 0.3 * std::tanh(x); },
        [](double, double x, double) { return -0.2 * x; }, 1.2, 0.55, false, 1.0);

    out.push_back(coincidence_test(CoincidenceVariant::P13, p13, params).report);
    out.push_back(coincidence_test(CoincidenceVariant::P14, p14, params).report);
    out.push_back(coincidence_test(CoincidenceVariant::P15, p14, params).report);
    out.push_back(coincidence_test(CoincidenceVariant::P16, p14, params).report);

    // v == 0 control: the two solvers coincide exactly
    {
        const TimeGrid grid(1.0, c.steps(4096));
        const SamplePath B =
            simulate_brownian(grid, RngStream(c.seed, "c9/vzero").fork(0));
        SdeProblem prob;
        prob.coeffs = p14;
        prob.driver = bm_as_decomposition(B, detect_zero_set(B, default_epsilon(grid)));
        prob.D_path = B;
        prob.H_mask = prob.driver.H_ref;
        prob.z0 = 0.4;
        const double diff = max_abs_diff(euler_solve(prob), euler_solve_classical(prob));
        out.push_back(make_report("c9/v-zero-control", diff, 0.0, 1, c.seed, diff == 0.0));
    }
}

// ---------------------------------------------------------------------------
// Criterion 10: geometric skew SDE strong order and log-QV.
// ---------------------------------------------------------------------------
void criterion_10(const SuiteConfig& cfg, std::vector<TestReport>& out) {
    const Ctx c = ctx_of(cfg);
    const double mu = 0.0, sigma_c = 0.2, delta = 0.6, S0 = 1.0;
    {
        const std::size_t N = c.paths(4096);
        const std::size_t n_fine = 16384;  // dt = 2^-14 .. 2^-10 by restriction
        const TimeGrid fine(1.0, n_fine);
        const RngStream base(c.seed, "c10/strong-order");
        const unsigned n_levels = 5;
        std::vector<std::vector<RunningStat>> parts((N + 63) / 64,
                                                    std::vector<RunningStat>(n_levels));
        parallel_chunks(N, 64, [&](std::size_t ci, std::size_t b, std::size_t e) {
            for (std::size_t i = b; i < e; ++i) {
                const auto st = path_streams(base, i);
                const SamplePath B = simulate_brownian(fine, st.b);
                const SamplePath D = simulate_driver_D(fine, st.d);
                const SamplePath X = ito_mckean(B, D, delta).M;
                for (unsigned l = 0; l < n_levels; ++l) {
                    const SamplePath Xl = restrict_path(X, l);
                    const auto [eu, cl] = geometric_skew_solve(mu, sigma_c, S0, Xl);
                    parts[ci][l].add(std::abs(eu.back() - cl.back()));
                }
            }
        });
        std::vector<std::pair<double, double>> dt_err;
        for (unsigned l = 0; l < n_levels; ++l) {
            RunningStat s;
            for (const auto& p : parts) s.merge(p[l]);
            dt_err.push_back({1.0 / static_cast<double>(n_fine >> l), s.mean});
        }
        std::sort(dt_err.begin(), dt_err.end(),
                  [](auto& a, auto& b) { return a.first > b.first; });
        const ConvergenceFit fit = convergence_order(dt_err);
        const bool ok = fit.exact || (fit.slope >= 0.35 && fit.slope <= 0.65);
        out.push_back(make_report("c10/strong-order-slope", fit.slope, 0.65, N, c.seed, ok,
                                  "expected in [0.35, 0.65]; R2=" +
                                      std::to_string(fit.r_squared)));
    }
    {
        const std::size_t N = 32;
        const TimeGrid grid(1.0, c.steps(100000));
        const RngStream base(c.seed, "c10/log-qv");
        RunningStat qv;
        for (std::size_t i = 0; i < N; ++i) {
            const auto st = path_streams(base, i);
            const SamplePath B = simulate_brownian(grid, st.b);
            const SamplePath D = simulate_driver_D(grid, st.d);
            const SamplePath X = ito_mckean(B, D, delta).M;
            const auto [eu, cl] = geometric_skew_solve(mu, sigma_c, S0, X);
            SamplePath logS(grid);
            for (std::size_t k = 0; k < logS.size(); ++k) logS[k] = std::log(cl[k]);
            qv.add(quadratic_variation(logS).back());
        }
        const double target = sigma_c * sigma_c;
        const double rel = std::abs(qv.mean - target) / target;
        out.push_back(make_report("c10/log-qv", rel, 0.02, N, c.seed, rel <= 0.02));
    }
}

// ---------------------------------------------------------------------------
// Criterion 11: uniqueness and Gronwall stability.
// ---------------------------------------------------------------------------
void criterion_11(const SuiteConfig& cfg, std::vector<TestReport>& out) {
    const Ctx c = ctx_of(cfg);
    const std::size_t n = c.steps(4096);
    const TimeGrid grid(1.0, n);
    const CoeffSpec lin = make_coeff_spec(
        "gronwall-linear",
        [](double, double x, double) { return 0.25 * x; },
        [](double, double x, double) { return 0.15 * x; }, 0.4, 0.4, false, 1.0);

    // bit-identical reruns
    {
        const RngStream st(c.seed, "c11/determinism");
        auto build = [&] {
            const SamplePath D = simulate_driver_D(grid, st.fork(1));
            SdeProblem prob;
            prob.coeffs = lin;
            prob.driver = reflected_decomposition(D);
            prob.D_path = D;
            prob.H_mask = prob.driver.H_ref;
            prob.z0 = 1.0;
            return prob;
        };
        const SdeProblem p1 = build(), p2 = build();
        const SamplePath x1 = euler_solve(p1), x2 = euler_solve(p2);
        bool identical = x1.size() == x2.size() &&
                         std::memcmp(x1.values.data(), x2.values.data(),
                                     x1.size() * sizeof(double)) == 0;
        const PicardResult pi1 = picard_solve(p1, 15, 1e-4), pi2 = picard_solve(p2, 15, 1e-4);
        identical = identical &&
                    std::memcmp(pi1.solutions[0].values.data(),
                                pi2.solutions[0].values.data(),
                                pi1.solutions[0].size() * sizeof(double)) == 0;
        out.push_back(make_report("c11/bit-identical-rerun", identical ? 0.0 : 1.0, 0.0, 2,
                                  c.seed, identical));
    }
    // Gronwall envelope: terminal L2 response to a z0 perturbation
    {
        const std::size_t N = c.paths(256);
        const double h = 0.01, K = 0.4, T = 1.0;
        const double envelope = std::exp(3.0 * K * K * (2.0 + T) * T) * h;
        const RngStream base(c.seed, "c11/gronwall");
        std::vector<RunningStat> parts((N + 15) / 16);
        parallel_chunks(N, 16, [&](std::size_t ci, std::size_t b, std::size_t e) {
            for (std::size_t i = b; i < e; ++i) {
                const SamplePath D = simulate_driver_D(grid, base.fork(i));
                SdeProblem prob;
                prob.coeffs = lin;
                prob.driver = reflected_decomposition(D);
                prob.D_path = D;
                prob.H_mask = prob.driver.H_ref;
                prob.z0 = 1.0;
                const SamplePath x = euler_solve(prob);
                prob.z0 = 1.0 + h;
                const SamplePath y = euler_solve(prob);
                const double dterm = y.back() - x.back();
                parts[ci].add(dterm * dterm);
            }
        });
        RunningStat s;
        for (const auto& p : parts) s.merge(p);
        const double l2 = std::sqrt(s.mean);
        out.push_back(make_report("c11/gronwall-envelope", l2, envelope, N, c.seed,
                                  l2 <= envelope));
    }
}

// ---------------------------------------------------------------------------
// Criterion 12: Eq.-(11) telescoping residual and the corrupted-gamma control.
// ---------------------------------------------------------------------------
void criterion_12(const SuiteConfig& cfg, std::vector<TestReport>& out) {
    const Ctx c = ctx_of(cfg);
    const std::size_t n = c.steps(10000);
    const TimeGrid grid(1.0, n);
    const CoeffSpec coeffs = make_coeff_spec(
        "eq11-homog",
        [](double, double x, double) { return 0.5 + 0.2 * std::tanh(x); },
        [](double, double x, double) { return -0.1 * x; }, 0.8, 0.3, false, 1.0);
    const SamplePath D = simulate_driver_D(grid, RngStream(c.seed, "c12/eq11").fork(1));
    SdeProblem prob;
    prob.coeffs = coeffs;
    prob.driver = reflected_decomposition(D);
    prob.D_path = D;
    prob.H_mask = prob.driver.H_ref;
    prob.z0 = 0.7;
    const SamplePath sol = euler_solve(prob);

    TestReport clean = eq11_residual(prob, sol);
    clean.name = "c12/eq11-residual";
    clean.seed = c.seed;
    out.push_back(clean);

    const TestReport corrupted = eq11_residual(prob, sol, /*gamma_offset=*/1);
    out.push_back(make_report("c12/eq11-corrupted-gamma", corrupted.statistic,
                              corrupted.threshold, n, c.seed, !corrupted.pass,
                              "off-by-one gamma must break telescoping"));
}

}  // namespace

const std::vector<std::pair<std::string, CriterionFn>>& acceptance_criteria() {
    static const std::vector<std::pair<std::string, CriterionFn>> list = {
        {"c01_skew_sign_law", &criterion_1},
        {"c02_driving_martingale", &criterion_2},
        {"c03_azzalini_marginal", &criterion_3},
        {"c04_tanaka_consistency", &criterion_4},
        {"c05_balayage_identities", &criterion_5},
        {"c06_class_membership", &criterion_6},
        {"c07_mean_stationarity", &criterion_7},
        {"c08_picard_convergence", &criterion_8},
        {"c09_coincidence", &criterion_9},
        {"c10_geometric_skew", &criterion_10},
        {"c11_uniqueness", &criterion_11},
        {"c12_eq11_residual", &criterion_12},
    };
    return list;
}

SuiteResult run_suite(const SuiteConfig& cfg) {
    const auto t0 = std::chrono::steady_clock::now();
    SuiteResult res;
    for (const auto& [name, fn] : acceptance_criteria()) {
        if (!cfg.only.empty()) {
            bool enabled = false;
            for (const auto& f : cfg.only)
                if (name.find(f) != std::string::npos) enabled = true;
            if (!enabled) continue;
        }
        try {
            fn(cfg, res.reports);
        } catch (const std::exception& e) {
            res.reports.push_back(
                make_report(name + "/panic", 1.0, 0.0, 0, cfg.seed, false, e.what()));
        }
    }
    for (const auto& r : res.reports) res.all_pass = res.all_pass && r.pass;
    res.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!cfg.out_dir.empty()) write_report_bundle(res, cfg, cfg.out_dir);
    return res;
}

namespace {

json report_json(const TestReport& r) {
    return json{{"name", r.name},           {"statistic", r.statistic},
                {"threshold", r.threshold}, {"n_samples", r.n_samples},
                {"seed", r.seed},           {"pass", r.pass},
                {"details", r.details}};
}

}  // namespace

std::string report_bundle_json(const SuiteResult& res, const SuiteConfig& cfg,
                               bool include_wall) {
    json bundle;
    bundle["suite"] = cfg.suite;
    bundle["seed"] = cfg.seed;
    bundle["all_pass"] = res.all_pass;
    std::size_t fails = 0;
    json reports = json::array();
    for (const auto& r : res.reports) {
        reports.push_back(report_json(r));
        if (!r.pass) ++fails;
    }
    bundle["n_reports"] = res.reports.size();
    bundle["n_fail"] = fails;
    bundle["reports"] = reports;
    if (include_wall) bundle["timing"] = json{{"wall_seconds", res.wall_seconds}};
    return bundle.dump(2);
}

void write_report_bundle(const SuiteResult& res, const SuiteConfig& cfg,
                         const std::string& dir) {
    std::filesystem::create_directories(dir);
    for (std::size_t i = 0; i < res.reports.size(); ++i) {
        std::string name = res.reports[i].name;
        for (auto& ch : name)
            if (ch == '/' || ch == '=' || ch == ' ') ch = '_';
        std::ofstream f(dir + "/" + name + ".json");
        f << report_json(res.reports[i]).dump(2) << "\n";
    }
    std::ofstream s(dir + "/summary.json");
    s << report_bundle_json(res, cfg, true) << "\n";
}

}  // namespace relmart
