#include "relmart/sde.hpp"

#include <cmath>

#include "relmart/parallel.hpp"

namespace relmart {

CoeffSpec make_coeff_spec(std::string name,
                          std::function<double(double, double, double)> sigma,
                          std::function<double(double, double, double)> b, double C,
                          double K, bool uses_aux, double horizon) {
    CoeffSpec spec{std::move(name), std::move(sigma), std::move(b), C, K, uses_aux};
    GaussianSampler g(RngStream(0xC0EFFu, spec.name));
    const double slack = 1.0 + 1e-9;
    for (int i = 0; i < 512; ++i) {
        const double t = g.uniform() * horizon;
        const double x = 10.0 * (g.uniform() - 0.5);
        const double y = 10.0 * (g.uniform() - 0.5);
        const double aux = 6.0 * (g.uniform() - 0.5);
        const double sx = spec.sigma(t, x, aux), bx = spec.b(t, x, aux);
        if (std::abs(bx) + std::abs(sx) > spec.C * (1.0 + std::abs(x)) * slack)
            throw std::invalid_argument(spec.name + ": linear growth bound violated");
        const double sy = spec.sigma(t, y, aux), by = spec.b(t, y, aux);
        if (std::abs(bx - by) + std::abs(sx - sy) > spec.K * std::abs(x - y) * slack)
            throw std::invalid_argument(spec.name + ": Lipschitz bound violated");
    }
    return spec;
}

namespace {

SamplePath euler_impl(const SdeProblem& prob, bool include_v) {
    const TimeGrid& grid = prob.grid();
    const double dt = grid.dt();
    SamplePath X(grid);
    double x = prob.z0;
    X[0] = x;
    for (std::size_t k = 0; k + 1 < grid.size(); ++k) {
        const double t = grid.time(k);
        const double aux = prob.D_path[k];
        double dW = prob.driver.m[k + 1] - prob.driver.m[k];
        if (include_v) dW += prob.driver.v[k + 1] - prob.driver.v[k];
        x += prob.coeffs.sigma(t, x, aux) * dW + prob.coeffs.b(t, x, aux) * dt;
        if (!std::isfinite(x))
            throw solver_error("euler_solve: non-finite value at step " +
                                   std::to_string(k + 1),
                               k + 1);
        X[k + 1] = x;
    }
    return X;
}

}  // namespace

SamplePath euler_solve(const SdeProblem& prob) { return euler_impl(prob, true); }
SamplePath euler_solve_classical(const SdeProblem& prob) { return euler_impl(prob, false); }

PicardResult picard_solve_batch(const std::vector<SdeProblem>& problems,
                                std::size_t max_iter, double tol) {
    if (problems.empty()) throw std::invalid_argument("picard_solve_batch: empty batch");
    const TimeGrid& grid = problems.front().grid();
    const double dt = grid.dt();
    const std::size_t n_nodes = grid.size();
    const double inv_n = 1.0 / static_cast<double>(problems.size());

    PicardResult res;
    res.solutions.reserve(problems.size());
    for (const auto& p : problems) {
        const bool pin0 = p.zeta.has_value() && p.H_mask[0];
        SamplePath y0(grid);
        const double start = pin0 ? *p.zeta : p.z0;
        for (auto& v : y0.values) v = start;
        res.solutions.push_back(std::move(y0));
    }

    std::vector<SamplePath> next(problems.size(), SamplePath(grid));
    for (std::size_t p = 0; p < max_iter; ++p) {
        std::vector<double> partial((problems.size() + 7) / 8, 0.0);
        parallel_chunks(problems.size(), 8, [&](std::size_t c, std::size_t b, std::size_t e) {
            double acc = 0.0;
            for (std::size_t i = b; i < e; ++i) {
                const SdeProblem& prob = problems[i];
                const SamplePath& y = res.solutions[i];
                SamplePath& out = next[i];
                const bool zeta_form = prob.zeta.has_value();
                const double zeta = zeta_form ? *prob.zeta : 0.0;
                double integral = prob.z0;
                for (std::size_t k = 0; k < n_nodes; ++k) {
                    const double candidate =
                        (zeta_form && prob.H_mask[k]) ? zeta : integral;
                    out[k] = candidate;
                    const double d = candidate - y[k];
                    acc += d * d * dt;
                    if (k + 1 < n_nodes) {
                        const double t = grid.time(k);
                        const double aux = prob.D_path[k];
                        const double dW = (prob.driver.m[k + 1] - prob.driver.m[k]) +
                                          (prob.driver.v[k + 1] - prob.driver.v[k]);
                        integral += prob.coeffs.sigma(t, y[k], aux) * dW +
                                    prob.coeffs.b(t, y[k], aux) * dt;
                    }
                }
            }
            partial[c] = acc;
        });
        double sum = 0.0;
        for (double a : partial) sum += a;
        const double d_p = std::sqrt(sum * inv_n);
        res.distances.push_back(d_p);
        std::swap(res.solutions, next);
        res.iterations = p + 1;
        if (d_p <= tol) {
            res.converged = true;
            break;
        }
    }
    return res;
}

PicardResult picard_solve(const SdeProblem& prob, std::size_t max_iter, double tol) {
    return picard_solve_batch({prob}, max_iter, tol);
}

std::optional<std::pair<std::size_t, std::size_t>> coincidence_window(
    CoincidenceVariant variant, const HMask& mask) {
    const std::size_t n = mask.size() - 1;  // last node index
    switch (variant) {
        case CoincidenceVariant::P13:
            return std::make_pair(std::size_t{0}, n);
        case CoincidenceVariant::P14: {
            // [0, tau_1): up to the node before the first H node; a path that
            // never meets H keeps the full window (v never moves).
            for (std::size_t k = 0; k <= n; ++k)
                if (mask[k]) return k == 0 ? std::nullopt
                                           : std::make_optional(std::make_pair(
                                                 std::size_t{0}, k - 1));
            return std::make_pair(std::size_t{0}, n);
        }
        case CoincidenceVariant::P15: {
            // all H nodes up to the window end form one consecutive run, so
            // gamma_T lies in the run that starts at tau_1
            std::size_t a = n + 1;
            for (std::size_t k = 0; k <= n; ++k)
                if (mask[k]) { a = k; break; }
            if (a > n || a == 0) return std::nullopt;
            std::size_t b = a;
            while (b + 1 <= n && mask[b + 1]) ++b;
            std::size_t c = n + 1;  // first node of the second run
            for (std::size_t k = b + 1; k <= n; ++k)
                if (mask[k]) { c = k; break; }
            const std::size_t end = (c <= n ? c - 1 : n);
            if (end <= b) return std::nullopt;
            return std::make_pair(std::size_t{0}, end);
        }
        case CoincidenceVariant::P16: {
            // tau = d_N where N is the first excursion not sharing its right
            // endpoint with the next one (an H run of length >= 2 follows).
            // The leading stretch before the first zero is not an excursion
            // of D in the J_n sense and is dropped.
            ExcursionSet exc = extract_excursions(mask);
            auto list = exc.excursions;
            if (!list.empty() && !mask[list.front().g_idx])
                list.erase(list.begin());
            const std::size_t n_complete =
                list.size() - ((exc.includes_final_incomplete && !list.empty()) ? 1 : 0);
            if (n_complete == 0) return std::nullopt;
            for (std::size_t i = 0; i + 1 < list.size(); ++i) {
                if (list[i + 1].g_idx != list[i].d_idx)
                    return std::make_pair(std::size_t{0}, list[i].d_idx);
            }
            return std::make_pair(std::size_t{0}, list[n_complete - 1].d_idx);
        }
    }
    return std::nullopt;
}

namespace {

double window_max_diff(const SamplePath& a, const SamplePath& b,
                       std::pair<std::size_t, std::size_t> w) {
    double m = 0.0;
    for (std::size_t k = w.first; k <= w.second; ++k)
        m = std::max(m, std::abs(a[k] - b[k]));
    return m;
}

SdeProblem shifted_driver_problem(const CoeffSpec& coeffs, const SamplePath& D) {
    // W = |D| - |D_0| = int sign(D) dD + L0(D): martingale part vanishing at
    // 0, local time carried by the zero set of the shifted driver.
    Decomposition W = reflected_decomposition(D);
    SdeProblem prob;
    prob.coeffs = coeffs;
    prob.driver = std::move(W);
    prob.D_path = D;
    prob.H_mask = prob.driver.H_ref;
    prob.z0 = 0.4;
    return prob;
}

SamplePath simulate_shifted_driver(const TimeGrid& grid, const RngStream& rng,
                                   double d0) {
    SamplePath D = simulate_brownian(grid, rng);
    for (auto& v : D.values) v += d0;
    return D;
}

}  // namespace

CoincidenceOutcome coincidence_test(CoincidenceVariant variant, const CoeffSpec& coeffs,
                                    const CoincidenceParams& params) {
    const TimeGrid coarse(params.T, params.n_steps);
    const TimeGrid fine(params.T, 2 * params.n_steps);
    const RngStream calib_base(params.seed + 1, "coincidence/calibration");
    const RngStream test_base(params.seed, "coincidence/test");

    // calibration: same (relative) equation at n and 2n, max over the batch
    double baseline = 0.0;
    std::size_t calib_used = 0;
    {
        struct CalibPart { double worst = 0.0; std::size_t used = 0; };
        std::vector<CalibPart> partial((params.calib_paths + 3) / 4);
        parallel_chunks(params.calib_paths, 4, [&](std::size_t c, std::size_t b, std::size_t e) {
            for (std::size_t i = b; i < e; ++i) {
                const SamplePath Dfine =
                    simulate_shifted_driver(fine, calib_base.fork(i), params.d0);
                const SamplePath Dcoarse = restrict_path(Dfine, 1);
                SdeProblem pf = shifted_driver_problem(coeffs, Dfine);
                SdeProblem pc = shifted_driver_problem(coeffs, Dcoarse);
                const auto w = coincidence_window(variant, pc.H_mask);
                if (!w) continue;
                const SamplePath xf = restrict_path(euler_solve(pf), 1);
                const SamplePath xc = euler_solve(pc);
                partial[c].worst = std::max(partial[c].worst, window_max_diff(xf, xc, *w));
                ++partial[c].used;
            }
        });
        for (const auto& p : partial) {
            baseline = std::max(baseline, p.worst);
            calib_used += p.used;
        }
    }
    if (calib_used == 0) {
        CoincidenceOutcome out;
        out.report = make_report("coincidence/uncalibrated", 0.0, 0.99, 0, params.seed,
                                 false, "no calibration path met the variant precondition");
        return out;
    }
    const double tol = 5.0 * baseline;

    std::size_t chunk = 16;
    struct Part { std::size_t pass = 0, used = 0, excluded = 0; double worst = 0.0; };
    std::vector<Part> parts((params.n_paths + chunk - 1) / chunk);
    parallel_chunks(params.n_paths, chunk, [&](std::size_t c, std::size_t b, std::size_t e) {
        for (std::size_t i = b; i < e; ++i) {
            const SamplePath D =
                simulate_shifted_driver(coarse, test_base.fork(i), params.d0);
            SdeProblem prob = shifted_driver_problem(coeffs, D);
            const auto w = coincidence_window(variant, prob.H_mask);
            if (!w) {
                ++parts[c].excluded;
                continue;
            }
            const SamplePath x_rel = euler_solve(prob);
            const SamplePath x_cls = euler_solve_classical(prob);
            const double diff = window_max_diff(x_rel, x_cls, *w);
            ++parts[c].used;
            parts[c].worst = std::max(parts[c].worst, diff);
            if (diff <= tol) ++parts[c].pass;
        }
    });
    CoincidenceOutcome out;
    std::size_t used = 0, pass = 0;
    for (const auto& p : parts) {
        used += p.used;
        pass += p.pass;
        out.excluded += p.excluded;
        out.max_residual = std::max(out.max_residual, p.worst);
    }
    out.tolerance = tol;
    const double frac = used > 0 ? static_cast<double>(pass) / static_cast<double>(used)
                                 : 0.0;
    const char* names[] = {"P13", "P14", "P15", "P16"};
    out.report = make_report(std::string("coincidence/") + names[static_cast<int>(variant)],
                             frac, 0.99, used, params.seed, frac >= 0.99,
                             "tolerance=" + std::to_string(tol) +
                                 " excluded=" + std::to_string(out.excluded));
    return out;
}

TestReport eq11_residual(const SdeProblem& prob, const SamplePath& sol,
                         std::int64_t gamma_offset, double threshold) {
    const TimeGrid& grid = prob.grid();
    const double dt = grid.dt();
    std::vector<double> prefix(sol.size(), 0.0);
    for (std::size_t k = 0; k + 1 < sol.size(); ++k) {
        const double t = grid.time(k);
        const double aux = prob.D_path[k];
        const double dW = (prob.driver.m[k + 1] - prob.driver.m[k]) +
                          (prob.driver.v[k + 1] - prob.driver.v[k]);
        prefix[k + 1] = prefix[k] + prob.coeffs.sigma(t, sol[k], aux) * dW +
                        prob.coeffs.b(t, sol[k], aux) * dt;
    }
    const auto lz = last_zero_profile(prob.H_mask);
    double worst = 0.0;
    for (std::size_t k = 0; k < sol.size(); ++k) {
        std::int64_t g = lz[k] < 0 ? 0 : lz[k];
        g = std::min<std::int64_t>(std::max<std::int64_t>(g + gamma_offset, 0),
                                   static_cast<std::int64_t>(k));
        const auto gi = static_cast<std::size_t>(g);
        worst = std::max(worst,
                         std::abs(sol[k] - sol[gi] - (prefix[k] - prefix[gi])));
    }
    const double scale = std::max(1.0, max_abs(sol));
    const double rel = worst / scale;
    return make_report("eq11_residual", rel, threshold, grid.n_steps, 0, rel <= threshold);
}

std::pair<SamplePath, SamplePath> geometric_skew_solve(double mu, double sigma_c,
                                                       double S0,
                                                       const SamplePath& Xdelta) {
    if (!(S0 > 0.0)) throw std::invalid_argument("geometric_skew_solve: S0 must be > 0");
    const TimeGrid& grid = Xdelta.grid;
    const double dt = grid.dt();
    const double drift = mu + 0.5 * sigma_c * sigma_c;
    SamplePath euler(grid), closed(grid);
    double s = S0;
    euler[0] = S0;
    for (std::size_t k = 0; k + 1 < grid.size(); ++k) {
        s += drift * s * dt + sigma_c * s * (Xdelta[k + 1] - Xdelta[k]);
        euler[k + 1] = s;
    }
    for (std::size_t k = 0; k < grid.size(); ++k)
        closed[k] = S0 * std::exp(sigma_c * Xdelta[k] + mu * grid.time(k));
    return {std::move(euler), std::move(closed)};
}

}  // namespace relmart
