#include "relmart/excursions.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace relmart {

double HMask::lebesgue_fraction() const {
    std::size_t c = 0;
    for (auto b : in_H) c += b;
    return static_cast<double>(c) / static_cast<double>(in_H.size());
}

HMask detect_zero_set(const SamplePath& path, double epsilon) {
    if (epsilon < 0.0) throw std::invalid_argument("detect_zero_set: epsilon must be >= 0");
    HMask mask;
    mask.grid = path.grid;
    mask.epsilon = epsilon;
    mask.in_H.assign(path.size(), 0);
    for (std::size_t k = 0; k < path.size(); ++k) {
        bool in = std::abs(path[k]) <= epsilon;
        if (!in && k + 1 < path.size() && path[k] * path[k + 1] < 0.0) in = true;
        mask.in_H[k] = in ? 1 : 0;
    }
    return mask;
}

namespace {

ExcursionSet extract_runs(const HMask& mask, const SamplePath* path) {
    ExcursionSet set;
    const std::size_t n = mask.size();
    std::size_t k = 0;
    while (k < n) {
        if (mask[k]) { ++k; continue; }
        const std::size_t a = k;
        while (k < n && !mask[k]) ++k;
        const std::size_t b = k - 1;  // inclusive run end
        Excursion e;
        e.first_interior = a;
        e.last_interior = b;
        e.g_idx = a > 0 ? a - 1 : 0;
        if (b + 1 < n) {
            e.d_idx = b + 1;
        } else {
            e.d_idx = n - 1;
            set.includes_final_incomplete = true;
        }
        if (path) {
            const double v = (*path)[a];
            e.sign = v > 0.0 ? 1 : (v < 0.0 ? -1 : 0);
        }
        set.excursions.push_back(e);
    }
    return set;
}

}  // namespace

ExcursionSet extract_excursions(const SamplePath& path, const HMask& mask) {
    if (mask.size() != path.size())
        throw std::invalid_argument("extract_excursions: mask/path size mismatch");
    return extract_runs(mask, &path);
}

ExcursionSet extract_excursions(const HMask& mask) { return extract_runs(mask, nullptr); }

std::optional<std::size_t> last_zero(const HMask& mask, std::size_t t_idx) {
    if (t_idx >= mask.size()) throw std::invalid_argument("last_zero: index out of grid");
    for (std::size_t k = t_idx + 1; k-- > 0;)
        if (mask[k]) return k;
    return std::nullopt;
}

std::vector<std::int64_t> last_zero_profile(const HMask& mask) {
    std::vector<std::int64_t> lz(mask.size());
    std::int64_t cur = -1;
    for (std::size_t k = 0; k < mask.size(); ++k) {
        if (mask[k]) cur = static_cast<std::int64_t>(k);
        lz[k] = cur;
    }
    return lz;
}

AlphaSchedule::AlphaSchedule(std::vector<double> starts, std::vector<double> vals)
    : cell_starts(std::move(starts)), values(std::move(vals)) {
    if (cell_starts.empty() || cell_starts.size() != values.size())
        throw std::invalid_argument("AlphaSchedule: need matching nonempty starts/values");
    if (cell_starts.front() != 0.0)
        throw std::invalid_argument("AlphaSchedule: first cell must start at 0");
    for (std::size_t i = 1; i < cell_starts.size(); ++i)
        if (!(cell_starts[i] > cell_starts[i - 1]))
            throw std::invalid_argument("AlphaSchedule: starts must be strictly increasing");
    for (double a : values)
        if (!(a >= 0.0 && a <= 1.0))
            throw std::invalid_argument("AlphaSchedule: alpha values must lie in [0, 1]");
}

std::size_t AlphaSchedule::cell_index(double t) const {
    std::size_t i = 0;
    while (i + 1 < cell_starts.size() && t >= cell_starts[i + 1]) ++i;
    return i;
}

namespace {

int draw_mark(GaussianSampler& g, double alpha) { return g.uniform() < alpha ? 1 : -1; }

}  // namespace

SignProcess sign_process_const(const ExcursionSet& exc, const TimeGrid& grid,
                               double alpha, const RngStream& rng) {
    if (!(alpha >= 0.0 && alpha <= 1.0))
        throw std::invalid_argument("sign_process_const: alpha must lie in [0, 1]");
    GaussianSampler g(rng);
    SignProcess out;
    out.Z = SamplePath(grid);
    out.draws.reserve(exc.excursions.size());
    for (std::size_t n = 0; n < exc.excursions.size(); ++n) {
        const auto& e = exc.excursions[n];
        const int m = draw_mark(g, alpha);
        out.draws.push_back({n, 0, m});
        for (std::size_t k = e.first_interior; k <= e.last_interior; ++k)
            out.Z[k] = static_cast<double>(m);
    }
    return out;
}

SignProcess sign_process_piecewise(const ExcursionSet& exc, const TimeGrid& grid,
                                   const AlphaSchedule& sched, const RngStream& rng) {
    GaussianSampler g(rng);
    SignProcess out;
    out.Z = SamplePath(grid);
    for (std::size_t n = 0; n < exc.excursions.size(); ++n) {
        const auto& e = exc.excursions[n];
        const std::size_t c_first = sched.cell_index(grid.time(e.first_interior));
        const std::size_t c_last = sched.cell_index(grid.time(e.last_interior));
        std::size_t k = e.first_interior;
        for (std::size_t c = c_first; c <= c_last; ++c) {
            const int m = draw_mark(g, sched.values[c]);
            out.draws.push_back({n, c, m});
            while (k <= e.last_interior && sched.cell_index(grid.time(k)) == c) {
                out.Z[k] = static_cast<double>(m);
                ++k;
            }
        }
    }
    return out;
}

SignProcess sign_process_cell_at_open(const ExcursionSet& exc, const TimeGrid& grid,
                                      const AlphaSchedule& sched, const RngStream& rng) {
    GaussianSampler g(rng);
    SignProcess out;
    out.draws.reserve(exc.excursions.size());
    out.Z = SamplePath(grid);
    for (std::size_t n = 0; n < exc.excursions.size(); ++n) {
        const auto& e = exc.excursions[n];
        const std::size_t c = sched.cell_index(grid.time(e.g_idx));
        const int m = draw_mark(g, sched.values[c]);
        out.draws.push_back({n, c, m});
        for (std::size_t k = e.first_interior; k <= e.last_interior; ++k)
            out.Z[k] = static_cast<double>(m);
    }
    return out;
}

SamplePath extend_marks(const SamplePath& z, bool forward) {
    SamplePath out = z;
    if (forward) {
        double cur = 0.0;
        for (std::size_t k = 0; k < out.size(); ++k) {
            if (out[k] != 0.0)
                cur = out[k];
            else
                out[k] = cur;
        }
        // leading zeros pick up the first mark
        double first = 1.0;
        for (double v : z.values)
            if (v != 0.0) { first = v; break; }
        for (std::size_t k = 0; k < out.size() && out[k] == 0.0; ++k) out[k] = first;
    } else {
        double cur = 0.0;
        for (std::size_t k = out.size(); k-- > 0;) {
            if (out[k] != 0.0)
                cur = out[k];
            else
                out[k] = cur;
        }
        double last = 1.0;
        for (std::size_t k = z.size(); k-- > 0;)
            if (z[k] != 0.0) { last = z[k]; break; }
        for (std::size_t k = out.size(); k-- > 0;) {
            if (out[k] == 0.0) out[k] = last;
            else break;
        }
    }
    return out;
}

}  // namespace relmart
