#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

namespace relmart {

/// Uniform discretization of [0, T] with nodes t_k = k * dt, k = 0..n_steps.
struct TimeGrid {
    double horizon = 1.0;
    std::size_t n_steps = 1;

    TimeGrid() = default;
    TimeGrid(double T, std::size_t n) : horizon(T), n_steps(n) {
        if (!(T > 0.0)) throw std::invalid_argument("TimeGrid: horizon must be > 0");
        if (n == 0) throw std::invalid_argument("TimeGrid: n_steps must be >= 1");
    }

    double dt() const { return horizon / static_cast<double>(n_steps); }
    std::size_t size() const { return n_steps + 1; }
    double time(std::size_t k) const { return static_cast<double>(k) * dt(); }

    bool operator==(const TimeGrid& o) const {
        return horizon == o.horizon && n_steps == o.n_steps;
    }
};

/// A real-valued path aligned to a TimeGrid: values[k] = X(t_k).
struct SamplePath {
    TimeGrid grid;
    std::vector<double> values;

    SamplePath() = default;
    SamplePath(TimeGrid g, std::vector<double> v) : grid(g), values(std::move(v)) {
        if (values.size() != grid.size())
            throw std::invalid_argument("SamplePath: length must be n_steps + 1");
    }
    explicit SamplePath(TimeGrid g) : grid(g), values(g.size(), 0.0) {}

    std::size_t size() const { return values.size(); }
    double operator[](std::size_t k) const { return values[k]; }
    double& operator[](std::size_t k) { return values[k]; }
    double front() const { return values.front(); }
    double back() const { return values.back(); }
};

/// Restriction of a path to every (1 << levels)-th node. The coarse path is the
/// pathwise restriction, so a BM sampled fine and restricted coincides in law
/// (and pathwise) with the same BM sampled coarse.
SamplePath restrict_path(const SamplePath& fine, unsigned levels);

inline bool all_finite(const std::vector<double>& v) {
    for (double x : v)
        if (!(x == x) || x > 1.7e308 || x < -1.7e308) return false;
    return true;
}

}  // namespace relmart
