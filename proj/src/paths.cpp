#include "relmart/paths.hpp"

#include <cmath>
#include <stdexcept>

namespace relmart {

SamplePath restrict_path(const SamplePath& fine, unsigned levels) {
    const std::size_t stride = std::size_t{1} << levels;
    if (fine.grid.n_steps % stride != 0)
        throw std::invalid_argument("restrict_path: n_steps not divisible by 2^levels");
    TimeGrid coarse(fine.grid.horizon, fine.grid.n_steps / stride);
    SamplePath out(coarse);
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = fine[k * stride];
    return out;
}

SamplePath simulate_brownian(const TimeGrid& grid, const RngStream& rng) {
    GaussianSampler gauss(rng);
    SamplePath path(grid);
    const double s = std::sqrt(grid.dt());
    double x = 0.0;
    path[0] = 0.0;
    for (std::size_t k = 1; k < path.size(); ++k) {
        x += s * gauss();
        path[k] = x;
    }
    return path;
}

SamplePath simulate_driver_D(const TimeGrid& grid, const RngStream& rng) {
    return simulate_brownian(grid, rng);
}

SamplePath quadratic_variation(const SamplePath& path) {
    SamplePath qv(path.grid);
    double acc = 0.0;
    for (std::size_t k = 1; k < path.size(); ++k) {
        const double d = path[k] - path[k - 1];
        acc += d * d;
        qv[k] = acc;
    }
    return qv;
}

SamplePath bracket(const SamplePath& x, const SamplePath& y) {
    if (!(x.grid == y.grid)) throw std::invalid_argument("bracket: grid mismatch");
    SamplePath out(x.grid);
    double acc = 0.0;
    for (std::size_t k = 1; k < x.size(); ++k) {
        acc += (x[k] - x[k - 1]) * (y[k] - y[k - 1]);
        out[k] = acc;
    }
    return out;
}

SamplePath operator+(const SamplePath& a, const SamplePath& b) {
    if (!(a.grid == b.grid)) throw std::invalid_argument("path +: grid mismatch");
    SamplePath out(a.grid);
    for (std::size_t k = 0; k < a.size(); ++k) out[k] = a[k] + b[k];
    return out;
}

SamplePath operator-(const SamplePath& a, const SamplePath& b) {
    if (!(a.grid == b.grid)) throw std::invalid_argument("path -: grid mismatch");
    SamplePath out(a.grid);
    for (std::size_t k = 0; k < a.size(); ++k) out[k] = a[k] - b[k];
    return out;
}

SamplePath operator*(double c, const SamplePath& a) {
    SamplePath out(a.grid);
    for (std::size_t k = 0; k < a.size(); ++k) out[k] = c * a[k];
    return out;
}

SamplePath abs_path(const SamplePath& a) {
    SamplePath out(a.grid);
    for (std::size_t k = 0; k < a.size(); ++k) out[k] = std::abs(a[k]);
    return out;
}

SamplePath sign_path(const SamplePath& a) {
    SamplePath out(a.grid);
    for (std::size_t k = 0; k < a.size(); ++k)
        out[k] = a[k] > 0.0 ? 1.0 : (a[k] < 0.0 ? -1.0 : 0.0);
    return out;
}

double max_abs(const SamplePath& a) {
    double m = 0.0;
    for (double x : a.values) m = std::max(m, std::abs(x));
    return m;
}

double max_abs_diff(const SamplePath& a, const SamplePath& b) {
    double m = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) m = std::max(m, std::abs(a[k] - b[k]));
    return m;
}

}  // namespace relmart
