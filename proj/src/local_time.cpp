#include "relmart/local_time.hpp"

#include <cmath>
#include <stdexcept>

namespace relmart {

namespace {

inline double sign0(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

}  // namespace

SamplePath local_time_tanaka_raw(const SamplePath& path) {
    SamplePath raw(path.grid);
    double acc = 0.0;
    for (std::size_t k = 1; k < path.size(); ++k) {
        const double a = path[k], b = path[k - 1];
        const double d = a - b;
        acc += (std::abs(a) - std::abs(b)) - sign0(b) * d;
        raw[k] = acc;
    }
    return raw;
}

LocalTimePath local_time_tanaka(const SamplePath& path) {
    SamplePath raw = local_time_tanaka_raw(path);
    LocalTimePath lt;
    lt.grid = path.grid;
    lt.values.resize(raw.size());
    double run_max = 0.0;
    for (std::size_t k = 0; k < raw.size(); ++k) {
        run_max = std::max(run_max, raw[k]);
        lt.values[k] = run_max;
    }
    return lt;
}

LocalTimePath local_time_occupation(const SamplePath& path, double epsilon) {
    if (!(epsilon > 0.0))
        throw std::invalid_argument("local_time_occupation: epsilon must be > 0");
    LocalTimePath lt;
    lt.grid = path.grid;
    lt.values.resize(path.size(), 0.0);
    const double w = path.grid.dt() / (2.0 * epsilon);
    double acc = 0.0;
    for (std::size_t k = 1; k < path.size(); ++k) {
        if (std::abs(path[k - 1]) <= epsilon) acc += w;
        lt.values[k] = acc;
    }
    return lt;
}

}  // namespace relmart
