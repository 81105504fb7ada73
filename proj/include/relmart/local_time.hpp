#pragma once

#include "relmart/time_grid.hpp"

namespace relmart {

/// Nondecreasing local-time path at level 0, value(0) = 0.
struct LocalTimePath {
    TimeGrid grid;
    std::vector<double> values;

    SamplePath as_path() const { return SamplePath(grid, values); }
    double back() const { return values.back(); }
    double operator[](std::size_t k) const { return values[k]; }
    std::size_t size() const { return values.size(); }
};

/// Discrete Tanaka estimator: increments (|p(k+1)| - |p(k)|) - sign(p(k)) * dp
/// with sign(0) = 0, clamped nondecreasing by running maximum. Off crossings
/// and exact zeros every increment is exactly 0.0 in floating point.
LocalTimePath local_time_tanaka(const SamplePath& path);

/// Unclamped Tanaka accumulation (the raw identity |p| - |p0| - int sign dp).
SamplePath local_time_tanaka_raw(const SamplePath& path);

/// Occupation-density estimator: L(t) = (1/2eps) * sum_{s<t} 1{|p(s)|<=eps} dt.
LocalTimePath local_time_occupation(const SamplePath& path, double epsilon);

}  // namespace relmart
