#pragma once

#include "relmart/rng.hpp"
#include "relmart/time_grid.hpp"

namespace relmart {

/// Standard Brownian motion started at 0: independent N(0, dt) increments.
SamplePath simulate_brownian(const TimeGrid& grid, const RngStream& rng);

/// The reference martingale D whose zero set plays the role of H. This
/// repository's canonical choice is a standard BM on its own stream,
/// independent of any B stream.
SamplePath simulate_driver_D(const TimeGrid& grid, const RngStream& rng);

/// Running sum of squared increments; QV(0) = 0, nondecreasing.
SamplePath quadratic_variation(const SamplePath& path);

/// Running sum of products of increments [X, Y]; bilinear, [X, X] = QV(X).
SamplePath bracket(const SamplePath& x, const SamplePath& y);

SamplePath operator+(const SamplePath& a, const SamplePath& b);
SamplePath operator-(const SamplePath& a, const SamplePath& b);
SamplePath operator*(double c, const SamplePath& a);
SamplePath abs_path(const SamplePath& a);

/// sign with sign(0) = 0, applied nodewise.
SamplePath sign_path(const SamplePath& a);

double max_abs(const SamplePath& a);
double max_abs_diff(const SamplePath& a, const SamplePath& b);

}  // namespace relmart
