#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "relmart/rng.hpp"
#include "relmart/time_grid.hpp"

namespace relmart {

/// Discrete surrogate of the closed random set H on a grid: node k belongs to
/// H iff |path(k)| <= epsilon or the path strictly changes sign between k and
/// k+1 (the crossing is attributed to the left node).
struct HMask {
    TimeGrid grid;
    std::vector<std::uint8_t> in_H;
    double epsilon = 0.0;

    std::size_t size() const { return in_H.size(); }
    bool operator[](std::size_t k) const { return in_H[k] != 0; }
    double lebesgue_fraction() const;
};

/// Default band half-width for BM-like paths: sqrt(dt) is the one-step
/// fluctuation scale; crossing detection alone misses near-touches.
inline double default_epsilon(const TimeGrid& grid) {
    return 2.0 * std::sqrt(grid.dt());
}

HMask detect_zero_set(const SamplePath& path, double epsilon);

/// One maximal run of consecutive non-H nodes [first_interior, last_interior],
/// flanked by H nodes g_idx and d_idx where those exist. A path that does not
/// start in H yields a leading excursion with g_idx == first_interior == 0; a
/// trailing run unterminated at T has d_idx == last_interior == n_steps and is
/// flagged on the set.
struct Excursion {
    std::size_t g_idx = 0;
    std::size_t d_idx = 0;
    std::size_t first_interior = 0;
    std::size_t last_interior = 0;
    int sign = 0;
};

struct ExcursionSet {
    std::vector<Excursion> excursions;
    bool includes_final_incomplete = false;
};

ExcursionSet extract_excursions(const SamplePath& path, const HMask& mask);
/// Interval structure from the mask alone (signs left at 0); used where only
/// H is known (e.g. a stored reference mask without its source path).
ExcursionSet extract_excursions(const HMask& mask);

/// Largest H node <= t_idx, if any.
std::optional<std::size_t> last_zero(const HMask& mask, std::size_t t_idx);

/// last-zero profile for every node; -1 where no H node precedes.
std::vector<std::int64_t> last_zero_profile(const HMask& mask);

/// Piecewise-constant alpha(t): cell i is [cell_starts[i], cell_starts[i+1])
/// and the last cell extends to the horizon. cell_starts[0] must be 0.
struct AlphaSchedule {
    std::vector<double> cell_starts;
    std::vector<double> values;

    AlphaSchedule() = default;
    AlphaSchedule(std::vector<double> starts, std::vector<double> vals);
    static AlphaSchedule constant(double alpha) { return AlphaSchedule({0.0}, {alpha}); }

    std::size_t cell_index(double t) const;
    double value_at(double t) const { return values[cell_index(t)]; }
    bool is_constant() const { return values.size() == 1; }
};

/// A drawn Bernoulli mark: P(mark = +1) = alpha of its (excursion, cell).
struct MarkDraw {
    std::size_t excursion = 0;
    std::size_t cell = 0;
    int mark = 0;
};

/// Eq.-(1)-style sign process: Z = zeta_n on the interior of excursion n,
/// 0 on H nodes; marks are i.i.d. with P(+1) = alpha, consumed in excursion
/// order from the dedicated stream.
struct SignProcess {
    SamplePath Z;
    std::vector<MarkDraw> draws;
};

SignProcess sign_process_const(const ExcursionSet& exc, const TimeGrid& grid,
                               double alpha, const RngStream& rng);

/// Eq.-(2)-style sign process: within one excursion the mark changes at
/// partition boundaries; one independent mark per (excursion, overlapped
/// cell), consumed excursion-major then cell-ascending. With a single cell
/// this consumes the exact same draws as sign_process_const.
SignProcess sign_process_piecewise(const ExcursionSet& exc, const TimeGrid& grid,
                                   const AlphaSchedule& sched, const RngStream& rng);

/// One mark per excursion with P(+1) = alpha(time of the excursion's opening
/// node): the zero-time at which the flip is decided. This is the variant the
/// weak-solution constructions use; see sign_process_piecewise for Eq. (2).
SignProcess sign_process_cell_at_open(const ExcursionSet& exc, const TimeGrid& grid,
                                      const AlphaSchedule& sched, const RngStream& rng);

/// Fill the zeros of a {-1,0,+1}-valued path with the previous nonzero value
/// (forward=true) or the next one (forward=false); leading/trailing stretches
/// take the nearest available mark, an all-zero path becomes +1.
SamplePath extend_marks(const SamplePath& z, bool forward);

}  // namespace relmart
