#pragma once

#include <string>
#include <vector>

#include "relmart/excursions.hpp"
#include "relmart/time_grid.hpp"

namespace relmart {

/// Single path: header "t,value", one row per node, decimal text that
/// round-trips doubles.
void write_path_csv(const std::string& filename, const SamplePath& path);

/// Multiple paths: header "path,t,value".
void write_paths_csv(const std::string& filename, const std::vector<SamplePath>& paths);

/// Excursion sets: header "g_idx,d_idx,sign,mark"; marks falls back to 0
/// where no assignment is given.
void write_excursions_csv(const std::string& filename, const ExcursionSet& exc,
                          const std::vector<MarkDraw>& marks = {});

}  // namespace relmart
