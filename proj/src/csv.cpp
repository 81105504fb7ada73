#include "relmart/csv.hpp"

#include <cstdio>
#include <stdexcept>

namespace relmart {

namespace {

struct File {
    std::FILE* f;
    explicit File(const std::string& name) : f(std::fopen(name.c_str(), "w")) {
        if (!f) throw std::runtime_error("cannot open for writing: " + name);
    }
    ~File() { std::fclose(f); }
};

}  // namespace

void write_path_csv(const std::string& filename, const SamplePath& path) {
    File out(filename);
    std::fprintf(out.f, "t,value\n");
    for (std::size_t k = 0; k < path.size(); ++k)
        std::fprintf(out.f, "%.17g,%.17g\n", path.grid.time(k), path[k]);
}

void write_paths_csv(const std::string& filename, const std::vector<SamplePath>& paths) {
    if (paths.size() == 1) {
        write_path_csv(filename, paths.front());
        return;
    }
    File out(filename);
    std::fprintf(out.f, "path,t,value\n");
    for (std::size_t i = 0; i < paths.size(); ++i)
        for (std::size_t k = 0; k < paths[i].size(); ++k)
            std::fprintf(out.f, "%zu,%.17g,%.17g\n", i, paths[i].grid.time(k),
                         paths[i][k]);
}

void write_excursions_csv(const std::string& filename, const ExcursionSet& exc,
                          const std::vector<MarkDraw>& marks) {
    File out(filename);
    std::fprintf(out.f, "g_idx,d_idx,sign,mark\n");
    for (std::size_t n = 0; n < exc.excursions.size(); ++n) {
        int mark = 0;
        for (const auto& d : marks)
            if (d.excursion == n) { mark = d.mark; break; }
        std::fprintf(out.f, "%zu,%zu,%d,%d\n", exc.excursions[n].g_idx,
                     exc.excursions[n].d_idx, exc.excursions[n].sign, mark);
    }
}

}  // namespace relmart
