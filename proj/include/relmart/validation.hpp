#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "relmart/stats.hpp"

namespace relmart {

/// Configuration of the validation suite. "default" runs every check at the
/// acceptance scale; "fast" shrinks path counts (statistical thresholds that
/// depend on N are recomputed from their defining formulas, so the fast suite
/// stays valid, just less sharp).
struct SuiteConfig {
    std::string suite = "default";
    std::uint64_t seed = 20260809;
    std::string out_dir;             // empty: no files written
    std::vector<std::string> only;   // substring filters on criterion names
};

struct SuiteResult {
    std::vector<TestReport> reports;
    bool all_pass = true;
    double wall_seconds = 0.0;
};

using CriterionFn = void (*)(const SuiteConfig&, std::vector<TestReport>&);

/// The acceptance checks, in criterion order.
const std::vector<std::pair<std::string, CriterionFn>>& acceptance_criteria();

/// Executes every enabled check; a thrown exception inside a criterion is
/// caught and reported as that criterion's failure.
SuiteResult run_suite(const SuiteConfig& cfg);

/// JSON bundle of all reports plus a summary; wall-clock lives in a separate
/// field so byte comparison of deterministic content can exclude it.
std::string report_bundle_json(const SuiteResult& res, const SuiteConfig& cfg,
                               bool include_wall);

/// Writes one JSON file per report plus summary.json into dir.
void write_report_bundle(const SuiteResult& res, const SuiteConfig& cfg,
                         const std::string& dir);

}  // namespace relmart
