#pragma once

// The ten acceptance criteria as runnable checks. Each check carries its own
// tolerance and runtime budget; a criterion passes only if both hold.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace lornz {

struct AcceptanceOptions {
    std::uint64_t seed = 7;
    int workers = 1;
    /// Empty means every criterion.
    std::set<int> only;
};

struct CriterionResult {
    int id = 0;
    std::string title;
    bool passed = false;
    std::string detail;                      // measured value against its tolerance
    std::map<std::string, double> metrics;
    double seconds = 0.0;
    double budget_seconds = 0.0;
};

using CriterionCallback = std::function<void(const CriterionResult&)>;

/// Runs the selected criteria in order; `on_result` fires as each one finishes.
std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& options, const CriterionCallback& on_result = {});

/// Single line: PASS/FAIL, id, title, detail and runtime.
std::string format_result(const CriterionResult& result);

void write_acceptance_report(const std::filesystem::path& path, const std::vector<CriterionResult>& results,
                             const AcceptanceOptions& options);

}  // namespace lornz
