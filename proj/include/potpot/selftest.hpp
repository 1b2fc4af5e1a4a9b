#pragma once

#include <iosfwd>
#include <set>
#include <string>
#include <vector>

namespace potpot {

struct CriterionResult {
    int id = 0;
    std::string title;
    bool pass = false;
    std::string detail;
    double seconds = 0.0;
};

struct SelftestOptions {
    std::set<int> only;  ///< empty runs every criterion
    unsigned threads = 1;
};

/// Runs the acceptance criteria, printing one PASS/FAIL line per criterion as it finishes.
std::vector<CriterionResult> run_selftest(const SelftestOptions& options, std::ostream& log);

}  // namespace potpot
