#pragma once

// Named invariant suite behind `maslov selftest`: every module's published
// invariants, runnable from a fresh checkout. The crossing-orientation hook
// exists so a deliberately flipped sign convention is caught by name.

#include <string>
#include <vector>

namespace maslov {

struct CheckResult {
    std::string name;
    bool pass = false;
    std::string detail;
    double seconds = 0.0;
};

struct SelftestOptions {
    int crossing_orientation = +1;  // -1 injects the sign-flip mutation
    bool quick = false;             // reduced corpora (unit-test budget)
    int threads = 1;
};

std::vector<CheckResult> run_selftest(const SelftestOptions& opts = {});

bool all_passed(const std::vector<CheckResult>& results);

}  // namespace maslov
