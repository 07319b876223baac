#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace sinkgeo {

// Outcome of one validation check. `observed` is the measured discrepancy
// (or violation margin) that was compared against `threshold`; boolean
// properties encode pass as 0 and fail as 1 with threshold 0.
struct CheckResult {
    std::string name;
    bool passed = false;
    double observed = 0.0;
    double threshold = 0.0;
    std::string detail;
};

// Run one numbered acceptance criterion (1 through 13). Randomized criteria
// draw their instances deterministically from the seed.
std::vector<CheckResult> acceptance_criterion(int number, std::uint64_t seed);

// Named suites for the CLI: core, sinkhorn, tensor, geodesics, closed_forms,
// or all. Each suite bundles the acceptance criteria touching that module
// plus a few module-local invariants.
std::vector<CheckResult> validate_suite(const std::string& suite, std::uint64_t seed);

}  // namespace sinkgeo
