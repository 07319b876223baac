// Acceptance gate: runs every numbered criterion and prints one line each.
// Exits nonzero if any criterion fails; details of the failing checks are
// printed under the summary line.

#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include "sinkgeo/validate.hpp"

int main(int argc, char** argv) {
    std::uint64_t seed = 42;
    if (argc > 1) seed = std::strtoull(argv[1], nullptr, 10);

    const char* labels[13] = {
        "triangle inequality gap near 0.093",
        "two-Dirac closed forms on a parameter grid",
        "metric tensor vs divergence Hessian",
        "sphere-coordinate tensor and sandwich bounds",
        "self-transport spectrum",
        "RKHS embedding round trips",
        "mean decomposition and orthogonality",
        "Gaussian variance geometry",
        "geodesic benchmarks",
        "two-point closed forms",
        "spreading nonconvexity threshold",
        "length-scale identity",
        "large-epsilon limit of the tensor",
    };

    int failed = 0;
    for (int k = 1; k <= 13; ++k) {
        std::vector<sinkgeo::CheckResult> results;
        std::string error;
        try {
            results = sinkgeo::acceptance_criterion(k, seed);
        } catch (const std::exception& e) {
            error = e.what();
        }
        bool ok = error.empty();
        for (const auto& r : results) ok = ok && r.passed;
        std::printf("criterion %2d  %-46s %s\n", k, labels[k - 1], ok ? "PASS" : "FAIL");
        if (!error.empty()) {
            std::printf("              error: %s\n", error.c_str());
        } else if (!ok) {
            for (const auto& r : results)
                if (!r.passed)
                    std::printf("              %s: observed %.9g vs threshold %.9g %s\n", r.name.c_str(),
                                r.observed, r.threshold, r.detail.c_str());
        }
        if (!ok) ++failed;
        std::fflush(stdout);
    }
    if (failed > 0) std::printf("%d of 13 criteria failed\n", failed);
    return failed == 0 ? 0 : 1;
}
